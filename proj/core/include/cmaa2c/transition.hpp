#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cmaa2c::env {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One environment step. Rewards and constraint values are evaluated at
/// `state`, the state the actions were chosen in.
struct Transition {
    Vector state;
    std::vector<Vector> observations;
    std::vector<int> actions;
    Vector rewards;         // one per agent
    Vector c_raw;           // C(state), never overwritten
    Vector c_transformed;   // penalty signal after the risk transform
    Vector next_state;
    bool terminal = false;
};

using Trajectory = std::vector<Transition>;

}  // namespace cmaa2c::env
