#pragma once

#include <vector>

#include "cmaa2c/random.hpp"
#include "cmaa2c/transition.hpp"

namespace cmaa2c::env {

/// Finite Markov chain induced by a fixed policy: row-stochastic transition
/// matrix, initial distribution, and per-state constraint values (S x m).
struct TabularMdp {
    Matrix transition;
    Vector initial;
    Matrix constraint;

    int state_count() const { return static_cast<int>(transition.rows()); }

    /// Throws ContractError on shape errors or when a row of P or p0 fails to
    /// sum to one within 1e-12.
    void validate() const;

    /// Random chain with S states: dense Dirichlet-like rows, random p0, and a
    /// single constraint column uniform on [-1, 1].
    static TabularMdp random(int states, Rng& rng);

    /// P = [[0,1],[1,0]], p0 = [1,0], c = [0,1].
    static TabularMdp alternating();

    /// Three-state ergodic chain, c = [-1, 0, 1], p0 = [1, 0, 0].
    static TabularMdp builtin_ergodic();

    /// P = [[0.7, 0.3], [0.4, 0.6]], p0 = [1, 0], c = [-1, 1]; stationary [4/7, 3/7].
    static TabularMdp builtin_two_state();
};

/// Sample path x_0..x_horizon (horizon + 1 states).
std::vector<int> tabular_rollout(const TabularMdp& mdp, int horizon, Rng& rng);

/// Index drawn from a probability vector by inverse CDF.
int sample_index(const Vector& probabilities, Rng& rng);

}  // namespace cmaa2c::env
