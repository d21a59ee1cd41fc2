#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "cmaa2c/random.hpp"
#include "cmaa2c/transition.hpp"

namespace cmaa2c::env {

enum class ConstraintMode {
    sum,       // C(y) = 1^T y over every agent position coordinate
    constant,  // C == constraint_constant (ablation and heuristic tests)
};

struct ParticleConfig {
    int agents = 2;
    double dt = 0.1;
    double damping = 0.25;
    double mass = 1.0;
    double force = 1.0;
    double sensitivity = 5.0;
    int episode_length = 25;
    /// Initial positions are uniform on [init_low, init_high]^2 per agent.
    double init_low = -1.0;
    double init_high = 1.0;
    /// Landmark per agent; defaults to (0.75, 0.75) for each.
    std::vector<std::array<double, 2>> landmarks;
    /// Reward weight per agent; defaults to 1.
    std::vector<double> xi;
    ConstraintMode constraint = ConstraintMode::sum;
    double constraint_constant = 0.0;

    /// Fills landmark/xi defaults for the agent count and checks ranges.
    void finalize();
};

/// Two-agent (by default) double-integrator particles with a shared linear
/// constraint on the joint position. Joint state layout per agent i:
/// [y_x, y_y, v_x, v_y] at offset 4 i.
///
/// Actions: 0 no-op, 1 +x, 2 -x, 3 +y, 4 -y.
class ParticleEnv {
public:
    static constexpr int kActionCount = 5;
    static constexpr int kStatePerAgent = 4;
    static constexpr int kObservationWidth = 6;

    explicit ParticleEnv(ParticleConfig config);

    const ParticleConfig& config() const { return config_; }
    int agent_count() const { return config_.agents; }
    int state_width() const { return kStatePerAgent * config_.agents; }
    int observation_width() const { return kObservationWidth; }
    int constraint_count() const { return 1; }
    int action_count() const { return kActionCount; }
    int episode_length() const { return config_.episode_length; }

    /// Positions from the initial sampler, velocities zero.
    Vector reset(Rng& rng) const;

    /// Own position, own velocity, offset to own landmark.
    Vector observe(const Vector& state, int agent) const;
    std::vector<Vector> observe_all(const Vector& state) const;

    Vector rewards(const Vector& state) const;
    Vector constraints(const Vector& state) const;

    /// Deterministic dynamics for one joint action.
    Vector next_state(const Vector& state, std::span<const int> actions) const;

    /// Evaluates reward and constraint at `state` and advances it. The
    /// transformed penalty is left equal to the raw constraint.
    Transition step(const Vector& state, std::span<const int> actions) const;

    /// Mean of the initial position sampler (per coordinate).
    double initial_position_mean() const { return 0.5 * (config_.init_low + config_.init_high); }

private:
    ParticleConfig config_;
};

/// CSV dump: t, x1..x_S, u1..u_n, r1..r_n, c_raw, c_transformed (first constraint channel).
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace cmaa2c::env
