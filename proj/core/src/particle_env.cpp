#include "cmaa2c/particle_env.hpp"

#include <ostream>
#include <string>

#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"

namespace cmaa2c::env {

namespace {

// Unit direction for each discrete action.
constexpr double kDirection[ParticleEnv::kActionCount][2] = {
    {0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};

}  // namespace

void ParticleConfig::finalize() {
    if (agents < 1) throw ConfigError("env.agents must be >= 1");
    if (landmarks.empty()) landmarks.assign(static_cast<std::size_t>(agents), {0.75, 0.75});
    if (xi.empty()) xi.assign(static_cast<std::size_t>(agents), 1.0);
    if (static_cast<int>(landmarks.size()) != agents) throw ConfigError("env: one landmark per agent required");
    if (static_cast<int>(xi.size()) != agents) throw ConfigError("env: one xi per agent required");
    for (double w : xi)
        if (!(w > 0.0)) throw ConfigError("env.xi entries must be positive");
    if (!(dt > 0.0)) throw ConfigError("env.dt must be positive");
    if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("env.damping must lie in [0, 1)");
    if (!(mass > 0.0)) throw ConfigError("env.mass must be positive");
    if (episode_length < 0) throw ConfigError("env.episode_length must be >= 0");
    if (!(init_low <= init_high)) throw ConfigError("env.init_low must not exceed env.init_high");
}

ParticleEnv::ParticleEnv(ParticleConfig config) : config_(std::move(config)) {
    config_.finalize();
}

Vector ParticleEnv::reset(Rng& rng) const {
    Vector state = Vector::Zero(state_width());
    for (int i = 0; i < config_.agents; ++i) {
        state(kStatePerAgent * i) = uniform(rng, config_.init_low, config_.init_high);
        state(kStatePerAgent * i + 1) = uniform(rng, config_.init_low, config_.init_high);
    }
    return state;
}

Vector ParticleEnv::observe(const Vector& state, int agent) const {
    require(state.size() == state_width(), "ParticleEnv::observe: state width mismatch");
    require(agent >= 0 && agent < config_.agents, "ParticleEnv::observe: agent out of range");
    const auto base = kStatePerAgent * agent;
    const auto& landmark = config_.landmarks[static_cast<std::size_t>(agent)];
    Vector obs(kObservationWidth);
    obs << state(base), state(base + 1), state(base + 2), state(base + 3), landmark[0] - state(base),
        landmark[1] - state(base + 1);
    return obs;
}

std::vector<Vector> ParticleEnv::observe_all(const Vector& state) const {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(config_.agents));
    for (int i = 0; i < config_.agents; ++i) out.push_back(observe(state, i));
    return out;
}

Vector ParticleEnv::rewards(const Vector& state) const {
    require(state.size() == state_width(), "ParticleEnv::rewards: state width mismatch");
    Vector r(config_.agents);
    for (int i = 0; i < config_.agents; ++i) {
        const auto& landmark = config_.landmarks[static_cast<std::size_t>(i)];
        const double dx = state(kStatePerAgent * i) - landmark[0];
        const double dy = state(kStatePerAgent * i + 1) - landmark[1];
        r(i) = -config_.xi[static_cast<std::size_t>(i)] * (dx * dx + dy * dy);
    }
    return r;
}

Vector ParticleEnv::constraints(const Vector& state) const {
    require(state.size() == state_width(), "ParticleEnv::constraints: state width mismatch");
    Vector c(1);
    if (config_.constraint == ConstraintMode::constant) {
        c(0) = config_.constraint_constant;
        return c;
    }
    double sum = 0.0;
    for (int i = 0; i < config_.agents; ++i) sum += state(kStatePerAgent * i) + state(kStatePerAgent * i + 1);
    c(0) = sum;
    return c;
}

Vector ParticleEnv::next_state(const Vector& state, std::span<const int> actions) const {
    require(state.size() == state_width(), "ParticleEnv::step: state width mismatch");
    require(static_cast<int>(actions.size()) == config_.agents, "ParticleEnv::step: one action per agent required");
    const double accel = config_.force * config_.sensitivity / config_.mass;
    Vector next = state;
    for (int i = 0; i < config_.agents; ++i) {
        const int a = actions[static_cast<std::size_t>(i)];
        require(a >= 0 && a < kActionCount, "ParticleEnv::step: action " + std::to_string(a) + " out of range");
        const auto base = kStatePerAgent * i;
        for (int d = 0; d < 2; ++d) {
            const double v = (1.0 - config_.damping) * state(base + 2 + d) + accel * config_.dt * kDirection[a][d];
            next(base + 2 + d) = v;
            next(base + d) = state(base + d) + v * config_.dt;
        }
    }
    return next;
}

Transition ParticleEnv::step(const Vector& state, std::span<const int> actions) const {
    Transition tr;
    tr.state = state;
    tr.observations = observe_all(state);
    tr.actions.assign(actions.begin(), actions.end());
    tr.rewards = rewards(state);
    tr.c_raw = constraints(state);
    tr.c_transformed = tr.c_raw;
    tr.next_state = next_state(state, actions);
    return tr;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    if (trajectory.empty()) {
        out << "t\n";
        return;
    }
    const auto& first = trajectory.front();
    out << "t";
    for (Eigen::Index k = 0; k < first.state.size(); ++k) out << ",x" << k + 1;
    for (std::size_t i = 0; i < first.actions.size(); ++i) out << ",u" << i + 1;
    for (Eigen::Index i = 0; i < first.rewards.size(); ++i) out << ",r" << i + 1;
    out << ",c_raw,c_transformed\n";
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        const auto& tr = trajectory[t];
        out << t;
        for (Eigen::Index k = 0; k < tr.state.size(); ++k) out << ',' << io::format_number(tr.state(k));
        for (int a : tr.actions) out << ',' << a;
        for (Eigen::Index i = 0; i < tr.rewards.size(); ++i) out << ',' << io::format_number(tr.rewards(i));
        out << ',' << io::format_number(tr.c_raw(0)) << ',' << io::format_number(tr.c_transformed(0)) << '\n';
    }
}

}  // namespace cmaa2c::env
