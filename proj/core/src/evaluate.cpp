#include "cmaa2c/errors.hpp"
#include "cmaa2c/occupation.hpp"
#include "cmaa2c/trainer.hpp"

namespace cmaa2c::training {

std::vector<std::vector<double>> rollout_constraints(std::span<const nn::CategoricalPolicy> actors,
                                                     const env::ParticleEnv& env, int n_episodes, Rng& rng) {
    if (n_episodes < 1) throw ConfigError("evaluation needs at least one episode");
    risk::PenaltySpec identity;
    identity.metric = risk::RiskMetric::average;
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(n_episodes));
    for (int k = 0; k < n_episodes; ++k) {
        const auto trajectory = run_episode(env, actors, identity, rng);
        std::vector<double> values;
        values.reserve(trajectory.size());
        for (const auto& tr : trajectory) values.push_back(tr.c_raw(0));
        out.push_back(std::move(values));
    }
    return out;
}

EvaluationResult evaluate(std::span<const nn::CategoricalPolicy> actors, const env::ParticleEnv& env,
                          int n_episodes, double gamma, const risk::PenaltySpec& penalty, double alpha,
                          double beta, Rng& rng) {
    if (n_episodes < 1) throw ConfigError("evaluation needs at least one episode");
    EvaluationResult result;
    result.mean_returns.assign(static_cast<std::size_t>(env.agent_count()), 0.0);
    std::vector<std::vector<double>> constraint_paths;
    constraint_paths.reserve(static_cast<std::size_t>(n_episodes));
    for (int k = 0; k < n_episodes; ++k) {
        const auto trajectory = run_episode(env, actors, penalty, rng);
        const auto returns = discounted_returns(trajectory, gamma);
        for (std::size_t i = 0; i < returns.size(); ++i) result.mean_returns[i] += returns[i] / n_episodes;
        std::vector<double> values;
        values.reserve(trajectory.size());
        for (const auto& tr : trajectory) values.push_back(tr.c_raw(0));
        result.mean_dsc_raw += occupation::discounted_sum(values, gamma) / n_episodes;
        constraint_paths.push_back(std::move(values));
    }
    for (double r : result.mean_returns) result.mean_total_return += r;
    const auto samples = risk::occupation_samples(constraint_paths, gamma);
    result.report = risk::make_report(samples, penalty.metric, alpha, penalty.delta(0), beta, n_episodes);
    return result;
}

}  // namespace cmaa2c::training
