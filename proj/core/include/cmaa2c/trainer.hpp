#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmaa2c/adam.hpp"
#include "cmaa2c/categorical_policy.hpp"
#include "cmaa2c/critic.hpp"
#include "cmaa2c/particle_env.hpp"
#include "cmaa2c/risk.hpp"

namespace cmaa2c::training {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Optimizer { adam, sgd };

/// Everything a training run depends on. Defaults are the reference
/// hyperparameters; the evaluation block sets the logging cadence.
struct TrainerConfig {
    double gamma = 0.99;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    double dual_lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    Optimizer optimizer = Optimizer::adam;
    int nstep = 5;
    double lambda_max = 10.0;
    double lambda_init = 0.0;
    int episodes = 8000;
    std::uint64_t seed = 1;
    critics::CriticVariant critic = critics::CriticVariant::structured;
    int target_interval = 200;
    std::vector<int> actor_hidden{64, 64};
    std::vector<int> critic_hidden{64, 64};
    int batch_episodes = 1;
    double entropy_coef = 0.0;
    double grad_clip = 0.0;  // 0 disables global-norm clipping
    bool normalize_rewards = false;

    risk::PenaltySpec penalty;
    env::ParticleConfig env;

    int eval_interval = 200;
    int eval_episodes = 50;
    double eval_alpha = 0.1;
    double eval_beta = 0.9;
    int checkpoint_interval = 0;  // 0: initial and final checkpoints only
    double dual_tolerance = 0.05;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Shared Lagrange multipliers, projected onto [0, lambda_max]^m.
class DualState {
public:
    DualState() = default;
    DualState(int constraint_count, double lambda_max, double initial = 0.0);

    const Vector& lambda() const { return lambda_; }
    double lambda_max() const { return lambda_max_; }
    Vector eta() const;

    /// lambda <- min([lambda + step * discounted_penalty]_+, lambda_max).
    void update(const Vector& discounted_penalty, double step);

private:
    Vector lambda_;
    double lambda_max_ = 0.0;
};

/// Projected dual ascent on the episode's transformed penalty signal.
void dual_update(DualState& dual, const env::Trajectory& trajectory, double step, double gamma);

/// G over t of c_transformed (or c_raw when `raw`).
Vector discounted_penalty(const env::Trajectory& trajectory, double gamma, bool raw = false);
std::vector<double> discounted_returns(const env::Trajectory& trajectory, double gamma);

/// One rollout of env.episode_length() + 1 steps with every agent sampling
/// from its own policy on its local observation. Penalties are transformed
/// with `penalty`; raw values are kept alongside.
env::Trajectory run_episode(const env::ParticleEnv& env, std::span<const nn::CategoricalPolicy> actors,
                            const risk::PenaltySpec& penalty, Rng& rng);

struct ActorStep {
    double loss = 0.0;          // -sum_t A_t log pi(u_t | o_t)
    nn::Gradients ascent;       // sum_t A_t grad log pi(u_t | o_t)
};

/// Policy-gradient direction for one agent over one or more episodes.
ActorStep actor_gradient(const nn::CategoricalPolicy& actor, const Matrix& observations,
                         std::span<const int> actions, std::span<const double> advantages);

/// Per-agent learner state; the actor itself lives in Trainer::actors().
struct AgentModels {
    nn::Adam actor_optimizer;
    critics::Critic critic;
    critics::Critic target;
    nn::Adam critic_optimizer;
};

struct EvaluationResult {
    risk::RiskReport report;
    std::vector<double> mean_returns;  // per agent, G r^i without penalty
    double mean_total_return = 0.0;
    double mean_dsc_raw = 0.0;         // G C on the first channel
};

/// Frozen-policy evaluation under stochastic action sampling. Risk
/// quantities use the raw first constraint channel on the weighted
/// finite-horizon empirical measure. Throws ConfigError if n_episodes < 1.
EvaluationResult evaluate(std::span<const nn::CategoricalPolicy> actors, const env::ParticleEnv& env,
                          int n_episodes, double gamma, const risk::PenaltySpec& penalty, double alpha,
                          double beta, Rng& rng);

/// Raw first-channel constraint values per evaluation episode.
std::vector<std::vector<double>> rollout_constraints(std::span<const nn::CategoricalPolicy> actors,
                                                     const env::ParticleEnv& env, int n_episodes, Rng& rng);

struct EpisodeMetrics {
    int episode = 0;
    std::vector<double> returns;
    Vector dsc_raw;
    Vector dsc_transformed;
    Vector lambda;
    std::vector<double> actor_loss;
    std::vector<double> critic_loss;
    std::optional<EvaluationResult> eval;
};

/// Constrained multi-agent advantage actor-critic: per episode a rollout,
/// n-step targets from the target critics, structured advantages, actor and
/// critic steps for every agent, then one shared dual step.
class Trainer {
public:
    explicit Trainer(TrainerConfig config);

    const TrainerConfig& config() const { return config_; }
    const env::ParticleEnv& environment() const { return env_; }
    const DualState& dual() const { return dual_; }
    const std::vector<AgentModels>& agents() const { return agents_; }
    std::vector<AgentModels>& agents() { return agents_; }
    const std::vector<nn::CategoricalPolicy>& actors() const { return actors_; }
    std::vector<nn::CategoricalPolicy>& actors() { return actors_; }
    int episode() const { return episode_; }

    /// Runs one update batch (batch_episodes rollouts). Throws NumericalError
    /// with the episode index on non-finite values.
    EpisodeMetrics train_step();

    EvaluationResult evaluate_now() const;

    /// Writes actor_<i>.mlp, critic_<i>.mlp, target_<i>.mlp and dual.txt.
    void save_checkpoint(const std::filesystem::path& dir) const;
    /// Restores network weights and the dual state (optimizer moments restart).
    void load_checkpoint(const std::filesystem::path& dir);

private:
    TrainerConfig config_;
    env::ParticleEnv env_;
    DualState dual_;
    std::vector<nn::CategoricalPolicy> actors_;
    std::vector<AgentModels> agents_;
    Rng rng_;
    int episode_ = 0;
    // Running reward statistics for the optional normalization.
    double reward_mean_ = 0.0;
    double reward_m2_ = 0.0;
    std::int64_t reward_count_ = 0;
};

/// Metric log header for n agents and m constraints.
std::vector<std::string> metrics_header(int agents, int constraints);
std::string metrics_row(const EpisodeMetrics& metrics);

struct TrainingArtifacts {
    std::vector<EpisodeMetrics> metrics;
    std::vector<nn::CategoricalPolicy> policies;
    Vector final_lambda;
};

/// Runs config.episodes episodes. With an output directory, writes
/// config.snapshot, metrics.csv, risk_reports.jsonl and
/// <checkpoint_subdir>/ckpt_<episode>/ (initial, every checkpoint_interval, final).
TrainingArtifacts train(const TrainerConfig& config, const std::optional<std::filesystem::path>& output_dir,
                        const std::string& checkpoint_subdir = "checkpoints");

}  // namespace cmaa2c::training
