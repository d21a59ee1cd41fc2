#include "cmaa2c/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cmaa2c/checkpoint.hpp"
#include "cmaa2c/config.hpp"
#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/occupation.hpp"

namespace cmaa2c::training {

void TrainerConfig::validate() const {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    };
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("trainer.gamma must lie in (0, 1)");
    positive(actor_lr, "trainer.actor_lr");
    positive(critic_lr, "trainer.critic_lr");
    positive(dual_lr, "trainer.dual_lr");
    positive(lambda_max, "trainer.lambda_max");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("trainer.adam_beta1/adam_beta2 must lie in [0, 1)");
    positive(adam_epsilon, "trainer.adam_epsilon");
    if (nstep < 1) throw ConfigError("trainer.nstep must be >= 1");
    if (!(lambda_init >= 0.0 && lambda_init <= lambda_max)) throw ConfigError("trainer.lambda_init must lie in [0, lambda_max]");
    if (episodes < 0) throw ConfigError("trainer.episodes must be >= 0");
    if (target_interval < 1) throw ConfigError("trainer.target_interval must be >= 1");
    if (batch_episodes < 1) throw ConfigError("trainer.batch_episodes must be >= 1");
    if (entropy_coef < 0.0 || grad_clip < 0.0) throw ConfigError("trainer.entropy_coef and grad_clip must be >= 0");
    for (int w : actor_hidden)
        if (w < 1) throw ConfigError("trainer.actor_hidden widths must be >= 1");
    for (int w : critic_hidden)
        if (w < 1) throw ConfigError("trainer.critic_hidden widths must be >= 1");
    penalty.validate();
    if (penalty.constraint_count() != 1) throw ConfigError("the particle environment has exactly one constraint channel");
    if (eval_interval < 0) throw ConfigError("evaluation.interval must be >= 0");
    if (eval_episodes < 1) throw ConfigError("evaluation.episodes must be >= 1");
    if (!(eval_beta > 0.0 && eval_beta < 1.0)) throw ConfigError("evaluation.beta must lie in (0, 1)");
    if (checkpoint_interval < 0) throw ConfigError("trainer.checkpoint_interval must be >= 0");
    if (!(dual_tolerance > 0.0)) throw ConfigError("trainer.dual_tolerance must be positive");
    env::ParticleConfig copy = env;
    copy.finalize();
}

DualState::DualState(int constraint_count, double lambda_max, double initial)
    : lambda_(Vector::Constant(constraint_count, initial)), lambda_max_(lambda_max) {
    require(constraint_count >= 1, "DualState: need at least one constraint");
    require(lambda_max > 0.0 && initial >= 0.0 && initial <= lambda_max, "DualState: bad bounds");
}

Vector DualState::eta() const {
    return critics::eta(lambda_);
}

void DualState::update(const Vector& discounted_penalty, double step) {
    require(discounted_penalty.size() == lambda_.size(), "DualState::update: width mismatch");
    lambda_ = (lambda_ + step * discounted_penalty).cwiseMax(0.0).cwiseMin(lambda_max_);
}

Vector discounted_penalty(const env::Trajectory& trajectory, double gamma, bool raw) {
    std::vector<Vector> values;
    values.reserve(trajectory.size());
    for (const auto& tr : trajectory) values.push_back(raw ? tr.c_raw : tr.c_transformed);
    if (values.empty()) return Vector();
    return occupation::discounted_sum(values, gamma);
}

std::vector<double> discounted_returns(const env::Trajectory& trajectory, double gamma) {
    if (trajectory.empty()) return {};
    std::vector<Vector> values;
    values.reserve(trajectory.size());
    for (const auto& tr : trajectory) values.push_back(tr.rewards);
    const Vector g = occupation::discounted_sum(values, gamma);
    return {g.data(), g.data() + g.size()};
}

void dual_update(DualState& dual, const env::Trajectory& trajectory, double step, double gamma) {
    if (trajectory.empty()) return;
    dual.update(discounted_penalty(trajectory, gamma), step);
}

env::Trajectory run_episode(const env::ParticleEnv& env, std::span<const nn::CategoricalPolicy> actors,
                            const risk::PenaltySpec& penalty, Rng& rng) {
    require(static_cast<int>(actors.size()) == env.agent_count(), "run_episode: one actor per agent required");
    env::Trajectory trajectory;
    trajectory.reserve(static_cast<std::size_t>(env.episode_length()) + 1);
    Vector state = env.reset(rng);
    std::vector<int> actions(actors.size());
    for (int t = 0; t <= env.episode_length(); ++t) {
        for (std::size_t i = 0; i < actors.size(); ++i)
            actions[i] = actors[i].sample(env.observe(state, static_cast<int>(i)), rng).action;
        auto tr = env.step(state, actions);
        if (!tr.next_state.allFinite() || !tr.rewards.allFinite() || !tr.c_raw.allFinite())
            throw NumericalError("run_episode: non-finite state or signal at t=" + std::to_string(t));
        tr.c_transformed = risk::transform_penalty(tr.c_raw, penalty);
        tr.terminal = t == env.episode_length();
        state = tr.next_state;
        trajectory.push_back(std::move(tr));
    }
    return trajectory;
}

ActorStep actor_gradient(const nn::CategoricalPolicy& actor, const Matrix& observations,
                         std::span<const int> actions, std::span<const double> advantages) {
    ActorStep out;
    out.ascent = actor.weighted_log_prob_grad(observations, actions, advantages);
    const Matrix logits = actor.net().forward_batch(observations);
    for (Eigen::Index t = 0; t < observations.cols(); ++t) {
        const Vector logp = nn::log_softmax(logits.col(t));
        out.loss -= advantages[static_cast<std::size_t>(t)] * logp(actions[static_cast<std::size_t>(t)]);
    }
    return out;
}

namespace {

nn::AdamOptions adam_options(const TrainerConfig& c, double lr) {
    return {lr, c.adam_beta1, c.adam_beta2, c.adam_epsilon};
}

void clip_gradients(nn::Gradients& g, double max_norm) {
    if (max_norm <= 0.0) return;
    const double norm = std::sqrt(nn::squared_norm(g));
    if (norm > max_norm) nn::scale(g, max_norm / norm);
}

}  // namespace

Trainer::Trainer(TrainerConfig config)
    : config_(std::move(config)), env_((config_.validate(), config_.env)), rng_(config_.seed) {
    dual_ = DualState(env_.constraint_count(), config_.lambda_max, config_.lambda_init);
    std::vector<int> actor_widths{env_.observation_width()};
    actor_widths.insert(actor_widths.end(), config_.actor_hidden.begin(), config_.actor_hidden.end());
    actor_widths.push_back(env_.action_count());
    for (int i = 0; i < env_.agent_count(); ++i) {
        actors_.emplace_back(nn::Mlp::make(actor_widths, rng_));
        AgentModels agent;
        agent.actor_optimizer = nn::Adam(actors_.back().net(), adam_options(config_, config_.actor_lr));
        agent.critic = critics::Critic(config_.critic, env_.state_width(), env_.constraint_count(),
                                       config_.critic_hidden, rng_);
        agent.target = agent.critic;
        agent.critic_optimizer = nn::Adam(agent.critic.net(), adam_options(config_, config_.critic_lr));
        agents_.push_back(std::move(agent));
    }
}

EpisodeMetrics Trainer::train_step() {
    const int n = env_.agent_count();
    const int m = env_.constraint_count();
    const Vector lambda = dual_.lambda();
    const int batch = config_.batch_episodes;

    std::vector<env::Trajectory> episodes;
    episodes.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) episodes.push_back(run_episode(env_, actors_, config_.penalty, rng_));

    EpisodeMetrics metrics;
    metrics.episode = episode_ + batch;
    metrics.returns.assign(static_cast<std::size_t>(n), 0.0);
    metrics.dsc_raw = Vector::Zero(m);
    metrics.dsc_transformed = Vector::Zero(m);
    for (const auto& tr : episodes) {
        const auto g = discounted_returns(tr, config_.gamma);
        for (int i = 0; i < n; ++i) metrics.returns[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)] / batch;
        metrics.dsc_raw += discounted_penalty(tr, config_.gamma, true) / batch;
        metrics.dsc_transformed += discounted_penalty(tr, config_.gamma) / batch;
    }

    if (config_.normalize_rewards) {
        for (const auto& tr : episodes)
            for (const auto& step : tr)
                for (Eigen::Index i = 0; i < step.rewards.size(); ++i) {
                    ++reward_count_;
                    const double d = step.rewards(i) - reward_mean_;
                    reward_mean_ += d / static_cast<double>(reward_count_);
                    reward_m2_ += d * (step.rewards(i) - reward_mean_);
                }
    }
    const double reward_scale =
        (config_.normalize_rewards && reward_count_ > 1)
            ? 1.0 / std::max(1e-8, std::sqrt(reward_m2_ / static_cast<double>(reward_count_ - 1)))
            : 1.0;

    // Columns of every episode in the batch, stacked.
    std::size_t total_steps = 0;
    for (const auto& tr : episodes) total_steps += tr.size();
    const auto cols = static_cast<Eigen::Index>(total_steps);
    Matrix states(env_.state_width(), cols);
    Matrix penalties(m, cols);
    {
        Eigen::Index c = 0;
        for (const auto& tr : episodes)
            for (const auto& step : tr) {
                states.col(c) = step.state;
                penalties.col(c) = step.c_transformed;
                ++c;
            }
    }

    for (int i = 0; i < n; ++i) {
        auto& agent = agents_[static_cast<std::size_t>(i)];
        auto& actor = actors_[static_cast<std::size_t>(i)];
        const int heads = agent.critic.head_count();
        Matrix targets(heads, cols);
        Matrix observations(env_.observation_width(), cols);
        std::vector<int> actions(total_steps);

        Eigen::Index offset = 0;
        for (const auto& tr : episodes) {
            const auto len = static_cast<Eigen::Index>(tr.size());
            std::vector<double> rewards(tr.size());
            for (std::size_t t = 0; t < tr.size(); ++t) {
                rewards[t] = reward_scale * tr[t].rewards(i);
                observations.col(offset + static_cast<Eigen::Index>(t)) = tr[t].observations[static_cast<std::size_t>(i)];
                actions[static_cast<std::size_t>(offset) + t] = tr[t].actions[static_cast<std::size_t>(i)];
            }
            const Matrix ep_states = states.middleCols(offset, len);
            const Matrix signals = critics::critic_signals(config_.critic, rewards, penalties.middleCols(offset, len), lambda);
            const Matrix bootstrap = agent.target.heads(ep_states, lambda);
            targets.middleCols(offset, len) = critics::nstep_returns(signals, bootstrap, config_.gamma, config_.nstep).returns;
            offset += len;
        }

        const Matrix values = agent.critic.heads(states, lambda);
        const critics::ValueTargets value_targets{targets};
        const Vector adv = critics::advantages(value_targets, values, lambda);
        if (!adv.allFinite())
            throw NumericalError("episode " + std::to_string(metrics.episode) + ": non-finite advantages for agent " +
                                 std::to_string(i + 1));

        // Actor: ascent on sum_t A_t log pi, applied as descent on its negation.
        std::vector<double> weights(adv.data(), adv.data() + adv.size());
        auto step = actor_gradient(actor, observations, actions, weights);
        if (config_.entropy_coef > 0.0) {
            const std::vector<double> ones(total_steps, config_.entropy_coef);
            nn::accumulate(step.ascent, actor.weighted_entropy_grad(observations, ones));
        }
        nn::scale(step.ascent, -1.0);
        clip_gradients(step.ascent, config_.grad_clip);
        // Critic: sum_t ||D_t - V(x_t)||^2 with D held fixed.
        auto critic_step = critics::critic_loss_and_grad(agent.critic, states, lambda, value_targets);
        clip_gradients(critic_step.gradients, config_.grad_clip);
        try {
            if (config_.optimizer == Optimizer::adam) {
                agent.actor_optimizer.step(actor.net(), step.ascent);
                agent.critic_optimizer.step(agent.critic.net(), critic_step.gradients);
            } else {
                nn::sgd_step(actor.net(), step.ascent, config_.actor_lr);
                nn::sgd_step(agent.critic.net(), critic_step.gradients, config_.critic_lr);
            }
        } catch (const NumericalError& e) {
            throw NumericalError("episode " + std::to_string(metrics.episode) + ", agent " + std::to_string(i + 1) +
                                 ": " + e.what());
        }
        metrics.actor_loss.push_back(step.loss);
        metrics.critic_loss.push_back(critic_step.loss);
    }

    dual_.update(metrics.dsc_transformed, config_.dual_lr);
    metrics.lambda = dual_.lambda();

    const int before = episode_;
    episode_ += batch;
    if (episode_ / config_.target_interval != before / config_.target_interval)
        for (auto& agent : agents_) agent.target = agent.critic;
    if (config_.eval_interval > 0 && episode_ / config_.eval_interval != before / config_.eval_interval)
        metrics.eval = evaluate_now();
    return metrics;
}

EvaluationResult Trainer::evaluate_now() const {
    Rng eval_rng(derive_seed(config_.seed, static_cast<std::uint64_t>(episode_)));
    return evaluate(actors_, env_, config_.eval_episodes, config_.gamma, config_.penalty, config_.eval_alpha,
                    config_.eval_beta, eval_rng);
}

void Trainer::save_checkpoint(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        nn::save_mlp(dir / ("actor_" + std::to_string(i + 1) + ".mlp"), actors_[i].net());
        nn::save_mlp(dir / ("critic_" + std::to_string(i + 1) + ".mlp"), agents_[i].critic.net());
        nn::save_mlp(dir / ("target_" + std::to_string(i + 1) + ".mlp"), agents_[i].target.net());
    }
    std::ostringstream dual;
    dual << "episode " << episode_ << "\nlambda";
    for (Eigen::Index j = 0; j < dual_.lambda().size(); ++j) dual << ' ' << io::format_number(dual_.lambda()(j));
    dual << '\n';
    io::write_file(dir / "dual.txt", dual.str());
}

void Trainer::load_checkpoint(const std::filesystem::path& dir) {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        actors_[i] = nn::CategoricalPolicy(nn::load_mlp(dir / ("actor_" + std::to_string(i + 1) + ".mlp")));
        const auto variant = agents_[i].critic.variant();
        const int sw = env_.state_width();
        const int m = env_.constraint_count();
        agents_[i].critic = critics::Critic(variant, sw, m, nn::load_mlp(dir / ("critic_" + std::to_string(i + 1) + ".mlp")));
        agents_[i].target = critics::Critic(variant, sw, m, nn::load_mlp(dir / ("target_" + std::to_string(i + 1) + ".mlp")));
        agents_[i].actor_optimizer = nn::Adam(actors_[i].net(), adam_options(config_, config_.actor_lr));
        agents_[i].critic_optimizer = nn::Adam(agents_[i].critic.net(), adam_options(config_, config_.critic_lr));
    }
    std::istringstream in(io::read_file(dir / "dual.txt"));
    std::string word;
    int episode = 0;
    if (!(in >> word >> episode) || word != "episode") throw ConfigError("dual.txt: missing episode");
    if (!(in >> word) || word != "lambda") throw ConfigError("dual.txt: missing lambda");
    Vector lambda(env_.constraint_count());
    for (Eigen::Index j = 0; j < lambda.size(); ++j)
        if (!(in >> lambda(j))) throw ConfigError("dual.txt: truncated lambda");
    dual_ = DualState(env_.constraint_count(), config_.lambda_max, 0.0);
    dual_.update(lambda, 1.0);
    episode_ = episode;
}

std::vector<std::string> metrics_header(int agents, int constraints) {
    std::vector<std::string> h{"episode"};
    for (int i = 1; i <= agents; ++i) h.push_back("return_agent" + std::to_string(i));
    if (constraints == 1) {
        h.push_back("dsc_raw");
        h.push_back("dsc_transformed");
    } else {
        for (int j = 1; j <= constraints; ++j) h.push_back("dsc_raw_" + std::to_string(j));
        for (int j = 1; j <= constraints; ++j) h.push_back("dsc_transformed_" + std::to_string(j));
    }
    for (int j = 1; j <= constraints; ++j) h.push_back("lambda_" + std::to_string(j));
    for (int i = 1; i <= agents; ++i) h.push_back("actor_loss_" + std::to_string(i));
    for (int i = 1; i <= agents; ++i) h.push_back("critic_loss_" + std::to_string(i));
    for (const char* name : {"prob_violation_eval", "var_eval", "cvar_eval", "cvar_ub", "return_eval", "dsc_eval"})
        h.emplace_back(name);
    return h;
}

std::string metrics_row(const EpisodeMetrics& metrics) {
    std::ostringstream out;
    out << metrics.episode;
    for (double r : metrics.returns) out << ',' << io::format_number(r);
    for (Eigen::Index j = 0; j < metrics.dsc_raw.size(); ++j) out << ',' << io::format_number(metrics.dsc_raw(j));
    for (Eigen::Index j = 0; j < metrics.dsc_transformed.size(); ++j)
        out << ',' << io::format_number(metrics.dsc_transformed(j));
    for (Eigen::Index j = 0; j < metrics.lambda.size(); ++j) out << ',' << io::format_number(metrics.lambda(j));
    for (double l : metrics.actor_loss) out << ',' << io::format_number(l);
    for (double l : metrics.critic_loss) out << ',' << io::format_number(l);
    if (metrics.eval) {
        const auto& e = *metrics.eval;
        for (double v : {e.report.prob_violation, e.report.var, e.report.cvar, e.report.cvar_ub, e.mean_total_return,
                         e.mean_dsc_raw})
            out << ',' << io::format_number(v);
    } else {
        out << ",,,,,,";
    }
    return out.str();
}

TrainingArtifacts train(const TrainerConfig& config, const std::optional<std::filesystem::path>& output_dir,
                        const std::string& checkpoint_subdir) {
    Trainer trainer(config);
    const int n = trainer.environment().agent_count();
    const int m = trainer.environment().constraint_count();

    std::ofstream metrics_out, reports_out;
    std::filesystem::path checkpoint_root;
    const auto save = [&](int episode) {
        if (output_dir) trainer.save_checkpoint(checkpoint_root / ("ckpt_" + std::to_string(episode)));
    };
    if (output_dir) {
        std::filesystem::create_directories(*output_dir);
        checkpoint_root = checkpoint_subdir.empty() ? *output_dir : *output_dir / checkpoint_subdir;
        io::write_file(*output_dir / "config.snapshot", config::to_document(config).dump());
        metrics_out.open(*output_dir / "metrics.csv");
        reports_out.open(*output_dir / "risk_reports.jsonl");
        if (!metrics_out || !reports_out) throw ConfigError("cannot write outputs under " + output_dir->string());
        const auto header = metrics_header(n, m);
        for (std::size_t k = 0; k < header.size(); ++k) metrics_out << (k ? "," : "") << header[k];
        metrics_out << '\n';
        save(0);
    }

    TrainingArtifacts artifacts;
    while (trainer.episode() < config.episodes) {
        auto metrics = trainer.train_step();
        if (output_dir) {
            metrics_out << metrics_row(metrics) << '\n';
            if (metrics.eval) {
                auto line = metrics.eval->report.to_json();
                // Tag each report with the episode it belongs to.
                line.insert(1, "\"episode\":" + std::to_string(metrics.episode) + ",");
                reports_out << line << '\n';
            }
            if (config.checkpoint_interval > 0 && metrics.episode % config.checkpoint_interval == 0 &&
                metrics.episode < config.episodes)
                save(metrics.episode);
        }
        artifacts.metrics.push_back(std::move(metrics));
    }
    if (output_dir && config.episodes > 0) save(trainer.episode());
    artifacts.policies = trainer.actors();
    artifacts.final_lambda = trainer.dual().lambda();
    return artifacts;
}

}  // namespace cmaa2c::training
