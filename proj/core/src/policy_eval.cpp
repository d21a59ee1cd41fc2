#include "cmaa2c/policy_eval.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "cmaa2c/critic.hpp"
#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/feature_critic.hpp"

namespace cmaa2c::experiments {

namespace {

using critics::CriticVariant;
using critics::FeatureCritic;
using Episode = env::LqPolicyEvalEnv::Episode;

constexpr std::array<CriticVariant, 3> kVariants{CriticVariant::generic, CriticVariant::input_augmented,
                                                 CriticVariant::structured};

// Episodes are slices of a stationary process, so every transition bootstraps.
double episode_mstde(const FeatureCritic& critic, const Episode& episode, double gamma) {
    double sum = 0.0;
    for (const auto& s : episode.steps) {
        const double d = critic.td_error(s.state, s.reward, s.constraint, s.next_state, episode.lambda, gamma);
        sum += d * d;
    }
    return sum / static_cast<double>(episode.steps.size());
}

double mstde(const FeatureCritic& critic, const std::vector<Episode>& episodes, double gamma) {
    double sum = 0.0;
    for (const auto& e : episodes) sum += episode_mstde(critic, e, gamma);
    return sum / static_cast<double>(episodes.size());
}

}  // namespace

PolicyEvalResult fig5_policy_eval(const config::PolicyEvalSettings& settings) {
    const env::LqPolicyEvalEnv env(settings.lq);
    const int n = env.state_width();
    const int m = env.constraint_count();
    Rng train_rng(derive_seed(settings.seed, 1));
    Rng held_rng(derive_seed(settings.seed, 2));

    std::vector<Episode> held_out;
    held_out.reserve(static_cast<std::size_t>(settings.eval_episodes));
    for (int k = 0; k < settings.eval_episodes; ++k) held_out.push_back(env.rollout(settings.horizon, held_rng));

    std::vector<FeatureCritic> learners;
    std::vector<FeatureCritic> averaged;
    std::vector<Eigen::VectorXd> sums;
    for (auto v : kVariants) {
        learners.emplace_back(v, n, m);
        averaged.emplace_back(v, n, m);
        sums.push_back(Eigen::VectorXd::Zero(learners.back().parameters().size()));
    }
    int averaged_count = 0;

    PolicyEvalResult result;
    for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
        const double rate = settings.learning_rate / (1.0 + (epoch - 1) / settings.rate_decay_epochs);
        for (int k = 0; k < settings.episodes_per_epoch; ++k) {
            const auto episode = env.rollout(settings.horizon, train_rng);
            for (const auto& s : episode.steps)
                for (auto& critic : learners)
                    critic.update(s.state, s.reward, s.constraint, s.next_state, episode.lambda, settings.gamma, rate);
        }
        // Polyak averaging of the iterates once the step size is small.
        if (epoch > settings.averaging_start_epoch) {
            ++averaged_count;
            for (std::size_t i = 0; i < learners.size(); ++i) {
                sums[i] += learners[i].parameters();
                averaged[i].set_parameters(sums[i] / averaged_count);
            }
        } else {
            averaged = learners;
        }
        MstdeRow row;
        row.epoch = epoch;
        row.generic = mstde(averaged[0], held_out, settings.gamma);
        row.input_augmented = mstde(averaged[1], held_out, settings.gamma);
        row.structured = mstde(averaged[2], held_out, settings.gamma);
        for (double v : {row.generic, row.input_augmented, row.structured})
            if (!std::isfinite(v) || v > 1e6)
                throw NumericalError("policy evaluation diverged at epoch " + std::to_string(epoch) +
                                     " (MSTDE " + io::format_number(v) + ")");
        result.curve.push_back(row);
    }

    const auto& last = result.curve.back();
    result.mstde_generic = last.generic;
    result.mstde_input_augmented = last.input_augmented;
    result.mstde_structured = last.structured;

    // Paired per-episode differences for the standard error of the gap.
    const auto count = static_cast<double>(held_out.size());
    std::vector<double> diffs;
    diffs.reserve(held_out.size());
    for (const auto& e : held_out)
        diffs.push_back(episode_mstde(averaged[0], e, settings.gamma) - episode_mstde(averaged[2], e, settings.gamma));
    double mean = 0.0;
    for (double d : diffs) mean += d / count;
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean) / (count - 1.0);
    result.gap = mean;
    result.gap_standard_error = std::sqrt(var / count);

    // Measured moments of the constraint (per transition) and of lambda (per episode).
    result.c_mean = Eigen::VectorXd::Zero(m);
    std::size_t steps = 0;
    for (const auto& e : held_out)
        for (const auto& s : e.steps) {
            result.c_mean += s.constraint;
            ++steps;
        }
    result.c_mean /= static_cast<double>(steps);
    result.c_cov = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : held_out)
        for (const auto& s : e.steps) {
            const Eigen::VectorXd d = s.constraint - result.c_mean;
            result.c_cov += d * d.transpose();
        }
    result.c_cov /= static_cast<double>(steps - 1);
    Eigen::VectorXd lambda_mean = Eigen::VectorXd::Zero(m);
    for (const auto& e : held_out) lambda_mean += e.lambda / count;
    result.lambda_cov = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : held_out) {
        const Eigen::VectorXd d = e.lambda - lambda_mean;
        result.lambda_cov += d * d.transpose() / (count - 1.0);
    }
    result.predicted_gap = critics::mstde_gap_prediction(result.c_mean, result.c_cov, result.lambda_cov);
    return result;
}

void write_policy_eval_csv(std::ostream& out, const PolicyEvalResult& result) {
    out << "epoch,mstde_generic,mstde_input_augmented,mstde_structured,predicted_gap\n";
    for (const auto& row : result.curve)
        out << row.epoch << ',' << io::format_number(row.generic) << ',' << io::format_number(row.input_augmented)
            << ',' << io::format_number(row.structured) << ',' << io::format_number(result.predicted_gap) << '\n';
}

void write_policy_eval_summary(std::ostream& out, const PolicyEvalResult& result) {
    out << "quantity,value\n"
        << "mstde_generic," << io::format_number(result.mstde_generic) << '\n'
        << "mstde_input_augmented," << io::format_number(result.mstde_input_augmented) << '\n'
        << "mstde_structured," << io::format_number(result.mstde_structured) << '\n'
        << "gap," << io::format_number(result.gap) << '\n'
        << "gap_standard_error," << io::format_number(result.gap_standard_error) << '\n'
        << "predicted_gap," << io::format_number(result.predicted_gap) << '\n';
}

}  // namespace cmaa2c::experiments
