#include "cmaa2c/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::risk {

namespace {

// Samples sorted by value with the normalizing total weight.
struct SortedSamples {
    std::vector<WeightedSample> items;
    double total = 0.0;
};

SortedSamples sorted(std::span<const WeightedSample> samples, const char* who) {
    if (samples.empty()) throw ContractError(std::string(who) + ": empty sample set");
    SortedSamples s;
    s.items.assign(samples.begin(), samples.end());
    for (const auto& x : s.items) {
        require(x.weight >= 0.0 && std::isfinite(x.value), std::string(who) + ": invalid sample");
        s.total += x.weight;
    }
    require(s.total > 0.0, std::string(who) + ": total weight must be positive");
    std::stable_sort(s.items.begin(), s.items.end(),
                     [](const WeightedSample& a, const WeightedSample& b) { return a.value < b.value; });
    return s;
}

double var_sorted(const SortedSamples& s, double beta) {
    const double target = beta * s.total * (1.0 - 1e-12);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < s.items.size(); ++k) {
        cumulative += s.items[k].weight;
        // Only a value boundary can be a quantile.
        const bool boundary = k + 1 == s.items.size() || s.items[k + 1].value != s.items[k].value;
        if (boundary && cumulative >= target) return s.items[k].value;
    }
    return s.items.back().value;
}

double excess_mean(std::span<const WeightedSample> samples, double total, double alpha) {
    double acc = 0.0;
    for (const auto& x : samples) acc += x.weight * std::max(x.value - alpha, 0.0);
    return acc / total;
}

void check_beta(double beta, const char* who) {
    require(beta > 0.0 && beta < 1.0, std::string(who) + ": beta must lie in (0, 1)");
}

}  // namespace

const char* to_string(RiskMetric metric) {
    switch (metric) {
        case RiskMetric::average: return "average";
        case RiskMetric::chance: return "chance";
        case RiskMetric::cvar: return "cvar";
    }
    return "average";
}

RiskMetric parse_metric(const std::string& name) {
    if (name == "average") return RiskMetric::average;
    if (name == "chance") return RiskMetric::chance;
    if (name == "cvar") return RiskMetric::cvar;
    throw ConfigError("unknown risk metric '" + name + "' (expected average, chance or cvar)");
}

void PenaltySpec::validate() const {
    if (alpha.size() != delta.size()) throw ConfigError("penalty: alpha and delta must have the same length");
    if (delta.size() < 1) throw ConfigError("penalty: at least one constraint channel required");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("penalty.beta must lie in (0, 1)");
    for (Eigen::Index j = 0; j < delta.size(); ++j) {
        if (metric == RiskMetric::chance && !(delta(j) >= 0.0 && delta(j) <= 1.0))
            throw ConfigError("penalty.delta must lie in [0, 1] for chance constraints");
        if (metric == RiskMetric::cvar && !(alpha(j) >= 0.0 && delta(j) >= 0.0))
            throw ConfigError("penalty.alpha and penalty.delta must be >= 0 for CVaR constraints");
    }
}

Vector transform_penalty(const Vector& c_raw, const PenaltySpec& spec) {
    require(c_raw.size() == spec.delta.size(), "transform_penalty: channel count mismatch");
    switch (spec.metric) {
        case RiskMetric::average:
            return c_raw;
        case RiskMetric::chance: {
            Vector out(c_raw.size());
            for (Eigen::Index j = 0; j < c_raw.size(); ++j)
                out(j) = (c_raw(j) >= spec.alpha(j) ? 1.0 : 0.0) - spec.delta(j);
            return out;
        }
        case RiskMetric::cvar: {
            Vector out(c_raw.size());
            for (Eigen::Index j = 0; j < c_raw.size(); ++j)
                out(j) = std::max(c_raw(j) - spec.alpha(j), 0.0) - spec.delta(j);
            return out;
        }
    }
    return c_raw;
}

double joint_violation(const Vector& c_raw, const Vector& alpha) {
    require(c_raw.size() == alpha.size(), "joint_violation: channel count mismatch");
    return (c_raw.array() >= alpha.array()).all() ? 1.0 : 0.0;
}

std::vector<WeightedSample> occupation_samples(std::span<const std::vector<double>> episodes, double gamma) {
    require(gamma > 0.0 && gamma < 1.0, "occupation_samples: gamma must lie in (0, 1)");
    std::vector<WeightedSample> out;
    std::size_t nonempty = 0;
    for (const auto& e : episodes) nonempty += e.empty() ? 0 : 1;
    if (nonempty == 0) return out;
    for (const auto& episode : episodes) {
        if (episode.empty()) continue;
        const double norm = (1.0 - gamma) / (1.0 - std::pow(gamma, static_cast<double>(episode.size())));
        double weight = norm / static_cast<double>(nonempty);
        for (double v : episode) {
            out.push_back({v, weight});
            weight *= gamma;
        }
    }
    return out;
}

double empirical_var(std::span<const WeightedSample> samples, double beta) {
    check_beta(beta, "empirical_var");
    return var_sorted(sorted(samples, "empirical_var"), beta);
}

double empirical_cvar(std::span<const WeightedSample> samples, double beta) {
    check_beta(beta, "empirical_cvar");
    const auto s = sorted(samples, "empirical_cvar");
    const double var = var_sorted(s, beta);
    // VaR + E[(C - VaR)_+] / (1 - beta) is the tail mean with the VaR atom split.
    return var + excess_mean(s.items, s.total, var) / (1.0 - beta);
}

double empirical_violation_probability(std::span<const WeightedSample> samples, double alpha) {
    if (samples.empty()) throw ContractError("empirical_violation_probability: empty sample set");
    double hit = 0.0, total = 0.0;
    for (const auto& x : samples) {
        total += x.weight;
        if (x.value >= alpha) hit += x.weight;
    }
    require(total > 0.0, "empirical_violation_probability: total weight must be positive");
    return hit / total;
}

double cvar_upper_bound(double alpha, double delta, double beta) {
    check_beta(beta, "cvar_upper_bound");
    return alpha + delta / (1.0 - beta);
}

Vector cvar_upper_bound(const Vector& alpha, const Vector& delta, double beta) {
    require(alpha.size() == delta.size(), "cvar_upper_bound: size mismatch");
    check_beta(beta, "cvar_upper_bound");
    return alpha + delta / (1.0 - beta);
}

double f_alpha(std::span<const WeightedSample> samples, double beta, double alpha) {
    check_beta(beta, "f_alpha");
    if (samples.empty()) throw ContractError("f_alpha: empty sample set");
    double total = 0.0;
    for (const auto& x : samples) total += x.weight;
    require(total > 0.0, "f_alpha: total weight must be positive");
    return alpha + excess_mean(samples, total, alpha) / (1.0 - beta);
}

std::vector<std::pair<double, double>> f_alpha_curve(std::span<const WeightedSample> samples, double beta,
                                                     std::span<const double> alpha_grid) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(alpha_grid.size());
    for (double a : alpha_grid) curve.emplace_back(a, f_alpha(samples, beta, a));
    return curve;
}

std::string RiskReport::to_json() const {
    nlohmann::ordered_json j;
    j["metric"] = metric;
    j["beta"] = beta;
    j["alpha"] = alpha;
    j["delta"] = delta;
    j["var"] = var;
    j["cvar"] = cvar;
    j["cvar_ub"] = cvar_ub;
    j["prob_violation"] = prob_violation;
    j["n_episodes"] = n_episodes;
    return j.dump();
}

RiskReport RiskReport::from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    RiskReport r;
    r.metric = j.at("metric").get<std::string>();
    r.beta = j.at("beta").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.delta = j.at("delta").get<double>();
    r.var = j.at("var").get<double>();
    r.cvar = j.at("cvar").get<double>();
    r.cvar_ub = j.at("cvar_ub").get<double>();
    r.prob_violation = j.at("prob_violation").get<double>();
    r.n_episodes = j.at("n_episodes").get<int>();
    return r;
}

RiskReport make_report(std::span<const WeightedSample> samples, RiskMetric metric, double alpha, double delta,
                       double beta, int n_episodes) {
    RiskReport r;
    r.metric = to_string(metric);
    r.beta = beta;
    r.alpha = alpha;
    r.delta = delta;
    r.var = empirical_var(samples, beta);
    r.cvar = empirical_cvar(samples, beta);
    r.cvar_ub = f_alpha(samples, beta, alpha);
    r.prob_violation = empirical_violation_probability(samples, alpha);
    r.n_episodes = n_episodes;
    return r;
}

}  // namespace cmaa2c::risk
