#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cmaa2c::risk {

using Vector = Eigen::VectorXd;

enum class RiskMetric { average, chance, cvar };

const char* to_string(RiskMetric metric);
RiskMetric parse_metric(const std::string& name);

/// Which penalty the primal-dual pair enforces.
///
///  - average: c <- c                      (discounted sum constraint)
///  - chance:  c <- I[c >= alpha] - delta  (violation probability <= delta)
///  - cvar:    c <- [c - alpha]_+ - delta  (CVaR_beta <= alpha + delta / (1 - beta))
struct PenaltySpec {
    RiskMetric metric = RiskMetric::average;
    Vector alpha = Vector::Zero(1);
    Vector delta = Vector::Zero(1);
    double beta = 0.9;

    int constraint_count() const { return static_cast<int>(delta.size()); }
    void validate() const;
};

Vector transform_penalty(const Vector& c_raw, const PenaltySpec& spec);

/// 1 when every component satisfies c_j >= alpha_j, else 0.
double joint_violation(const Vector& c_raw, const Vector& alpha);

struct WeightedSample {
    double value = 0.0;
    double weight = 0.0;
};

/// Weighted empirical surrogate of the finite-horizon occupation measure:
/// state t of an episode with T+1 states gets gamma^t (1-gamma) / (1-gamma^{T+1}),
/// and episodes are averaged uniformly.
std::vector<WeightedSample> occupation_samples(std::span<const std::vector<double>> episodes, double gamma);

/// Weighted lower beta-quantile (no interpolation). Throws ContractError on empty input.
double empirical_var(std::span<const WeightedSample> samples, double beta);

/// Mean of the upper tail of mass 1 - beta; the atom at VaR is split so the
/// tail has exactly that mass.
double empirical_cvar(std::span<const WeightedSample> samples, double beta);

/// Total weight of samples with value >= alpha.
double empirical_violation_probability(std::span<const WeightedSample> samples, double alpha);

/// alpha + delta / (1 - beta).
double cvar_upper_bound(double alpha, double delta, double beta);
Vector cvar_upper_bound(const Vector& alpha, const Vector& delta, double beta);

/// F(alpha) = alpha + E[[C - alpha]_+] / (1 - beta) under the empirical measure.
double f_alpha(std::span<const WeightedSample> samples, double beta, double alpha);
std::vector<std::pair<double, double>> f_alpha_curve(std::span<const WeightedSample> samples, double beta,
                                                     std::span<const double> alpha_grid);

/// Evaluation summary. Serialized one JSON object per line.
struct RiskReport {
    std::string metric;
    double beta = 0.9;
    double alpha = 0.0;
    double delta = 0.0;
    double var = 0.0;
    double cvar = 0.0;
    double cvar_ub = 0.0;
    double prob_violation = 0.0;
    int n_episodes = 0;

    std::string to_json() const;
    static RiskReport from_json(const std::string& line);
};

/// Builds a report from samples; cvar_ub is the measured F(alpha).
RiskReport make_report(std::span<const WeightedSample> samples, RiskMetric metric, double alpha, double delta,
                       double beta, int n_episodes);

}  // namespace cmaa2c::risk
