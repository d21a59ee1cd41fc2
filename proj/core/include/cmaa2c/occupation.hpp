#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cmaa2c/tabular_mdp.hpp"

namespace cmaa2c::occupation {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// gamma must lie in (0, 1 - 1e-9]; an optional horizon switches to the
/// finite-horizon measure over t = 0..T.
struct DiscountSpec {
    double gamma = 0.99;
    std::optional<int> horizon;

    void validate() const;
};

/// (1 - gamma) * sum_t gamma^t values[t]; empty input gives 0.
double discounted_sum(std::span<const double> values, double gamma);

/// Componentwise discounted sum over a sequence of equally sized vectors.
Vector discounted_sum(std::span<const Vector> values, double gamma);

enum class OccupationMode { infinite_horizon, finite_horizon };

struct OccupationResult {
    Vector measure;
    OccupationMode mode = OccupationMode::infinite_horizon;
};

/// Infinite horizon: mu = (1 - gamma) (I - gamma P^T)^{-1} p0 (dense LU).
/// Finite horizon T: mu = (1 - gamma^{T+1})^{-1} (1 - gamma) sum_{t<=T} gamma^t (P^T)^t p0.
OccupationResult occupation_exact(const env::TabularMdp& mdp, const DiscountSpec& spec);

/// Irreducible and aperiodic.
bool is_ergodic(const Matrix& transition);

/// Left Perron vector of P normalized to sum one. Throws ContractError for
/// non-ergodic chains.
Vector stationary_distribution(const env::TabularMdp& mdp);

struct LimitsRow {
    double gamma = 0.0;
    double distance_to_initial = 0.0;     // ||mu_gamma - p0||_inf
    double distance_to_stationary = 0.0;  // ||mu_gamma - p_inf||_inf, NaN when not requested
};

struct LimitsReport {
    std::vector<LimitsRow> rows;
    std::optional<Vector> stationary;
};

/// Sweeps gamma and reports both limit distances. When `stationary_branch`
/// is set the chain must be ergodic (ContractError otherwise).
LimitsReport occupation_limits_check(const env::TabularMdp& mdp, std::span<const double> gamma_grid,
                                     bool stationary_branch = true);

/// Expected termination time 1 / (1 - gamma).
double effective_horizon_t1(double gamma);

/// Smallest K >= 1 with 1 - gamma^K >= 1 - epsilon. gamma^K is compared to
/// epsilon with a relative slack of 1e-12 so that thresholds that are equal in
/// exact arithmetic count as reached (ties go to the smaller K).
int effective_horizon_t2(double gamma, double epsilon);

struct EquivalenceResult {
    double lhs = 0.0;       // discounted sum of E[h(x_t)] via matrix powers
    double rhs = 0.0;       // mu^T h
    double gap = 0.0;
    double tail_bound = 0.0;  // certified bound on the truncated part of lhs
    int terms = 0;
};

/// Checks E_traj[G h(x_t)] = E_{x ~ mu}[h(x)] on a tabular chain.
EquivalenceResult discounted_expectation_equivalence(const env::TabularMdp& mdp, const Vector& h,
                                                     const DiscountSpec& spec);

}  // namespace cmaa2c::occupation
