#include "cmaa2c/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <Eigen/LU>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::occupation {

namespace {

constexpr double kGammaCeiling = 1.0 - 1e-9;
constexpr int kMaxStates = 1000;

// Breadth-first levels from `root` over edges with positive probability,
// following rows (forward) or columns (reverse).
std::vector<int> bfs_levels(const Matrix& p, int root, bool reverse) {
    const int s = static_cast<int>(p.rows());
    std::vector<int> level(static_cast<std::size_t>(s), -1);
    std::queue<int> frontier;
    level[static_cast<std::size_t>(root)] = 0;
    frontier.push(root);
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v = 0; v < s; ++v) {
            const double w = reverse ? p(v, u) : p(u, v);
            if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
                level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
                frontier.push(v);
            }
        }
    }
    return level;
}

}  // namespace

void DiscountSpec::validate() const {
    require(gamma > 0.0 && gamma <= kGammaCeiling, "DiscountSpec: gamma must lie in (0, 1 - 1e-9]");
    require(!horizon || *horizon >= 0, "DiscountSpec: horizon must be >= 0");
}

double discounted_sum(std::span<const double> values, double gamma) {
    double total = 0.0;
    double weight = 1.0 - gamma;
    for (double v : values) {
        total += weight * v;
        weight *= gamma;
    }
    return total;
}

Vector discounted_sum(std::span<const Vector> values, double gamma) {
    if (values.empty()) return Vector();
    Vector total = Vector::Zero(values.front().size());
    double weight = 1.0 - gamma;
    for (const auto& v : values) {
        require(v.size() == total.size(), "discounted_sum: ragged input");
        total += weight * v;
        weight *= gamma;
    }
    return total;
}

OccupationResult occupation_exact(const env::TabularMdp& mdp, const DiscountSpec& spec) {
    mdp.validate();
    spec.validate();
    require(mdp.state_count() <= kMaxStates, "occupation_exact: chain larger than 1000 states");
    const double g = spec.gamma;
    OccupationResult result;
    if (!spec.horizon) {
        const auto s = mdp.state_count();
        const Matrix resolvent = Matrix::Identity(s, s) - g * mdp.transition.transpose();
        result.measure = (1.0 - g) * resolvent.partialPivLu().solve(mdp.initial);
        result.mode = OccupationMode::infinite_horizon;
        return result;
    }
    const int horizon = *spec.horizon;
    Vector p = mdp.initial;
    Vector acc = Vector::Zero(p.size());
    double weight = 1.0;
    for (int t = 0; t <= horizon; ++t) {
        acc += weight * p;
        weight *= g;
        if (t < horizon) p = mdp.transition.transpose() * p;
    }
    // (1 - g) / (1 - g^{T+1}) normalizes the truncated geometric weights.
    result.measure = (1.0 - g) / (1.0 - std::pow(g, horizon + 1)) * acc;
    result.mode = OccupationMode::finite_horizon;
    return result;
}

bool is_ergodic(const Matrix& transition) {
    const int s = static_cast<int>(transition.rows());
    if (s == 0) return false;
    const auto forward = bfs_levels(transition, 0, false);
    const auto backward = bfs_levels(transition, 0, true);
    for (int v = 0; v < s; ++v)
        if (forward[static_cast<std::size_t>(v)] < 0 || backward[static_cast<std::size_t>(v)] < 0) return false;
    // Period = gcd over edges u -> v of level(u) + 1 - level(v).
    long period = 0;
    for (int u = 0; u < s; ++u)
        for (int v = 0; v < s; ++v)
            if (transition(u, v) > 0.0) {
                const long diff = std::labs(static_cast<long>(forward[static_cast<std::size_t>(u)]) + 1 -
                                            forward[static_cast<std::size_t>(v)]);
                period = std::gcd(period, diff);
            }
    return period == 1;
}

Vector stationary_distribution(const env::TabularMdp& mdp) {
    mdp.validate();
    require(is_ergodic(mdp.transition), "stationary_distribution: chain is not ergodic");
    const auto s = mdp.state_count();
    // Solve (P^T - I) p = 0 with the last equation replaced by 1^T p = 1.
    Matrix system = mdp.transition.transpose() - Matrix::Identity(s, s);
    system.row(s - 1).setOnes();
    Vector rhs = Vector::Zero(s);
    rhs(s - 1) = 1.0;
    return system.partialPivLu().solve(rhs);
}

LimitsReport occupation_limits_check(const env::TabularMdp& mdp, std::span<const double> gamma_grid,
                                     bool stationary_branch) {
    mdp.validate();
    LimitsReport report;
    if (stationary_branch) {
        if (!is_ergodic(mdp.transition))
            throw ContractError("occupation_limits_check: gamma -> 1 limit requested on a non-ergodic chain");
        report.stationary = stationary_distribution(mdp);
    }
    for (double g : gamma_grid) {
        const auto mu = occupation_exact(mdp, DiscountSpec{g, std::nullopt}).measure;
        LimitsRow row;
        row.gamma = g;
        row.distance_to_initial = (mu - mdp.initial).cwiseAbs().maxCoeff();
        row.distance_to_stationary = report.stationary ? (mu - *report.stationary).cwiseAbs().maxCoeff()
                                                       : std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(row);
    }
    return report;
}

double effective_horizon_t1(double gamma) {
    require(gamma > 0.0 && gamma < 1.0, "effective_horizon_t1: gamma must lie in (0, 1)");
    return 1.0 / (1.0 - gamma);
}

int effective_horizon_t2(double gamma, double epsilon) {
    require(gamma > 0.0 && gamma < 1.0, "effective_horizon_t2: gamma must lie in (0, 1)");
    require(epsilon > 0.0 && epsilon < 1.0, "effective_horizon_t2: epsilon must lie in (0, 1)");
    constexpr double kSlack = 1e-12;
    const auto reached = [&](long k) { return std::pow(gamma, static_cast<double>(k)) <= epsilon * (1.0 + kSlack); };
    long k = std::max(1L, static_cast<long>(std::ceil(std::log(epsilon) / std::log(gamma))));
    while (k > 1 && reached(k - 1)) --k;
    while (!reached(k)) ++k;
    return static_cast<int>(k);
}

EquivalenceResult discounted_expectation_equivalence(const env::TabularMdp& mdp, const Vector& h,
                                                     const DiscountSpec& spec) {
    mdp.validate();
    spec.validate();
    require(h.size() == mdp.state_count(), "discounted_expectation_equivalence: h has wrong length");
    const double g = spec.gamma;
    const double h_max = h.cwiseAbs().maxCoeff();

    EquivalenceResult out;
    Vector p = mdp.initial;
    double weight = 1.0 - g;
    if (spec.horizon) {
        const int horizon = *spec.horizon;
        const double norm = 1.0 - std::pow(g, horizon + 1);
        for (int t = 0; t <= horizon; ++t) {
            out.lhs += weight * p.dot(h);
            weight *= g;
            p = mdp.transition.transpose() * p;
        }
        out.lhs /= norm;
        out.terms = horizon + 1;
        out.tail_bound = 0.0;
    } else {
        // Stop once the remaining geometric mass times max|h| is negligible.
        constexpr long kMaxTerms = 2'000'000;
        long t = 0;
        double tail = 1.0;  // gamma^t = mass not yet accumulated
        while (tail * h_max > 1e-15 && t < kMaxTerms) {
            out.lhs += weight * p.dot(h);
            weight *= g;
            tail *= g;
            p = mdp.transition.transpose() * p;
            ++t;
        }
        out.terms = static_cast<int>(t);
        out.tail_bound = tail * h_max;
    }
    out.rhs = occupation_exact(mdp, spec).measure.dot(h);
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

}  // namespace cmaa2c::occupation
