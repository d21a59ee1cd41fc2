#include "cmaa2c/figures.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/risk.hpp"

namespace cmaa2c::experiments {

std::vector<HorizonRow> horizon_table(std::span<const double> gammas) {
    std::vector<HorizonRow> rows;
    for (double g : gammas) {
        HorizonRow row;
        row.gamma = g;
        row.t1 = occupation::effective_horizon_t1(g);
        row.t2_half = occupation::effective_horizon_t2(g, 0.5);
        row.t2_inv_e = occupation::effective_horizon_t2(g, std::exp(-1.0));
        row.t2_tenth = occupation::effective_horizon_t2(g, 0.1);
        rows.push_back(row);
    }
    return rows;
}

void write_horizon_csv(std::ostream& out, std::span<const HorizonRow> rows) {
    out << "gamma,t1,t2_eps_0.5,t2_eps_inv_e,t2_eps_0.1\n";
    for (const auto& r : rows)
        out << io::format_number(r.gamma) << ',' << io::format_number(r.t1) << ',' << r.t2_half << ','
            << r.t2_inv_e << ',' << r.t2_tenth << '\n';
}

void write_limits_csv(std::ostream& out, const occupation::LimitsReport& report) {
    out << "gamma,distance_to_initial,distance_to_stationary\n";
    for (const auto& r : report.rows)
        out << io::format_number(r.gamma) << ',' << io::format_number(r.distance_to_initial) << ','
            << io::format_number(r.distance_to_stationary) << '\n';
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against erfc.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

VarCvarIllustration var_cvar_illustration(double beta, int samples, Rng& rng) {
    require(samples > 0, "var_cvar_illustration: need samples");
    VarCvarIllustration out;
    out.beta = beta;
    out.samples = samples;
    out.var_exact = normal_quantile(beta);
    out.cvar_exact = normal_pdf(out.var_exact) / (1.0 - beta);
    std::vector<risk::WeightedSample> draws(static_cast<std::size_t>(samples));
    const double w = 1.0 / samples;
    for (auto& s : draws) s = {standard_normal(rng), w};
    out.var_empirical = risk::empirical_var(draws, beta);
    out.cvar_empirical = risk::empirical_cvar(draws, beta);
    return out;
}

}  // namespace cmaa2c::experiments
