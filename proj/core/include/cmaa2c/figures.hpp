#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "cmaa2c/occupation.hpp"
#include "cmaa2c/random.hpp"

namespace cmaa2c::experiments {

struct HorizonRow {
    double gamma = 0.0;
    double t1 = 0.0;
    int t2_half = 0;      // epsilon = 0.5
    int t2_inv_e = 0;     // epsilon = 1/e
    int t2_tenth = 0;     // epsilon = 0.1
};

/// Effective horizons over a gamma grid.
std::vector<HorizonRow> horizon_table(std::span<const double> gammas);
void write_horizon_csv(std::ostream& out, std::span<const HorizonRow> rows);

/// Occupation-measure limit sweep as CSV: gamma, distance to p0, distance to p_inf.
void write_limits_csv(std::ostream& out, const occupation::LimitsReport& report);

struct VarCvarIllustration {
    double beta = 0.9;
    double var_exact = 0.0;
    double cvar_exact = 0.0;
    double var_empirical = 0.0;
    double cvar_empirical = 0.0;
    int samples = 0;
};

/// Standard normal VaR/CVaR at level beta: closed form against Monte Carlo.
VarCvarIllustration var_cvar_illustration(double beta, int samples, Rng& rng);

/// Inverse standard normal CDF (Acklam's rational approximation refined by
/// one Halley step).
double normal_quantile(double p);
double normal_pdf(double x);

}  // namespace cmaa2c::experiments
