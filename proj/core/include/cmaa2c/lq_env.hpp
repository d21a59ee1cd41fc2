#pragma once

#include <vector>

#include "cmaa2c/random.hpp"
#include "cmaa2c/transition.hpp"

namespace cmaa2c::env {

struct LqConfig {
    Matrix a;
    Matrix b;
    Matrix gain;              // u = gain * x
    double noise_std = 0.01;
    double init_std = 1.0;    // x0 ~ N(0, init_std^2 I)
    Matrix q;                 // reward -x^T Q x
    Matrix c_lin;             // constraint C(x) = c_lin x, m x n
    Vector lambda_mean;
    Matrix lambda_cov;        // Sigma_lambda^2

    /// The policy-evaluation testbed defaults (2-d state, one constraint).
    static LqConfig defaults();
};

/// Linear dynamics under a fixed linear policy, quadratic reward, linear
/// constraints, and a dual variable redrawn once per episode.
class LqPolicyEvalEnv {
public:
    struct Step {
        Vector state;
        double reward = 0.0;
        Vector constraint;
        Vector next_state;
    };
    struct Episode {
        Vector lambda;
        std::vector<Step> steps;
    };

    /// Throws ContractError unless the closed loop a + b gain is Schur stable.
    explicit LqPolicyEvalEnv(LqConfig config);

    const LqConfig& config() const { return config_; }
    const Matrix& closed_loop() const { return closed_loop_; }
    double spectral_radius() const { return spectral_radius_; }
    int state_width() const { return static_cast<int>(closed_loop_.rows()); }
    int constraint_count() const { return static_cast<int>(config_.c_lin.rows()); }

    /// Nonnegative after clamping.
    Vector sample_lambda(Rng& rng) const;
    Episode rollout(int horizon, Rng& rng) const;

    /// Solution X of X = M X M^T + noise_std^2 I (stationary state covariance).
    Matrix stationary_covariance() const;

private:
    LqConfig config_;
    Matrix closed_loop_;
    Matrix lambda_factor_;
    double spectral_radius_ = 0.0;
};

}  // namespace cmaa2c::env
