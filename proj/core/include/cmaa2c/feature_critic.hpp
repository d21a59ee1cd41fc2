#pragma once

#include "cmaa2c/critic.hpp"

namespace cmaa2c::critics {

/// [1, z_i, z_i z_j (i <= j)].
Vector quadratic_features(const Vector& z);
/// [1, z_i].
Vector linear_features(const Vector& z);

/// Linear-in-parameters critics used for the policy-evaluation comparison:
///
///  - generic:         quadratic features of x
///  - input_augmented: quadratic features of [x; lambda]
///  - structured:      quadratic V_R(x) and linear V_C(x), V = V_R - lambda^T V_C
///
/// Trained by semi-gradient TD(0); the structured variant runs one TD
/// regression per signal.
class FeatureCritic {
public:
    FeatureCritic(CriticVariant variant, int state_width, int constraint_count);

    CriticVariant variant() const { return variant_; }

    double value(const Vector& state, const Vector& lambda) const;

    /// Scalar TD error of the combined value for reward r - lambda^T c.
    double td_error(const Vector& state, double reward, const Vector& constraint, const Vector& next_state,
                    const Vector& lambda, double gamma) const;

    /// One semi-gradient step with step size `rate`.
    void update(const Vector& state, double reward, const Vector& constraint, const Vector& next_state,
                const Vector& lambda, double gamma, double rate);

    /// Parameter snapshot and restore (used for iterate averaging).
    Vector parameters() const;
    void set_parameters(const Vector& params);

private:
    CriticVariant variant_;
    int state_width_;
    int constraint_count_;
    Vector reward_weights_;     // generic / augmented: the only weights
    Eigen::MatrixXd cost_weights_;  // structured only: m x (n + 1)
};

}  // namespace cmaa2c::critics
