#pragma once

#include <span>
#include <string>

#include "cmaa2c/mlp.hpp"

namespace cmaa2c::critics {

using nn::Matrix;
using nn::Vector;

enum class CriticVariant { generic, input_augmented, structured };

const char* to_string(CriticVariant variant);
CriticVariant parse_variant(const std::string& name);

/// eta = [1, -lambda^T]^T.
Vector eta(const Vector& lambda);

/// Value network on the global state.
///
///  - generic:         x          -> V
///  - input_augmented: [x; lambda] -> V
///  - structured:      x          -> [V_R, V_C1..V_Cm], V = V_R - lambda^T V_C
class Critic {
public:
    Critic() = default;
    Critic(CriticVariant variant, int state_width, int constraint_count, std::span<const int> hidden, Rng& rng);
    Critic(CriticVariant variant, int state_width, int constraint_count, nn::Mlp net);

    CriticVariant variant() const { return variant_; }
    int state_width() const { return state_width_; }
    int constraint_count() const { return constraint_count_; }

    /// m + 1 for the structured variant, 1 otherwise.
    int head_count() const { return variant_ == CriticVariant::structured ? constraint_count_ + 1 : 1; }

    /// Network inputs for a batch of states (one per column).
    Matrix inputs(const Matrix& states, const Vector& lambda) const;

    /// Raw network outputs, head_count() x batch.
    Matrix heads(const Matrix& states, const Vector& lambda) const;
    Vector heads(const Vector& state, const Vector& lambda) const;

    /// Scalar value: head 0 - lambda^T heads 1..m for structured, the single head otherwise.
    double value(const Vector& state, const Vector& lambda) const;
    Vector values(const Matrix& states, const Vector& lambda) const;

    const nn::Mlp& net() const { return net_; }
    nn::Mlp& net() { return net_; }

private:
    CriticVariant variant_ = CriticVariant::generic;
    int state_width_ = 0;
    int constraint_count_ = 0;
    nn::Mlp net_;
};

/// V_R(x) - lambda^T V_C(x). Throws ContractError for non-structured critics.
double structured_value(const Critic& critic, const Vector& state, const Vector& lambda);

/// n-step targets, one column per time step t = 0..T:
///   N = min(T, t + kappa)
///   D_t = sum_{n=t}^{N-1} gamma^{n-t} d_n + gamma^{N-t} B_N
/// `signals` holds d_t and `bootstrap` holds B_t (same shape, heads x (T+1)).
struct ValueTargets {
    Matrix returns;
};

ValueTargets nstep_returns(const Matrix& signals, const Matrix& bootstrap, double gamma, int kappa);

/// Builds the per-step signals a critic regresses on: [r_t; c_t] for the
/// structured variant, r_t - lambda^T c_t otherwise.
Matrix critic_signals(CriticVariant variant, std::span<const double> rewards, const Matrix& penalties,
                      const Vector& lambda);

/// A_t = eta^T (D_t - V_t) for multi-head targets, D_t - V_t for scalar ones.
Vector advantages(const ValueTargets& targets, const Matrix& values, const Vector& lambda);

struct LossAndGradient {
    double loss = 0.0;
    nn::Gradients gradients;
};

/// sum_t ||D_t - heads(x_t)||^2 with the targets held constant.
/// Throws NumericalError if the loss is not finite.
LossAndGradient critic_loss_and_grad(const Critic& critic, const Matrix& states, const Vector& lambda,
                                     const ValueTargets& targets);

/// Tr[Sigma_lambda^2 (Sigma_C^2 + c_bar c_bar^T)], the MSTDE a structured
/// critic can save over a lambda-blind one. Throws ContractError on asymmetric input.
double mstde_gap_prediction(const Vector& c_mean, const Eigen::MatrixXd& c_cov, const Eigen::MatrixXd& lambda_cov);

}  // namespace cmaa2c::critics
