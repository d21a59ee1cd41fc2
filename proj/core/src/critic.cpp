#include "cmaa2c/critic.hpp"

#include <algorithm>
#include <cmath>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::critics {

const char* to_string(CriticVariant variant) {
    switch (variant) {
        case CriticVariant::generic: return "generic";
        case CriticVariant::input_augmented: return "input_augmented";
        case CriticVariant::structured: return "structured";
    }
    return "generic";
}

CriticVariant parse_variant(const std::string& name) {
    if (name == "generic") return CriticVariant::generic;
    if (name == "input_augmented") return CriticVariant::input_augmented;
    if (name == "structured") return CriticVariant::structured;
    throw ConfigError("unknown critic variant '" + name + "' (expected generic, input_augmented or structured)");
}

Vector eta(const Vector& lambda) {
    Vector e(lambda.size() + 1);
    e(0) = 1.0;
    e.tail(lambda.size()) = -lambda;
    return e;
}

namespace {

nn::Mlp build_net(CriticVariant variant, int state_width, int constraint_count, std::span<const int> hidden,
                  Rng& rng) {
    std::vector<int> widths;
    widths.push_back(variant == CriticVariant::input_augmented ? state_width + constraint_count : state_width);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(variant == CriticVariant::structured ? constraint_count + 1 : 1);
    return nn::Mlp::make(widths, rng);
}

}  // namespace

Critic::Critic(CriticVariant variant, int state_width, int constraint_count, std::span<const int> hidden, Rng& rng)
    : Critic(variant, state_width, constraint_count, build_net(variant, state_width, constraint_count, hidden, rng)) {}

Critic::Critic(CriticVariant variant, int state_width, int constraint_count, nn::Mlp net)
    : variant_(variant), state_width_(state_width), constraint_count_(constraint_count), net_(std::move(net)) {
    require(state_width > 0 && constraint_count > 0, "Critic: widths must be positive");
    const int expected_in = variant == CriticVariant::input_augmented ? state_width + constraint_count : state_width;
    require(net_.input_width() == expected_in, "Critic: network input width does not match variant");
    require(net_.output_width() == head_count(), "Critic: network output width does not match variant");
}

Matrix Critic::inputs(const Matrix& states, const Vector& lambda) const {
    require(states.rows() == state_width_, "Critic: state width mismatch");
    require(lambda.size() == constraint_count_, "Critic: lambda width mismatch");
    if (variant_ != CriticVariant::input_augmented) return states;
    Matrix in(state_width_ + constraint_count_, states.cols());
    in.topRows(state_width_) = states;
    in.bottomRows(constraint_count_) = lambda.replicate(1, states.cols());
    return in;
}

Matrix Critic::heads(const Matrix& states, const Vector& lambda) const {
    return net_.forward_batch(inputs(states, lambda));
}

Vector Critic::heads(const Vector& state, const Vector& lambda) const {
    return net_.forward_batch(inputs(state, lambda)).col(0);
}

double Critic::value(const Vector& state, const Vector& lambda) const {
    return values(state, lambda)(0);
}

Vector Critic::values(const Matrix& states, const Vector& lambda) const {
    const Matrix h = heads(states, lambda);
    if (variant_ != CriticVariant::structured) return h.row(0).transpose();
    return (eta(lambda).transpose() * h).transpose();
}

double structured_value(const Critic& critic, const Vector& state, const Vector& lambda) {
    if (critic.variant() != CriticVariant::structured)
        throw ContractError("structured_value: critic is not the structured variant");
    const Vector h = critic.heads(state, lambda);
    return h(0) - lambda.dot(h.tail(lambda.size()));
}

ValueTargets nstep_returns(const Matrix& signals, const Matrix& bootstrap, double gamma, int kappa) {
    if (kappa < 1) throw ConfigError("nstep_returns: kappa must be >= 1");
    require(signals.rows() == bootstrap.rows() && signals.cols() == bootstrap.cols(),
            "nstep_returns: signal and bootstrap shapes differ");
    const auto steps = signals.cols();
    ValueTargets out;
    out.returns = Matrix::Zero(signals.rows(), steps);
    if (steps == 0) return out;
    const Eigen::Index last = steps - 1;  // T
    for (Eigen::Index t = 0; t <= last; ++t) {
        const Eigen::Index horizon_end = std::min<Eigen::Index>(last, t + kappa);
        Vector acc = Vector::Zero(signals.rows());
        double discount = 1.0;
        for (Eigen::Index n = t; n < horizon_end; ++n) {
            acc += discount * signals.col(n);
            discount *= gamma;
        }
        out.returns.col(t) = acc + discount * bootstrap.col(horizon_end);
    }
    return out;
}

Matrix critic_signals(CriticVariant variant, std::span<const double> rewards, const Matrix& penalties,
                      const Vector& lambda) {
    const auto steps = static_cast<Eigen::Index>(rewards.size());
    require(penalties.cols() == steps && penalties.rows() == lambda.size(), "critic_signals: shape mismatch");
    if (variant == CriticVariant::structured) {
        Matrix d(lambda.size() + 1, steps);
        for (Eigen::Index t = 0; t < steps; ++t) d(0, t) = rewards[static_cast<std::size_t>(t)];
        d.bottomRows(lambda.size()) = penalties;
        return d;
    }
    Matrix d(1, steps);
    for (Eigen::Index t = 0; t < steps; ++t)
        d(0, t) = rewards[static_cast<std::size_t>(t)] - lambda.dot(penalties.col(t));
    return d;
}

Vector advantages(const ValueTargets& targets, const Matrix& values, const Vector& lambda) {
    require(targets.returns.rows() == values.rows() && targets.returns.cols() == values.cols(),
            "advantages: target and value shapes differ");
    const Matrix diff = targets.returns - values;
    if (diff.rows() == 1) return diff.row(0).transpose();
    require(diff.rows() == lambda.size() + 1, "advantages: lambda width mismatch");
    return (eta(lambda).transpose() * diff).transpose();
}

LossAndGradient critic_loss_and_grad(const Critic& critic, const Matrix& states, const Vector& lambda,
                                     const ValueTargets& targets) {
    const Matrix in = critic.inputs(states, lambda);
    const Matrix predicted = critic.net().forward_batch(in);
    require(predicted.rows() == targets.returns.rows() && predicted.cols() == targets.returns.cols(),
            "critic_loss_and_grad: target shape mismatch");
    const Matrix residual = predicted - targets.returns;
    LossAndGradient out;
    out.loss = residual.squaredNorm();
    if (!std::isfinite(out.loss)) throw NumericalError("critic loss is not finite");
    out.gradients = critic.net().backward_batch(in, 2.0 * residual);
    return out;
}

double mstde_gap_prediction(const Vector& c_mean, const Eigen::MatrixXd& c_cov, const Eigen::MatrixXd& lambda_cov) {
    const auto m = c_mean.size();
    require(c_cov.rows() == m && c_cov.cols() == m && lambda_cov.rows() == m && lambda_cov.cols() == m,
            "mstde_gap_prediction: shape mismatch");
    const auto asymmetric = [](const Eigen::MatrixXd& a) {
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        return (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale;
    };
    require(!asymmetric(c_cov) && !asymmetric(lambda_cov), "mstde_gap_prediction: covariance inputs must be symmetric");
    return (lambda_cov * (c_cov + c_mean * c_mean.transpose())).trace();
}

}  // namespace cmaa2c::critics
