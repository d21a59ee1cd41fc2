#include "cmaa2c/feature_critic.hpp"

#include "cmaa2c/errors.hpp"

namespace cmaa2c::critics {

Vector quadratic_features(const Vector& z) {
    const auto n = z.size();
    Vector phi(1 + n + n * (n + 1) / 2);
    phi(0) = 1.0;
    phi.segment(1, n) = z;
    Eigen::Index k = 1 + n;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) phi(k++) = z(i) * z(j);
    return phi;
}

Vector linear_features(const Vector& z) {
    Vector phi(1 + z.size());
    phi(0) = 1.0;
    phi.tail(z.size()) = z;
    return phi;
}

namespace {

Vector augmented(const Vector& state, const Vector& lambda) {
    Vector z(state.size() + lambda.size());
    z << state, lambda;
    return z;
}

Eigen::Index quadratic_size(Eigen::Index n) { return 1 + n + n * (n + 1) / 2; }

}  // namespace

FeatureCritic::FeatureCritic(CriticVariant variant, int state_width, int constraint_count)
    : variant_(variant), state_width_(state_width), constraint_count_(constraint_count) {
    require(state_width > 0 && constraint_count > 0, "FeatureCritic: widths must be positive");
    const Eigen::Index in = variant == CriticVariant::input_augmented ? state_width + constraint_count : state_width;
    reward_weights_ = Vector::Zero(quadratic_size(in));
    if (variant == CriticVariant::structured) cost_weights_ = Eigen::MatrixXd::Zero(constraint_count, state_width + 1);
}

double FeatureCritic::value(const Vector& state, const Vector& lambda) const {
    require(state.size() == state_width_ && lambda.size() == constraint_count_, "FeatureCritic: width mismatch");
    switch (variant_) {
        case CriticVariant::generic:
            return reward_weights_.dot(quadratic_features(state));
        case CriticVariant::input_augmented:
            return reward_weights_.dot(quadratic_features(augmented(state, lambda)));
        case CriticVariant::structured:
            return reward_weights_.dot(quadratic_features(state)) -
                   lambda.dot(cost_weights_ * linear_features(state));
    }
    return 0.0;
}

double FeatureCritic::td_error(const Vector& state, double reward, const Vector& constraint, const Vector& next_state,
                               const Vector& lambda, double gamma) const {
    return reward - lambda.dot(constraint) + gamma * value(next_state, lambda) - value(state, lambda);
}

void FeatureCritic::update(const Vector& state, double reward, const Vector& constraint, const Vector& next_state,
                           const Vector& lambda, double gamma, double rate) {
    switch (variant_) {
        case CriticVariant::generic:
        case CriticVariant::input_augmented: {
            const double delta = td_error(state, reward, constraint, next_state, lambda, gamma);
            const Vector phi = variant_ == CriticVariant::generic ? quadratic_features(state)
                                                                  : quadratic_features(augmented(state, lambda));
            reward_weights_ += rate * delta * phi;
            return;
        }
        case CriticVariant::structured: {
            // Separate TD regressions for the reward head and each constraint head.
            const Vector phi_r = quadratic_features(state);
            const Vector phi_c = linear_features(state);
            const double delta_r =
                reward + gamma * reward_weights_.dot(quadratic_features(next_state)) - reward_weights_.dot(phi_r);
            const Vector delta_c = constraint + gamma * cost_weights_ * linear_features(next_state) -
                                   cost_weights_ * phi_c;
            reward_weights_ += rate * delta_r * phi_r;
            cost_weights_ += rate * delta_c * phi_c.transpose();
            return;
        }
    }
}

Vector FeatureCritic::parameters() const {
    Vector p(reward_weights_.size() + cost_weights_.size());
    p.head(reward_weights_.size()) = reward_weights_;
    if (cost_weights_.size() > 0)
        p.tail(cost_weights_.size()) = Eigen::Map<const Vector>(cost_weights_.data(), cost_weights_.size());
    return p;
}

void FeatureCritic::set_parameters(const Vector& params) {
    require(params.size() == reward_weights_.size() + cost_weights_.size(), "FeatureCritic: parameter size mismatch");
    reward_weights_ = params.head(reward_weights_.size());
    if (cost_weights_.size() > 0)
        cost_weights_ = Eigen::Map<const Eigen::MatrixXd>(params.tail(cost_weights_.size()).data(),
                                                          cost_weights_.rows(), cost_weights_.cols());
}

}  // namespace cmaa2c::critics
