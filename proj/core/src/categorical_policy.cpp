#include "cmaa2c/categorical_policy.hpp"

#include <cmath>
#include <string>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::nn {

Vector softmax(const Vector& logits) {
    const double peak = logits.maxCoeff();
    Vector p = (logits.array() - peak).exp().matrix();
    p /= p.sum();
    return p;
}

Vector log_softmax(const Vector& logits) {
    const double peak = logits.maxCoeff();
    const double lse = peak + std::log((logits.array() - peak).exp().sum());
    return (logits.array() - lse).matrix();
}

CategoricalPolicy::CategoricalPolicy(Mlp net) : net_(std::move(net)) {
    require(net_.output_width() >= 1, "CategoricalPolicy: need at least one action");
}

Vector CategoricalPolicy::probabilities(const Vector& observation) const {
    return softmax(net_.forward(observation));
}

double CategoricalPolicy::log_prob(const Vector& observation, int action) const {
    require(action >= 0 && action < action_count(), "CategoricalPolicy::log_prob: action out of range");
    return log_softmax(net_.forward(observation))(action);
}

CategoricalPolicy::Sample CategoricalPolicy::sample(const Vector& observation, Rng& rng) const {
    const Vector logp = log_softmax(net_.forward(observation));
    const double u = uniform01(rng);
    double cumulative = 0.0;
    int chosen = action_count() - 1;
    for (int a = 0; a < action_count(); ++a) {
        cumulative += std::exp(logp(a));
        if (u < cumulative) {
            chosen = a;
            break;
        }
    }
    return {chosen, logp(chosen)};
}

Gradients CategoricalPolicy::log_prob_grad(const Vector& observation, int action) const {
    require(action >= 0 && action < action_count(), "CategoricalPolicy::log_prob_grad: action out of range");
    Vector dlogits = -probabilities(observation);
    dlogits(action) += 1.0;
    return net_.backward(observation, dlogits);
}

Gradients CategoricalPolicy::weighted_log_prob_grad(const Matrix& observations, std::span<const int> actions,
                                                    std::span<const double> weights) const {
    const auto n = observations.cols();
    require(static_cast<Eigen::Index>(actions.size()) == n && static_cast<Eigen::Index>(weights.size()) == n,
            "weighted_log_prob_grad: batch size mismatch");
    const Matrix logits = net_.forward_batch(observations);
    Matrix dlogits(logits.rows(), n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const int a = actions[static_cast<std::size_t>(t)];
        require(a >= 0 && a < action_count(), "weighted_log_prob_grad: action out of range");
        Vector g = -softmax(logits.col(t));
        g(a) += 1.0;
        dlogits.col(t) = weights[static_cast<std::size_t>(t)] * g;
    }
    return net_.backward_batch(observations, dlogits);
}

Gradients CategoricalPolicy::weighted_entropy_grad(const Matrix& observations,
                                                   std::span<const double> weights) const {
    const auto n = observations.cols();
    require(static_cast<Eigen::Index>(weights.size()) == n, "weighted_entropy_grad: batch size mismatch");
    const Matrix logits = net_.forward_batch(observations);
    Matrix dlogits(logits.rows(), n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Vector logp = log_softmax(logits.col(t));
        const Vector p = logp.array().exp().matrix();
        const double entropy = -p.dot(logp);
        // dH/dz_k = -p_k (log p_k + H)
        dlogits.col(t) = weights[static_cast<std::size_t>(t)] *
                         (-(p.array() * (logp.array() + entropy))).matrix();
    }
    return net_.backward_batch(observations, dlogits);
}

}  // namespace cmaa2c::nn
