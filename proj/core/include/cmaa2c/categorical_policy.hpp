#pragma once

#include <span>

#include "cmaa2c/mlp.hpp"
#include "cmaa2c/random.hpp"

namespace cmaa2c::nn {

/// Max-subtracted softmax.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

/// Discrete-action policy: an Mlp emitting one logit per action.
class CategoricalPolicy {
public:
    struct Sample {
        int action = 0;
        double log_prob = 0.0;
    };

    CategoricalPolicy() = default;
    explicit CategoricalPolicy(Mlp net);

    int action_count() const { return net_.output_width(); }
    int observation_width() const { return net_.input_width(); }

    Vector probabilities(const Vector& observation) const;
    double log_prob(const Vector& observation, int action) const;
    Sample sample(const Vector& observation, Rng& rng) const;

    /// Gradient of log pi(action | observation) with respect to the parameters.
    Gradients log_prob_grad(const Vector& observation, int action) const;

    /// sum_t weights[t] * grad log pi(actions[t] | observations.col(t)).
    Gradients weighted_log_prob_grad(const Matrix& observations, std::span<const int> actions,
                                     std::span<const double> weights) const;

    /// sum_t weights[t] * grad H(pi(. | observations.col(t))).
    Gradients weighted_entropy_grad(const Matrix& observations, std::span<const double> weights) const;

    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

private:
    Mlp net_;
};

}  // namespace cmaa2c::nn
