#pragma once

#include <cstdint>

#include "cmaa2c/mlp.hpp"

namespace cmaa2c::nn {

struct AdamOptions {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer. Moments mirror the layout of the
/// network it was built for.
class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, AdamOptions options);

    /// Descent step theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
    /// Throws NumericalError before touching anything if a gradient is not finite.
    void step(Mlp& net, const Gradients& grads);

    std::int64_t step_count() const { return steps_; }
    const AdamOptions& options() const { return options_; }
    const Gradients& first_moment() const { return first_; }
    const Gradients& second_moment() const { return second_; }

private:
    AdamOptions options_;
    Gradients first_;
    Gradients second_;
    std::int64_t steps_ = 0;
};

/// Plain gradient-descent step; same non-finite check as Adam.
void sgd_step(Mlp& net, const Gradients& grads, double learning_rate);

}  // namespace cmaa2c::nn
