#include "cmaa2c/adam.hpp"

#include <cmath>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::nn {

Adam::Adam(const Mlp& net, AdamOptions options)
    : options_(options), first_(net.zero_gradients()), second_(net.zero_gradients()) {
    require(options.learning_rate > 0.0, "Adam: learning rate must be positive");
    require(options.beta1 >= 0.0 && options.beta1 < 1.0 && options.beta2 >= 0.0 && options.beta2 < 1.0,
            "Adam: moment decays must lie in [0, 1)");
}

void Adam::step(Mlp& net, const Gradients& grads) {
    require(grads.size() == first_.size() && grads.size() == net.layers().size(), "Adam: gradient layout mismatch");
    if (!all_finite(grads)) throw NumericalError("Adam: non-finite gradient");

    ++steps_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    const double lr = options_.learning_rate;
    const double eps = options_.epsilon;

    for (std::size_t k = 0; k < grads.size(); ++k) {
        auto& layer = net.layers()[k];
        require(grads[k].weight.rows() == layer.weight.rows() && grads[k].weight.cols() == layer.weight.cols() &&
                    grads[k].bias.size() == layer.bias.size(),
                "Adam: gradient shape mismatch");

        first_[k].weight = b1 * first_[k].weight + (1.0 - b1) * grads[k].weight;
        second_[k].weight = b2 * second_[k].weight + (1.0 - b2) * grads[k].weight.cwiseAbs2();
        first_[k].bias = b1 * first_[k].bias + (1.0 - b1) * grads[k].bias;
        second_[k].bias = b2 * second_[k].bias + (1.0 - b2) * grads[k].bias.cwiseAbs2();

        layer.weight.array() -= lr * (first_[k].weight.array() / correction1) /
                                ((second_[k].weight.array() / correction2).sqrt() + eps);
        layer.bias.array() -=
            lr * (first_[k].bias.array() / correction1) / ((second_[k].bias.array() / correction2).sqrt() + eps);
    }
}

void sgd_step(Mlp& net, const Gradients& grads, double learning_rate) {
    require(grads.size() == net.layers().size(), "sgd_step: gradient layout mismatch");
    if (!all_finite(grads)) throw NumericalError("sgd_step: non-finite gradient");
    for (std::size_t k = 0; k < grads.size(); ++k) {
        net.layers()[k].weight -= learning_rate * grads[k].weight;
        net.layers()[k].bias -= learning_rate * grads[k].bias;
    }
}

}  // namespace cmaa2c::nn
