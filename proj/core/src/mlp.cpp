#include "cmaa2c/mlp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cmaa2c/errors.hpp"

namespace cmaa2c {

double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cmaa2c

namespace cmaa2c::nn {

namespace {

Matrix apply_activation(Matrix z, Activation activation) {
    if (activation == Activation::relu) z = z.cwiseMax(0.0);
    return z;
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), "Mlp: at least one layer required");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& layer = layers_[k];
        require(layer.weight.rows() == layer.bias.size(),
                "Mlp: layer " + std::to_string(k) + " bias width does not match weight rows");
        if (k > 0) {
            require(layers_[k - 1].weight.rows() == layer.weight.cols(),
                    "Mlp: layer " + std::to_string(k) + " input width does not chain");
        }
    }
}

Mlp Mlp::make(std::span<const int> widths, Rng& rng) {
    require(widths.size() >= 2, "Mlp::make: need input and output widths");
    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const int in = widths[k];
        const int out = widths[k + 1];
        require(in > 0 && out > 0, "Mlp::make: widths must be positive");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Layer layer;
        layer.weight.resize(out, in);
        layer.bias.resize(out);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.weight(r, c) = uniform(rng, -bound, bound);
        for (int r = 0; r < out; ++r) layer.bias(r) = uniform(rng, -bound, bound);
        layer.activation = (k + 2 == widths.size()) ? Activation::linear : Activation::relu;
        layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
}

int Mlp::input_width() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::output_width() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
}

Vector Mlp::forward(const Vector& input) const {
    return forward_batch(input);
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
    require(inputs.rows() == input_width(), "Mlp::forward: input width " + std::to_string(inputs.rows()) +
                                                " does not match network input " + std::to_string(input_width()));
    Matrix a = inputs;
    for (const auto& layer : layers_) {
        Matrix z = layer.weight * a;
        z.colwise() += layer.bias;
        a = apply_activation(std::move(z), layer.activation);
    }
    return a;
}

Gradients Mlp::backward(const Vector& input, const Vector& output_grad) const {
    return backward_batch(input, output_grad);
}

Gradients Mlp::backward_batch(const Matrix& inputs, const Matrix& output_grads) const {
    require(inputs.rows() == input_width(), "Mlp::backward: input width mismatch");
    require(output_grads.rows() == output_width() && output_grads.cols() == inputs.cols(),
            "Mlp::backward: output gradient shape mismatch");

    // Forward pass keeping post-activation values of every layer.
    std::vector<Matrix> activations;
    activations.reserve(layers_.size() + 1);
    activations.push_back(inputs);
    for (const auto& layer : layers_) {
        Matrix z = layer.weight * activations.back();
        z.colwise() += layer.bias;
        activations.push_back(apply_activation(std::move(z), layer.activation));
    }

    Gradients grads(layers_.size());
    Matrix delta = output_grads;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        const auto& layer = layers_[k];
        if (layer.activation == Activation::relu) {
            // Derivative taken as 0 at exactly zero pre-activation.
            delta = delta.cwiseProduct((activations[k + 1].array() > 0.0).cast<double>().matrix());
        }
        grads[k].weight = delta * activations[k].transpose();
        grads[k].bias = delta.rowwise().sum();
        if (k > 0) delta = layer.weight.transpose() * delta;
    }
    return grads;
}

Gradients Mlp::zero_gradients() const {
    Gradients grads(layers_.size());
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        grads[k].weight = Matrix::Zero(layers_[k].weight.rows(), layers_[k].weight.cols());
        grads[k].bias = Vector::Zero(layers_[k].bias.size());
    }
    return grads;
}

void accumulate(Gradients& acc, const Gradients& g, double scale) {
    require(acc.size() == g.size(), "accumulate: layer count mismatch");
    for (std::size_t k = 0; k < acc.size(); ++k) {
        acc[k].weight += scale * g[k].weight;
        acc[k].bias += scale * g[k].bias;
    }
}

void scale(Gradients& g, double factor) {
    for (auto& layer : g) {
        layer.weight *= factor;
        layer.bias *= factor;
    }
}

bool all_finite(const Gradients& g) {
    for (const auto& layer : g)
        if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    return true;
}

double squared_norm(const Gradients& g) {
    double s = 0.0;
    for (const auto& layer : g) s += layer.weight.squaredNorm() + layer.bias.squaredNorm();
    return s;
}

Vector flatten(const Mlp& net) {
    Vector flat(static_cast<Eigen::Index>(net.parameter_count()));
    Eigen::Index i = 0;
    for (const auto& layer : net.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat(i++) = layer.weight(r, c);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat(i++) = layer.bias(r);
    }
    return flat;
}

void unflatten(Mlp& net, const Vector& flat) {
    require(flat.size() == static_cast<Eigen::Index>(net.parameter_count()), "unflatten: size mismatch");
    Eigen::Index i = 0;
    for (auto& layer : net.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat(i++);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = flat(i++);
    }
}

Vector flatten(const Gradients& g) {
    Eigen::Index n = 0;
    for (const auto& layer : g) n += layer.weight.size() + layer.bias.size();
    Vector flat(n);
    Eigen::Index i = 0;
    for (const auto& layer : g) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) flat(i++) = layer.weight(r, c);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) flat(i++) = layer.bias(r);
    }
    return flat;
}

}  // namespace cmaa2c::nn
