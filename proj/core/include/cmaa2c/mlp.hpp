#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cmaa2c/random.hpp"

namespace cmaa2c::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { relu, linear };

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::linear;
};

struct LayerGradient {
    Matrix weight;
    Vector bias;
};

/// Gradient of a scalar with respect to every parameter of an Mlp, laid out
/// layer by layer exactly like the network.
using Gradients = std::vector<LayerGradient>;

/// Dense feed-forward network: affine layers with a per-layer activation.
///
/// Batched entry points take one sample per column. Gradients returned by the
/// batched backward pass are summed over columns.
class Mlp {
public:
    Mlp() = default;

    /// Takes ownership of explicit layers. Throws ContractError when the
    /// widths do not chain.
    explicit Mlp(std::vector<Layer> layers);

    /// Builds a network with the given widths (input, hidden..., output):
    /// rectifier on hidden layers, linear output, weights and biases uniform
    /// in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    static Mlp make(std::span<const int> widths, Rng& rng);

    int input_width() const;
    int output_width() const;
    std::size_t parameter_count() const;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    Vector forward(const Vector& input) const;
    Matrix forward_batch(const Matrix& inputs) const;

    /// d(output_grad . forward(input)) / d(theta).
    Gradients backward(const Vector& input, const Vector& output_grad) const;

    /// Sum over columns of d(output_grads.col(k) . forward(inputs.col(k))) / d(theta).
    Gradients backward_batch(const Matrix& inputs, const Matrix& output_grads) const;

    Gradients zero_gradients() const;

private:
    std::vector<Layer> layers_;
};

/// acc += scale * g
void accumulate(Gradients& acc, const Gradients& g, double scale = 1.0);
void scale(Gradients& g, double factor);
bool all_finite(const Gradients& g);
double squared_norm(const Gradients& g);

/// Flat views, row-major weights then bias per layer. Used by optimizers'
/// tests and by finite-difference checks.
Vector flatten(const Mlp& net);
void unflatten(Mlp& net, const Vector& flat);
Vector flatten(const Gradients& g);

}  // namespace cmaa2c::nn
