#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "cmaa2c/mlp.hpp"

namespace oracle {

using cmaa2c::nn::Mlp;
using cmaa2c::nn::Vector;

/// Central finite difference of f over every parameter of `net` (h = 1e-5).
inline Vector numeric_gradient(Mlp net, const std::function<double(const Mlp&)>& f, double h = 1e-5) {
    Vector theta = cmaa2c::nn::flatten(net);
    Vector g(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double keep = theta(k);
        theta(k) = keep + h;
        cmaa2c::nn::unflatten(net, theta);
        const double up = f(net);
        theta(k) = keep - h;
        cmaa2c::nn::unflatten(net, theta);
        const double down = f(net);
        theta(k) = keep;
        g(k) = (up - down) / (2.0 * h);
    }
    return g;
}

/// Relative error with an absolute floor so that exact zeros compare cleanly.
inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-6) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) worst = std::max(worst, relative_error(a(k), b(k), floor));
    return worst;
}

/// Scalar-by-scalar forward pass with explicit loops.
inline Vector naive_forward(const Mlp& net, const Vector& input) {
    Vector x = input;
    for (const auto& layer : net.layers()) {
        Vector y(layer.weight.rows());
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
            double s = layer.bias(i);
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) s += layer.weight(i, j) * x(j);
            y(i) = layer.activation == cmaa2c::nn::Activation::relu ? (s > 0.0 ? s : 0.0) : s;
        }
        x = y;
    }
    return x;
}

/// Smallest |pre-activation| of any rectifier unit over the input columns.
/// Central differences are only meaningful when this is well above the step.
inline double kink_margin(const Mlp& net, const cmaa2c::nn::Matrix& inputs) {
    double margin = std::numeric_limits<double>::infinity();
    cmaa2c::nn::Matrix x = inputs;
    for (const auto& layer : net.layers()) {
        cmaa2c::nn::Matrix z = (layer.weight * x).colwise() + layer.bias;
        if (layer.activation == cmaa2c::nn::Activation::relu) {
            margin = std::min(margin, z.cwiseAbs().minCoeff());
            z = z.cwiseMax(0.0);
        }
        x = z;
    }
    return margin;
}

/// (1 - gamma) sum_t gamma^t v_t by a plain loop with explicit powers.
inline double naive_discounted_sum(const std::vector<double>& v, double gamma) {
    double s = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) s += std::pow(gamma, static_cast<double>(t)) * v[t];
    return (1.0 - gamma) * s;
}

/// Inverse standard normal CDF by bisection on erfc (independent of the library quantile).
inline double bisect_normal_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
        (cdf < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Upper-tail mean of the standard normal above q by composite Simpson quadrature.
inline double normal_tail_mean(double q, double tail_mass) {
    const int n = 20000;
    const double upper = q + 12.0;
    const double h = (upper - q) / n;
    const auto f = [](double x) { return x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    double s = f(q) + f(upper);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(q + k * h);
    return s * h / 3.0 / tail_mass;
}

}  // namespace oracle
