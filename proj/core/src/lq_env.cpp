#include "cmaa2c/lq_env.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "cmaa2c/errors.hpp"

namespace cmaa2c::env {

LqConfig LqConfig::defaults() {
    LqConfig c;
    c.a.resize(2, 2);
    c.a << 0.9, 0.1, 0.0, 0.9;
    c.b = Matrix::Identity(2, 2);
    c.gain = -0.2 * Matrix::Identity(2, 2);
    c.noise_std = 0.01;
    c.init_std = 1.0;
    c.q = Matrix::Identity(2, 2);
    c.c_lin = Matrix::Ones(1, 2);
    c.lambda_mean = Vector::Constant(1, 1.0);
    c.lambda_cov = Matrix::Constant(1, 1, 0.04);
    return c;
}

LqPolicyEvalEnv::LqPolicyEvalEnv(LqConfig config) : config_(std::move(config)) {
    const auto n = config_.a.rows();
    require(config_.a.cols() == n, "LqPolicyEvalEnv: A must be square");
    require(config_.b.rows() == n && config_.gain.rows() == config_.b.cols() && config_.gain.cols() == n,
            "LqPolicyEvalEnv: B/K shapes inconsistent");
    require(config_.q.rows() == n && config_.q.cols() == n, "LqPolicyEvalEnv: Q must be n x n");
    require(config_.c_lin.cols() == n, "LqPolicyEvalEnv: constraint map must have n columns");
    const auto m = config_.c_lin.rows();
    require(config_.lambda_mean.size() == m && config_.lambda_cov.rows() == m && config_.lambda_cov.cols() == m,
            "LqPolicyEvalEnv: lambda moments must match the constraint count");
    require(config_.noise_std >= 0.0 && config_.init_std >= 0.0, "LqPolicyEvalEnv: noise scales must be >= 0");

    closed_loop_ = config_.a + config_.b * config_.gain;
    Eigen::EigenSolver<Matrix> solver(closed_loop_, false);
    spectral_radius_ = solver.eigenvalues().cwiseAbs().maxCoeff();
    require(spectral_radius_ < 1.0, "LqPolicyEvalEnv: closed loop is not stable (spectral radius " +
                                        std::to_string(spectral_radius_) + ")");

    require((config_.lambda_cov - config_.lambda_cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
            "LqPolicyEvalEnv: lambda covariance must be symmetric");
    // Symmetric square root handles singular (e.g. zero) covariances.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(config_.lambda_cov);
    require(eig.eigenvalues().minCoeff() >= -1e-12, "LqPolicyEvalEnv: lambda covariance must be PSD");
    lambda_factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                     eig.eigenvectors().transpose();
}

Vector LqPolicyEvalEnv::sample_lambda(Rng& rng) const {
    const auto m = config_.lambda_mean.size();
    Vector z(m);
    for (Eigen::Index j = 0; j < m; ++j) z(j) = standard_normal(rng);
    return (config_.lambda_mean + lambda_factor_ * z).cwiseMax(0.0);
}

LqPolicyEvalEnv::Episode LqPolicyEvalEnv::rollout(int horizon, Rng& rng) const {
    require(horizon >= 0, "LqPolicyEvalEnv::rollout: horizon must be >= 0");
    const auto n = state_width();
    Episode episode;
    episode.lambda = sample_lambda(rng);
    Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k) x(k) = config_.init_std * standard_normal(rng);
    episode.steps.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        Step step;
        step.state = x;
        step.reward = -x.dot(config_.q * x);
        step.constraint = config_.c_lin * x;
        Vector noise(n);
        for (Eigen::Index k = 0; k < n; ++k) noise(k) = config_.noise_std * standard_normal(rng);
        step.next_state = closed_loop_ * x + noise;
        x = step.next_state;
        episode.steps.push_back(std::move(step));
    }
    return episode;
}

Matrix LqPolicyEvalEnv::stationary_covariance() const {
    // vec(X) = (I - M (x) M)^{-1} vec(W)
    const auto n = closed_loop_.rows();
    const Matrix kron = [&] {
        Matrix k(n * n, n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = closed_loop_(i, j) * closed_loop_;
        return k;
    }();
    const Matrix w = config_.noise_std * config_.noise_std * Matrix::Identity(n, n);
    const Vector vec_w = Eigen::Map<const Vector>(w.data(), n * n);
    const Vector vec_x = (Matrix::Identity(n * n, n * n) - kron).partialPivLu().solve(vec_w);
    return Eigen::Map<const Matrix>(vec_x.data(), n, n);
}

}  // namespace cmaa2c::env
