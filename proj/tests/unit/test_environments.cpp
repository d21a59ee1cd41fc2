#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cmaa2c/errors.hpp"
#include "cmaa2c/lq_env.hpp"
#include "cmaa2c/particle_env.hpp"
#include "cmaa2c/tabular_mdp.hpp"

using namespace cmaa2c;
using env::Matrix;
using env::Vector;

TEST_SUITE("environments") {

TEST_CASE("particle reset: reproducible, zero velocity, sampler mean") {
    const env::ParticleEnv env(env::ParticleConfig{});
    Rng a(42), b(42);
    const Vector x = env.reset(a);
    CHECK(x == env.reset(b));
    CHECK(x.size() == 8);
    for (int i = 0; i < 2; ++i) {
        CHECK(x(4 * i + 2) == 0.0);
        CHECK(x(4 * i + 3) == 0.0);
    }
    // Uniform on [-1, 1]: mean 0, variance 1/3.
    Rng rng(1);
    const int n = 10000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += env.reset(rng)(0);
    CHECK(std::abs(sum / n - env.initial_position_mean()) < 3.0 * std::sqrt(1.0 / 3.0 / n));
}

TEST_CASE("particle rewards and constraint") {
    env::ParticleConfig cfg;
    cfg.landmarks = {{1.0, 1.0}, {1.0, 1.0}};
    const env::ParticleEnv env(cfg);
    Vector x = Vector::Zero(8);
    x(0) = 0.5, x(1) = 0.5, x(4) = 0.5, x(5) = 0.5;
    CHECK(env.constraints(x)(0) == doctest::Approx(2.0));
    const Vector r = env.rewards(x);
    CHECK(r(0) == doctest::Approx(-0.5));
    CHECK(r(1) == doctest::Approx(-0.5));

    x(0) = 1, x(1) = -1, x(4) = 2, x(5) = -2;
    CHECK(env.constraints(x)(0) == 0.0);

    // Agent 1 on its landmark.
    x(0) = 1, x(1) = 1;
    CHECK(env.rewards(x)(0) == 0.0);
}

TEST_CASE("particle default landmarks lie outside the safe set") {
    env::ParticleConfig cfg;
    cfg.finalize();
    double sum = 0.0;
    for (const auto& l : cfg.landmarks) sum += l[0] + l[1];
    CHECK(sum > 0.0);
}

TEST_CASE("particle dynamics follow the damped double integrator") {
    const env::ParticleEnv env(env::ParticleConfig{});
    Vector x = Vector::Zero(8);
    x(2) = 0.4;  // agent 1 vx
    const std::vector<int> actions{1, 4};  // +x, -y
    const Vector next = env.next_state(x, actions);
    const double accel = 5.0;
    const double vx = (1 - 0.25) * 0.4 + accel * 0.1;
    CHECK(next(2) == doctest::Approx(vx));
    CHECK(next(0) == doctest::Approx(vx * 0.1));
    CHECK(next(7) == doctest::Approx(-accel * 0.1));
    CHECK(next(5) == doctest::Approx(-accel * 0.1 * 0.1));
    // Deterministic and non-mutating.
    CHECK(env.next_state(x, actions) == next);
    CHECK(env.config().landmarks.size() == 2);
    CHECK_THROWS_AS(env.next_state(x, std::vector<int>{1}), ContractError);
}

TEST_CASE("particle step records C(x_t) of the pre-step state") {
    const env::ParticleEnv env(env::ParticleConfig{});
    Rng rng(3);
    Vector x = env.reset(rng);
    for (int t = 0; t < 25; ++t) {
        const std::vector<int> actions{t % 5, (t + 2) % 5};
        const auto tr = env.step(x, actions);
        CHECK(std::abs(tr.c_raw(0) - env.constraints(tr.state)(0)) < 1e-12);
        CHECK(tr.observations.size() == 2);
        CHECK(tr.observations[1].size() == 6);
        x = tr.next_state;
    }
}

TEST_CASE("particle observation is local") {
    const env::ParticleEnv env(env::ParticleConfig{});
    Vector x(8);
    x << 0.1, 0.2, 0.3, 0.4, 9, 9, 9, 9;
    const Vector o = env.observe(x, 0);
    CHECK(o(0) == 0.1);
    CHECK(o(3) == 0.4);
    CHECK(o(4) == doctest::Approx(0.65));
    CHECK(o(5) == doctest::Approx(0.55));
}

TEST_CASE("trajectory CSV has the documented columns") {
    const env::ParticleEnv env(env::ParticleConfig{});
    Rng rng(1);
    env::Trajectory traj{env.step(env.reset(rng), std::vector<int>{0, 0})};
    std::ostringstream out;
    env::write_trajectory_csv(out, traj);
    CHECK(out.str().rfind("t,x1,x2,x3,x4,x5,x6,x7,x8,u1,u2,r1,r2,c_raw,c_transformed\n", 0) == 0);
}

TEST_CASE("lq: zero noise from the origin stays at zero") {
    auto cfg = env::LqConfig::defaults();
    cfg.noise_std = 0.0;
    cfg.init_std = 0.0;
    const env::LqPolicyEvalEnv env(cfg);
    Rng rng(1);
    const auto e = env.rollout(30, rng);
    for (const auto& s : e.steps) {
        CHECK(s.state.norm() == 0.0);
        CHECK(s.reward == 0.0);
        CHECK(s.constraint.norm() == 0.0);
    }
}

TEST_CASE("lq: unstable closed loop is rejected") {
    auto cfg = env::LqConfig::defaults();
    cfg.gain = Matrix::Identity(2, 2) * 0.5;
    CHECK_THROWS_AS(env::LqPolicyEvalEnv{cfg}, ContractError);
}

TEST_CASE("lq: long-run covariance matches the Lyapunov series") {
    auto cfg = env::LqConfig::defaults();
    cfg.noise_std = 0.05;
    const env::LqPolicyEvalEnv env(cfg);
    // Oracle: sum_k M^k W (M^k)^T, truncated once the terms vanish.
    const Matrix m = env.closed_loop();
    Matrix series = Matrix::Zero(2, 2), power = Matrix::Identity(2, 2);
    for (int k = 0; k < 400; ++k) {
        series += power * power.transpose() * (cfg.noise_std * cfg.noise_std);
        power = m * power;
    }
    CHECK((env.stationary_covariance() - series).cwiseAbs().maxCoeff() < 1e-14);

    Rng rng(9);
    Matrix cov = Matrix::Zero(2, 2);
    int count = 0;
    for (int ep = 0; ep < 40; ++ep) {
        const auto e = env.rollout(5000, rng);
        for (std::size_t t = 100; t < e.steps.size(); ++t) {
            cov += e.steps[t].state * e.steps[t].state.transpose();
            ++count;
        }
    }
    cov /= count;
    CHECK((cov - series).cwiseAbs().maxCoeff() < 0.05 * series.cwiseAbs().maxCoeff());
}

TEST_CASE("lq: lambda sampler mean and nonnegativity") {
    const env::LqPolicyEvalEnv env(env::LqConfig::defaults());
    Rng rng(4);
    const int n = 10000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double l = env.sample_lambda(rng)(0);
        REQUIRE(l >= 0.0);
        sum += l;
    }
    CHECK(std::abs(sum / n - 1.0) < 3.0 * 0.2 / std::sqrt(n));
}

TEST_CASE("tabular: validation, absorbing and alternating chains") {
    env::TabularMdp one{Matrix::Ones(1, 1), Vector::Ones(1), Matrix::Zero(1, 1)};
    one.validate();
    Rng rng(1);
    for (int s : env::tabular_rollout(one, 10, rng)) CHECK(s == 0);

    const auto alt = env::TabularMdp::alternating();
    const auto path = env::tabular_rollout(alt, 9, rng);
    REQUIRE(path.size() == 10);
    for (std::size_t t = 0; t < path.size(); ++t) CHECK(path[t] == static_cast<int>(t % 2));

    env::TabularMdp bad = alt;
    bad.transition(0, 0) = 0.1;
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("tabular: visit frequencies at t = 5 match p0^T P^5") {
    Rng rng(12);
    const auto mdp = env::TabularMdp::random(6, rng);
    Vector p = mdp.initial;
    for (int t = 0; t < 5; ++t) p = mdp.transition.transpose() * p;
    const int n = 100000;
    Vector counts = Vector::Zero(6);
    for (int k = 0; k < n; ++k) counts(env::tabular_rollout(mdp, 5, rng)[5]) += 1.0;
    for (int s = 0; s < 6; ++s) {
        const double se = std::sqrt(p(s) * (1 - p(s)) / n);
        CHECK(std::abs(counts(s) / n - p(s)) < 3.0 * se + 1e-12);
    }
}

}  // TEST_SUITE
