#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cmaa2c/adam.hpp"
#include "cmaa2c/categorical_policy.hpp"
#include "cmaa2c/checkpoint.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/mlp.hpp"
#include "unit/oracles.hpp"

using namespace cmaa2c;
using nn::Activation;
using nn::Layer;
using nn::Matrix;
using nn::Mlp;
using nn::Vector;

namespace {

Mlp identity_net(Activation act) {
    return Mlp({Layer{Matrix::Identity(2, 2), Vector::Zero(2), act}});
}

Mlp random_net(std::vector<int> widths, std::uint64_t seed) {
    Rng rng(seed);
    auto net = Mlp::make(widths, rng);
    // Non-zero biases so ReLU kinks are not hit at exactly zero.
    for (auto& l : net.layers())
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = uniform(rng, -0.5, 0.5);
    return net;
}

Vector random_vector(Eigen::Index n, Rng& rng, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, -scale, scale);
    return v;
}

}  // namespace

TEST_SUITE("tensor_nn") {

TEST_CASE("forward: identity and rectifier layers") {
    const Vector x = (Vector(2) << 1.0, -2.0).finished();
    CHECK(identity_net(Activation::linear).forward(x).isApprox(x));
    const Vector relu = identity_net(Activation::relu).forward(x);
    CHECK(relu(0) == 1.0);
    CHECK(relu(1) == 0.0);
}

TEST_CASE("forward: zero-weight network returns the final bias exactly") {
    Mlp net({Layer{Matrix::Zero(3, 2), Vector::Constant(3, 0.7), Activation::relu},
             Layer{Matrix::Zero(2, 3), (Vector(2) << -1.25, 3.5).finished(), Activation::linear}});
    const Vector y = net.forward((Vector(2) << 4.0, -9.0).finished());
    CHECK(y(0) == -1.25);
    CHECK(y(1) == 3.5);
}

TEST_CASE("forward: random two-hidden-layer net matches scalar recomputation") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto net = random_net({5, 64, 64, 3}, seed);
        Rng rng(seed + 100);
        const Vector x = random_vector(5, rng, 2.0);
        CHECK((net.forward(x) - oracle::naive_forward(net, x)).cwiseAbs().maxCoeff() < 1e-12);
        // Batched path agrees column by column.
        Matrix batch(5, 3);
        for (int c = 0; c < 3; ++c) batch.col(c) = random_vector(5, rng);
        const Matrix out = net.forward_batch(batch);
        for (int c = 0; c < 3; ++c) CHECK((out.col(c) - net.forward(batch.col(c))).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("forward: dimension mismatch is a contract error") {
    const auto net = random_net({3, 4, 2}, 1);
    CHECK_THROWS_AS(net.forward(Vector::Zero(2)), ContractError);
    CHECK_THROWS_AS(Mlp({Layer{Matrix::Zero(3, 2), Vector::Zero(3), Activation::relu},
                         Layer{Matrix::Zero(1, 4), Vector::Zero(1), Activation::linear}}),
                    ContractError);
}

TEST_CASE("backward: linear 1x1 net") {
    Mlp net({Layer{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 0.5), Activation::linear}});
    const auto g = net.backward(Vector::Constant(1, 3.0), Vector::Constant(1, 1.0));
    CHECK(g[0].weight(0, 0) == doctest::Approx(3.0));
    CHECK(g[0].bias(0) == doctest::Approx(1.0));
}

TEST_CASE("backward: dead rectifier unit passes no gradient") {
    Mlp net({Layer{Matrix::Constant(1, 1, 1.0), Vector::Constant(1, -5.0), Activation::relu},
             Layer{Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Activation::linear}});
    const auto g = net.backward(Vector::Constant(1, 1.0), Vector::Constant(1, 1.0));
    CHECK(g[0].weight(0, 0) == 0.0);
    CHECK(g[0].bias(0) == 0.0);
    CHECK(g[1].weight(0, 0) == 0.0);
}

TEST_CASE("backward: agrees with central finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto net = random_net({4, 16, 16, 3}, seed);
        Rng rng(seed * 7);
        const Vector x = random_vector(4, rng);
        const Vector w = random_vector(3, rng);
        const Vector analytic = nn::flatten(net.backward(x, w));
        const Vector numeric = oracle::numeric_gradient(net, [&](const Mlp& n) { return w.dot(n.forward(x)); });
        CHECK(oracle::max_relative_error(analytic, numeric) < 1e-4);
        // Batched gradients are the column sum.
        Matrix xs(4, 2), ws(3, 2);
        xs << x, random_vector(4, rng);
        ws << w, random_vector(3, rng);
        const Vector batched = nn::flatten(net.backward_batch(xs, ws));
        const Vector summed = analytic + nn::flatten(net.backward(xs.col(1), ws.col(1)));
        CHECK((batched - summed).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("adam: first step has magnitude lr") {
    Mlp net({Layer{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::linear}});
    nn::Adam adam(net, {0.1, 0.9, 0.999, 1e-8});
    auto g = net.zero_gradients();
    g[0].weight(0, 0) = 1.0;
    adam.step(net, g);
    CHECK(net.layers()[0].weight(0, 0) == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(adam.step_count() == 1);
    CHECK(adam.first_moment()[0].weight.rows() == 1);
}

TEST_CASE("adam: matches a reference recurrence on f = theta^2") {
    Mlp net({Layer{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::linear}});
    nn::Adam adam(net, {0.1, 0.9, 0.999, 1e-8});
    // Reference recurrence written out directly.
    double theta = 1.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 200; ++t) {
        auto g = net.zero_gradients();
        g[0].weight(0, 0) = 2.0 * net.layers()[0].weight(0, 0);
        adam.step(net, g);
        const double gr = 2.0 * theta;
        m = 0.9 * m + 0.1 * gr;
        v = 0.999 * v + 0.001 * gr * gr;
        theta -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
        REQUIRE(adam.step_count() == t);
    }
    CHECK(net.layers()[0].weight(0, 0) == doctest::Approx(theta).epsilon(1e-12));
    CHECK(std::abs(theta) < 0.05);
}

TEST_CASE("adam: zero gradients leave parameters unchanged; non-finite gradients throw") {
    auto net = random_net({3, 5, 2}, 4);
    const Vector before = nn::flatten(net);
    nn::Adam adam(net, {});
    for (int k = 0; k < 10; ++k) adam.step(net, net.zero_gradients());
    CHECK((nn::flatten(net) - before).cwiseAbs().maxCoeff() == 0.0);
    auto bad = net.zero_gradients();
    bad[1].bias(0) = std::nan("");
    CHECK_THROWS_AS(adam.step(net, bad), NumericalError);
}

TEST_CASE("policy: uniform logits, saturation, normalization") {
    Mlp zero({Layer{Matrix::Zero(5, 3), Vector::Zero(5), Activation::linear}});
    nn::CategoricalPolicy uniform_policy(zero);
    const Vector obs = Vector::Ones(3);
    const Vector p = uniform_policy.probabilities(obs);
    for (int a = 0; a < 5; ++a) CHECK(p(a) == doctest::Approx(0.2));
    CHECK(uniform_policy.log_prob(obs, 2) == doctest::Approx(std::log(0.2)));

    Mlp sat({Layer{Matrix::Zero(2, 1), (Vector(2) << 10.0, -10.0).finished(), Activation::linear}});
    nn::CategoricalPolicy saturated(sat);
    CHECK(saturated.probabilities(Vector::Zero(1))(0) > 0.9999);

    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        Vector logits = random_vector(7, rng, 50.0);
        CHECK(std::abs(nn::softmax(logits).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("policy: sampled actions are in range and report their log-probability") {
    const nn::CategoricalPolicy policy(random_net({6, 8, 5}, 9));
    Rng rng(11);
    const Vector obs = random_vector(6, rng);
    for (int k = 0; k < 1000; ++k) {
        const auto s = policy.sample(obs, rng);
        REQUIRE(s.action >= 0);
        REQUIRE(s.action < 5);
        REQUIRE(s.log_prob == doctest::Approx(policy.log_prob(obs, s.action)).epsilon(1e-14));
    }
}

TEST_CASE("policy: empirical frequencies over 1e5 draws within 3 standard errors") {
    const nn::CategoricalPolicy policy(random_net({6, 8, 5}, 21));
    Rng rng(5);
    const Vector obs = random_vector(6, rng);
    const Vector p = policy.probabilities(obs);
    const int n = 100000;
    std::vector<int> counts(5, 0);
    for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(policy.sample(obs, rng).action)];
    for (int a = 0; a < 5; ++a) {
        const double se = std::sqrt(p(a) * (1 - p(a)) / n);
        CHECK(std::abs(counts[static_cast<std::size_t>(a)] / double(n) - p(a)) < 3 * se + 1e-12);
    }
}

TEST_CASE("policy: sampling is deterministic given the seed") {
    const nn::CategoricalPolicy policy(random_net({6, 8, 5}, 2));
    Rng a(77), b(77);
    const Vector obs = Vector::Constant(6, 0.3);
    for (int k = 0; k < 100; ++k) CHECK(policy.sample(obs, a).action == policy.sample(obs, b).action);
}

TEST_CASE("log_prob_grad: softmax identity at the logit layer and finite differences") {
    Rng rng(8);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const nn::CategoricalPolicy policy(random_net({6, 12, 12, 5}, seed));
        const Vector obs = random_vector(6, rng);
        const int action = static_cast<int>(seed % 5);
        const auto g = policy.log_prob_grad(obs, action);
        // Output bias gradient is one-hot(action) - softmax(logits).
        Vector expected = -policy.probabilities(obs);
        expected(action) += 1.0;
        CHECK((g.back().bias - expected).cwiseAbs().maxCoeff() < 1e-12);
        const Vector numeric = oracle::numeric_gradient(
            policy.net(), [&](const Mlp& n) { return nn::CategoricalPolicy(n).log_prob(obs, action); });
        CHECK(oracle::max_relative_error(nn::flatten(g), numeric) < 1e-4);
    }
    Mlp sat({Layer{Matrix::Zero(2, 1), (Vector(2) << 40.0, -40.0).finished(), Activation::linear}});
    CHECK(std::sqrt(nn::squared_norm(nn::CategoricalPolicy(sat).log_prob_grad(Vector::Ones(1), 0))) < 1e-6);
}

TEST_CASE("weighted gradients are weighted sums of single-sample gradients") {
    const nn::CategoricalPolicy policy(random_net({6, 8, 5}, 31));
    Rng rng(2);
    Matrix obs(6, 4);
    for (int c = 0; c < 4; ++c) obs.col(c) = random_vector(6, rng);
    const std::vector<int> actions{0, 3, 4, 1};
    const std::vector<double> weights{0.5, -1.0, 2.0, 0.0};
    Vector expected = Vector::Zero(static_cast<Eigen::Index>(policy.net().parameter_count()));
    for (int c = 0; c < 4; ++c)
        expected += weights[static_cast<std::size_t>(c)] *
                    nn::flatten(policy.log_prob_grad(obs.col(c), actions[static_cast<std::size_t>(c)]));
    CHECK((nn::flatten(policy.weighted_log_prob_grad(obs, actions, weights)) - expected).cwiseAbs().maxCoeff() <
          1e-12);
    // Entropy gradient against finite differences of the weighted entropy.
    const auto entropy = [&](const Mlp& n) {
        double h = 0.0;
        for (int c = 0; c < 4; ++c) {
            const Vector p = nn::softmax(n.forward(obs.col(c)));
            h -= weights[static_cast<std::size_t>(c)] * (p.array() * p.array().log()).sum();
        }
        return h;
    };
    CHECK(oracle::max_relative_error(nn::flatten(policy.weighted_entropy_grad(obs, weights)),
                                     oracle::numeric_gradient(policy.net(), entropy)) < 1e-4);
}

TEST_CASE("checkpoint: text round trip is exact and the header is version-tagged") {
    const auto net = random_net({6, 64, 64, 5}, 13);
    std::stringstream buf;
    nn::save_mlp(buf, net);
    CHECK(buf.str().rfind("cmaa2c-mlp 1\n", 0) == 0);
    const auto back = nn::load_mlp(buf);
    CHECK((nn::flatten(back) - nn::flatten(net)).cwiseAbs().maxCoeff() == 0.0);
    std::stringstream bad("cmaa2c-mlp 9\nlayers 1\n");
    CHECK_THROWS(nn::load_mlp(bad));
}

}  // TEST_SUITE
