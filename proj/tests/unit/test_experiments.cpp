#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/figures.hpp"
#include "cmaa2c/policy_eval.hpp"
#include "cmaa2c/suite.hpp"
#include "unit/oracles.hpp"

using namespace cmaa2c;
using namespace cmaa2c::experiments;

namespace {

training::TrainerConfig tiny_base() {
    training::TrainerConfig c;
    c.actor_hidden = {8};
    c.critic_hidden = {8};
    c.episodes = 20;
    c.eval_interval = 10;
    c.eval_episodes = 4;
    return c;
}

int scan_t2(double gamma, double eps) {
    double p = 1.0;
    int k = 0;
    while (p > eps * (1.0 + 1e-12)) {
        p *= gamma;
        ++k;
    }
    return k;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::path(CMAA2C_TEST_TMP) / name;
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("horizon table") {
    const std::vector<double> gammas{0.5, 0.9, 0.99, 0.999};
    const auto rows = horizon_table(gammas);
    REQUIRE(rows.size() == 4);
    CHECK(rows[2].t1 == doctest::Approx(100.0));
    CHECK(rows[2].t2_inv_e == 100);
    CHECK(rows[2].t2_half == 69);
    CHECK(rows[2].t2_tenth == 230);
    for (const auto& r : rows) {
        CHECK(r.t2_half == scan_t2(r.gamma, 0.5));
        CHECK(r.t2_tenth == scan_t2(r.gamma, 0.1));
    }
    std::ostringstream out;
    write_horizon_csv(out, rows);
    CHECK(out.str().rfind("gamma,t1,t2_eps_0.5,t2_eps_inv_e,t2_eps_0.1\n", 0) == 0);
}

TEST_CASE("normal quantile against bisection") {
    for (double p : {1e-6, 0.01, 0.1, 0.5, 0.9, 0.975, 0.999999})
        CHECK(std::abs(normal_quantile(p) - oracle::bisect_normal_quantile(p)) < 1e-9);
    CHECK(normal_quantile(0.9) == doctest::Approx(1.2815515655).epsilon(1e-9));
}

TEST_CASE("suite layouts") {
    const auto base = tiny_base();
    const auto s6 = make_suite("fig6", base, default_seeds());
    CHECK(s6.seeds.size() == 5);
    REQUIRE(s6.configs.size() == 4);
    int chance = 0;
    for (const auto& r : s6.configs)
        if (r.config.penalty.metric == risk::RiskMetric::chance) {
            ++chance;
            CHECK(r.config.penalty.alpha(0) == 0.1);
            CHECK(r.config.penalty.delta(0) == 0.1);
        }
    CHECK(chance == 2);
    const auto s8 = make_suite("fig8", base, {1});
    for (const auto& r : s8.configs)
        if (r.config.penalty.metric == risk::RiskMetric::cvar) {
            CHECK(r.config.penalty.alpha(0) == 0.2);
            CHECK(r.config.penalty.delta(0) == 5e-3);
            CHECK(r.config.penalty.beta == 0.9);
        }
    CHECK(make_suite("figA", base, {1}).configs.size() == 2);
    CHECK_THROWS_AS(make_suite("fig99", base, {1}), ConfigError);
    CHECK(run_directory("/r", "fig6", "sc_mp", 3) == std::filesystem::path("/r/suites/fig6/sc_mp/3"));
}

TEST_CASE("suite runs are reproducible and summarized") {
    const auto suite = make_suite("figA", tiny_base(), {1, 2});
    const auto a = scratch("suite_a");
    const auto b = scratch("suite_b");
    run_suite(suite, a, 2);
    run_suite(suite, b, 1);
    for (const auto& r : suite.configs)
        for (auto seed : suite.seeds) {
            const auto da = run_directory(a, suite.id, r.name, seed);
            const auto db = run_directory(b, suite.id, r.name, seed);
            CHECK(std::filesystem::exists(da / "config.snapshot"));
            CHECK(std::filesystem::exists(da / "checkpoints" / "ckpt_20" / "actor_1.mlp"));
            CHECK(io::read_file(da / "metrics.csv") == io::read_file(db / "metrics.csv"));
        }
    const auto summary = io::CsvTable::read(a / "suites" / "figA" / "summary.csv");
    CHECK(summary.has_column("mean"));
    CHECK(summary.has_column("seed_2"));
    for (std::size_t k = 0; k < summary.row_count(); ++k) CHECK(summary.number(k, "n") == 2.0);

    // Reuse leaves finished runs untouched.
    const auto metrics = run_directory(a, suite.id, suite.configs[0].name, 1) / "metrics.csv";
    const auto stamp = std::filesystem::last_write_time(metrics);
    run_suite(suite, a, 1, true);
    CHECK(std::filesystem::last_write_time(metrics) == stamp);
}

TEST_CASE("bound accuracy rows from checkpoints") {
    const auto suite = make_suite("fig8", tiny_base(), {4});
    const auto root = scratch("suite_fig8");
    run_suite(suite, root, 1);
    const auto rows = table3_bound_accuracy(suite, root, 20, 0.2, 0.9);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.error));
        CHECK(r.error >= 0.0);
        if (!r.absolute) CHECK(r.error == doctest::Approx(std::abs(r.cvar_ub - r.cvar) / r.cvar));
    }
}

TEST_CASE("alpha heuristic on a constant constraint") {
    auto base = tiny_base();
    base.env.constraint = env::ConstraintMode::constant;
    base.env.constraint_constant = 0.37;
    const auto r = alpha_heuristic(base, 10);
    CHECK(r.alpha == 0.37);
    CHECK(alpha_heuristic(base, 10).alpha == r.alpha);
}

TEST_CASE("policy evaluation runs and is deterministic") {
    config::PolicyEvalSettings s;
    s.epochs = 12;
    s.episodes_per_epoch = 10;
    s.eval_episodes = 200;
    s.averaging_start_epoch = 6;
    const auto r = fig5_policy_eval(s);
    CHECK(r.curve.size() == 12);
    CHECK(r.predicted_gap > 0.0);
    std::ostringstream one, two;
    write_policy_eval_csv(one, r);
    write_policy_eval_csv(two, fig5_policy_eval(s));
    CHECK(one.str() == two.str());

    s.lq.lambda_cov.setZero();
    CHECK(std::abs(fig5_policy_eval(s).predicted_gap) < 1e-20);
}

}  // TEST_SUITE
