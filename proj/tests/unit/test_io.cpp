#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "cmaa2c/config.hpp"
#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"

using namespace cmaa2c;

namespace {

config::Document parse(const std::string& text) {
    std::istringstream in(text);
    return config::Document::parse(in);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("document parsing") {
    const auto doc = parse("# header\n[trainer]\ngamma = 0.95   # trailing\n\n[env]\n landmarks = 0.5, 0.5; 1, 1\n");
    CHECK(doc.get("trainer", "gamma") == "0.95");
    CHECK(doc.get("env", "landmarks") == "0.5, 0.5; 1, 1");
    CHECK_FALSE(doc.get("trainer", "seed").has_value());
    CHECK_THROWS_AS(parse("gamma = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[trainer]\ngamma = 1\ngamma = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[trainer]\njust words\n"), ConfigError);
}

TEST_CASE("missing file names the path") {
    try {
        config::Document::load("/nonexistent/dir/run.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/dir/run.ini") != std::string::npos);
    }
}

TEST_CASE("trainer config defaults and overrides") {
    const auto defaults = config::trainer_config(parse(""));
    const training::TrainerConfig reference;
    CHECK(defaults.gamma == reference.gamma);
    CHECK(defaults.dual_lr == reference.dual_lr);
    CHECK(defaults.nstep == reference.nstep);
    CHECK(defaults.lambda_max == reference.lambda_max);
    CHECK(defaults.target_interval == reference.target_interval);
    CHECK(defaults.episodes == reference.episodes);
    CHECK(defaults.critic == reference.critic);

    const auto c = config::trainer_config(
        parse("[trainer]\ngamma = 0.9\ncritic = generic\n[penalty]\nmetric = cvar\nalpha = 0.2\ndelta = 0.005\n"
              "[network]\nactor_hidden = 32, 16\n[env]\nlandmarks = 0.1, 0.2; 0.3, 0.4\n"));
    CHECK(c.gamma == 0.9);
    CHECK(c.critic == critics::CriticVariant::generic);
    CHECK(c.penalty.metric == risk::RiskMetric::cvar);
    CHECK(c.penalty.delta(0) == 0.005);
    CHECK(c.actor_hidden == std::vector<int>{32, 16});
    REQUIRE(c.env.landmarks.size() == 2);
    CHECK(c.env.landmarks[1][1] == 0.4);
}

TEST_CASE("bad values and unknown keys are config errors") {
    CHECK_THROWS_AS(config::trainer_config(parse("[trainer]\ngamma = 1.5\n")), ConfigError);
    CHECK_THROWS_AS(config::trainer_config(parse("[trainer]\ngama = 0.9\n")), ConfigError);
    CHECK_THROWS_AS(config::trainer_config(parse("[bogus]\nx = 1\n")), ConfigError);
    CHECK_THROWS_AS(config::trainer_config(parse("[trainer]\nnstep = five\n")), ConfigError);
    CHECK_THROWS_AS(config::trainer_config(parse("[penalty]\nmetric = median\n")), ConfigError);
}

TEST_CASE("snapshot round trip") {
    const auto c = config::trainer_config(parse("[trainer]\nseed = 17\ndual_lr = 0.003\n[env]\ninit_low = -0.1\n"));
    const auto doc = config::to_document(c);
    const auto back = config::trainer_config(doc);
    CHECK(config::to_document(back).dump() == doc.dump());
    CHECK(back.seed == 17);
    CHECK(back.env.init_low == -0.1);
}

TEST_CASE("help text lists every key with its default") {
    const auto text = config::describe(config::trainer_schema());
    for (const auto& k : config::trainer_schema()) CHECK(text.find(k.key + " = " + k.default_value) != std::string::npos);
    CHECK(text.find("dual_lr = 0.0001") != std::string::npos);
}

TEST_CASE("policy evaluation settings") {
    const auto s = config::policy_eval_settings(parse("[policy_eval]\nepochs = 7\n[lq]\nlambda_cov = 0\n"));
    CHECK(s.epochs == 7);
    CHECK(s.lq.lambda_cov.norm() == 0.0);
    CHECK_THROWS_AS(config::policy_eval_settings(parse("[trainer]\ngamma = 0.9\n")), ConfigError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456789.0, 0.0}) {
        const auto s = io::format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(io::format_number(0.5) == "0.5");
    CHECK(io::format_number(std::numeric_limits<double>::quiet_NaN()).empty());
}

TEST_CASE("csv tables") {
    const auto path = std::filesystem::path(CMAA2C_TEST_TMP) / "io" / "t.csv";
    io::write_file(path, "a,b\n1,\n2.5,3\n");
    const auto t = io::CsvTable::read(path);
    CHECK(t.row_count() == 2);
    CHECK(std::isnan(t.number(0, "b")));
    CHECK(t.number(1, "a") == 2.5);
    CHECK(t.column("b")[1] == 3.0);
    CHECK_FALSE(t.has_column("c"));
    io::write_file(path, "a,b\n1\n");
    CHECK_THROWS(io::CsvTable::read(path));
    CHECK(io::split_csv_line("x,,y").size() == 3);
}

}  // TEST_SUITE
