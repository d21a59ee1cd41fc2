// cmaa2c command-line entry point.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "cmaa2c/checkpoint.hpp"
#include "cmaa2c/config.hpp"
#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"
#include "cmaa2c/figures.hpp"
#include "cmaa2c/occupation.hpp"
#include "cmaa2c/policy_eval.hpp"
#include "cmaa2c/suite.hpp"
#include "cmaa2c/trainer.hpp"

namespace fs = std::filesystem;
using namespace cmaa2c;

namespace {

constexpr int kConfigExit = 1;
constexpr int kNumericalExit = 2;

fs::path output_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("CMAA2C_OUTPUT_ROOT"); env && *env) return env;
    return "runs";
}

int worker_count(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("CMAA2C_WORKERS"); env && *env) {
        try {
            const int w = std::stoi(env);
            if (w > 0) return w;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("CMAA2C_WORKERS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

config::Document load_or_empty(const std::string& path) {
    return path.empty() ? config::Document{} : config::Document::load(path);
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream out;
    out << std::setprecision(precision) << v;
    return out.str();
}

void print_report(const risk::RiskReport& r) {
    std::cout << "  metric=" << r.metric << " beta=" << fmt(r.beta) << " alpha=" << fmt(r.alpha)
              << " episodes=" << r.n_episodes << '\n'
              << "  Pr{C >= alpha} = " << fmt(r.prob_violation) << '\n'
              << "  VaR  = " << fmt(r.var) << '\n'
              << "  CVaR = " << fmt(r.cvar) << "   F(alpha) = " << fmt(r.cvar_ub) << '\n';
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

int run_train(const TrainArgs& a) {
    auto cfg = config::trainer_config(load_or_empty(a.config));
    if (a.seed) cfg.seed = *a.seed;
    const auto dir = output_root(a.out) / ("run_" + std::to_string(cfg.seed));
    const auto artifacts = training::train(cfg, dir, "");
    std::cout << "trained " << cfg.episodes << " episodes -> " << dir.string() << '\n';
    if (artifacts.final_lambda.size() > 0) std::cout << "  final lambda_1 = " << fmt(artifacts.final_lambda(0)) << '\n';
    for (auto it = artifacts.metrics.rbegin(); it != artifacts.metrics.rend(); ++it)
        if (it->eval) {
            std::cout << "  last evaluation (episode " << it->episode << "):\n";
            print_report(it->eval->report);
            std::cout << "  sum_i G r_i = " << fmt(it->eval->mean_total_return) << '\n';
            break;
        }
    return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string config;
    std::string checkpoint;
    std::string out;
    int episodes = 0;
    std::optional<std::uint64_t> seed;
};

int run_evaluate(const EvaluateArgs& a) {
    auto cfg = config::trainer_config(load_or_empty(a.config));
    if (a.seed) cfg.seed = *a.seed;
    const env::ParticleEnv env(cfg.env);
    std::vector<nn::CategoricalPolicy> actors;
    for (int i = 1; i <= env.agent_count(); ++i) {
        const auto path = fs::path(a.checkpoint) / ("actor_" + std::to_string(i) + ".mlp");
        if (!fs::exists(path)) throw ConfigError("missing checkpoint file " + path.string());
        actors.emplace_back(nn::load_mlp(path));
    }
    const int episodes = a.episodes > 0 ? a.episodes : cfg.eval_episodes;
    Rng rng(derive_seed(cfg.seed, 0xE7A1));
    const auto result =
        training::evaluate(actors, env, episodes, cfg.gamma, cfg.penalty, cfg.eval_alpha, cfg.eval_beta, rng);
    const fs::path out = a.out.empty() ? fs::path(a.checkpoint) / "evaluation.json" : fs::path(a.out);
    io::write_file(out, result.report.to_json() + "\n");
    std::cout << "evaluation of " << a.checkpoint << " -> " << out.string() << '\n';
    print_report(result.report);
    std::cout << "  sum_i G r_i = " << fmt(result.mean_total_return) << "   G C = " << fmt(result.mean_dsc_raw) << '\n';
    return 0;
}

// --- suite -------------------------------------------------------------------

struct SuiteArgs {
    std::string config;
    std::string suite;
    std::string out;
    int seeds = 0;
    int workers = 0;
    bool reuse = false;
    bool table3 = false;
    bool verbose = false;
};

int run_suite_command(const SuiteArgs& a) {
    const auto settings = config::suite_settings(load_or_empty(a.config));
    const auto& base = settings.base;
    const std::string id = !a.suite.empty() ? a.suite : settings.id;
    const int seeds = a.seeds > 0 ? a.seeds : settings.seeds;
    const int test_episodes = settings.test_episodes;

    const auto suite = experiments::make_suite(id, base, experiments::default_seeds(seeds));
    const auto root = output_root(a.out);
    const int workers = std::min<int>(worker_count(a.workers), static_cast<int>(suite.configs.size() * suite.seeds.size()));
    std::cout << "suite " << id << ": " << suite.configs.size() << " configs x " << seeds << " seeds on " << workers
              << " workers -> " << (root / "suites" / id).string() << '\n';
    experiments::run_suite(suite, root, workers, a.reuse, a.verbose);

    const auto summary = io::CsvTable::read(root / "suites" / id / "summary.csv");
    // Terminal snapshot per configuration.
    for (const auto& spec : suite.configs) {
        std::string last_episode;
        for (std::size_t r = 0; r < summary.row_count(); ++r)
            if (summary.cell(r, "config") == spec.name) last_episode = summary.cell(r, "episode");
        if (last_episode.empty()) continue;
        std::cout << "  " << spec.name << " @" << last_episode << ':';
        for (std::size_t r = 0; r < summary.row_count(); ++r)
            if (summary.cell(r, "config") == spec.name && summary.cell(r, "episode") == last_episode)
                std::cout << ' ' << summary.cell(r, "column") << '=' << fmt(summary.number(r, "mean"), 4);
        std::cout << '\n';
    }
    if (a.table3) {
        const auto& probe = suite.configs.front().config;
        const auto rows = experiments::table3_bound_accuracy(suite, root, test_episodes, probe.eval_alpha, probe.eval_beta);
        std::ostringstream csv;
        experiments::write_bound_accuracy_csv(csv, rows);
        std::cout << "  CVaR upper-bound accuracy:\n";
        for (const auto& r : rows)
            std::cout << "    " << r.config << ": CVaR=" << fmt(r.cvar, 4) << " UB=" << fmt(r.cvar_ub, 4)
                      << (r.absolute ? " abs error=" : " rel error=") << fmt(r.error, 4) << '\n';
        io::write_file(root / "suites" / id / "table3.csv", csv.str());
    }
    return 0;
}

// --- oracle-check ------------------------------------------------------------

struct OracleArgs {
    std::string chain = "builtin-2state";
    int states = 10;
    std::uint64_t seed = 1;
    double gamma = 0.9;
    std::string out;
};

int run_oracle_check(const OracleArgs& a) {
    env::TabularMdp mdp;
    if (a.chain == "builtin-2state") {
        mdp = env::TabularMdp::builtin_two_state();
    } else if (a.chain == "builtin-3state") {
        mdp = env::TabularMdp::builtin_ergodic();
    } else if (a.chain == "random") {
        if (a.states < 1 || a.states > 1000) throw ConfigError("--states must lie in [1, 1000]");
        Rng rng(a.seed);
        mdp = env::TabularMdp::random(a.states, rng);
    } else {
        throw ConfigError("unknown chain '" + a.chain + "' (builtin-2state, builtin-3state, random)");
    }
    if (!(a.gamma > 0.0 && a.gamma < 1.0)) throw ConfigError("--gamma must lie in (0, 1)");
    bool ok = true;
    const auto line = [&](const std::string& name, double value, double tol) {
        const bool pass = std::isfinite(value) && value < tol;
        ok = ok && pass;
        std::cout << "  " << std::left << std::setw(44) << name << std::setw(14) << fmt(value, 3) << " < "
                  << fmt(tol, 2) << "  " << (pass ? "ok" : "FAIL") << '\n';
    };
    std::cout << "oracle check on " << a.chain << " (" << mdp.state_count() << " states), gamma = " << a.gamma << '\n';

    const auto inf = occupation::occupation_exact(mdp, {a.gamma, std::nullopt});
    const auto fin = occupation::occupation_exact(mdp, {a.gamma, 25});
    line("normalization gap, infinite horizon", std::abs(inf.measure.sum() - 1.0), 1e-9);
    line("normalization gap, finite horizon T=25", std::abs(fin.measure.sum() - 1.0), 1e-9);

    const double grid[] = {1e-6, 1.0 - 1e-6};
    const bool ergodic = occupation::is_ergodic(mdp.transition);
    const auto limits = occupation::occupation_limits_check(mdp, grid, ergodic);
    line("||mu - p0||_inf at gamma = 1e-6", limits.rows[0].distance_to_initial, 1e-5);
    if (ergodic)
        line("||mu - p_inf||_inf at gamma = 1 - 1e-6", limits.rows[1].distance_to_stationary, 1e-4);
    else
        std::cout << "  chain is not ergodic; stationary limit skipped\n";

    for (double g : {0.5, 0.9, 0.95, 0.99, 0.995}) {
        const int t2 = occupation::effective_horizon_t2(g, std::pow(g, 1.0 / (1.0 - g)));
        const double t1 = occupation::effective_horizon_t1(g);
        line("|T2 - round(T1)| at gamma = " + fmt(g), std::abs(t2 - std::round(t1)), 0.5);
    }

    const Eigen::VectorXd h = mdp.constraint.col(0);
    const auto eq = occupation::discounted_expectation_equivalence(mdp, h, {a.gamma, std::nullopt});
    line("E[G C(x_t)] vs mu^T C gap", eq.gap, 1e-9);
    const auto eq_fin = occupation::discounted_expectation_equivalence(mdp, h, {a.gamma, 25});
    line("same, finite horizon T=25", eq_fin.gap, 1e-9);

    if (!a.out.empty()) {
        std::vector<double> sweep;
        for (int k = 1; k <= 99; ++k) sweep.push_back(k / 100.0);
        for (double g : {0.995, 0.999, 0.9999, 1.0 - 1e-6}) sweep.push_back(g);
        const auto report = occupation::occupation_limits_check(mdp, sweep, ergodic);
        std::ostringstream csv;
        experiments::write_limits_csv(csv, report);
        io::write_file(fs::path(a.out) / "occupation_limits.csv", csv.str());
        std::cout << "  limit sweep -> " << (fs::path(a.out) / "occupation_limits.csv").string() << '\n';
    }
    std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
    return ok ? 0 : kNumericalExit;
}

// --- horizon -----------------------------------------------------------------

int run_horizon(double gamma, const std::string& csv_path) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("--gamma must lie in (0, 1)");
    std::cout << "gamma = " << gamma << '\n';
    std::cout << "T1 = 1/(1-gamma) = " << fmt(occupation::effective_horizon_t1(gamma), 10) << '\n';
    std::cout << "T2(gamma, eps):\n";
    const std::pair<const char*, double> eps[] = {{"0.5", 0.5}, {"1/e", std::exp(-1.0)}, {"0.1", 0.1}};
    for (const auto& [name, e] : eps)
        std::cout << "  eps = " << std::left << std::setw(4) << name << "  T2 = " << occupation::effective_horizon_t2(gamma, e)
                  << '\n';
    if (!csv_path.empty()) {
        std::vector<double> grid;
        for (int k = 1; k <= 99; ++k) grid.push_back(k / 100.0);
        for (double g : {0.995, 0.999}) grid.push_back(g);
        const auto rows = experiments::horizon_table(grid);
        std::ostringstream csv;
        experiments::write_horizon_csv(csv, rows);
        io::write_file(csv_path, csv.str());
        std::cout << "horizon sweep -> " << csv_path << '\n';
    }
    return 0;
}

// --- policy-eval -------------------------------------------------------------

int run_policy_eval(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
    auto settings = config::policy_eval_settings(load_or_empty(config_path));
    if (seed) settings.seed = *seed;
    const auto result = experiments::fig5_policy_eval(settings);
    const auto dir = output_root(out);
    std::ostringstream csv;
    experiments::write_policy_eval_csv(csv, result);
    io::write_file(dir / "policy_eval.csv", csv.str());
    io::write_file(dir / "policy_eval.snapshot", config::to_document(settings).dump());
    std::ostringstream summary;
    experiments::write_policy_eval_summary(summary, result);
    io::write_file(dir / "policy_eval_summary.csv", summary.str());
    std::cout << "policy evaluation -> " << (dir / "policy_eval.csv").string() << '\n'
              << "  MSTDE generic          = " << fmt(result.mstde_generic) << '\n'
              << "  MSTDE input-augmented  = " << fmt(result.mstde_input_augmented) << '\n'
              << "  MSTDE structured       = " << fmt(result.mstde_structured) << '\n'
              << "  gap GC - SC            = " << fmt(result.gap) << " +- " << fmt(result.gap_standard_error) << '\n'
              << "  predicted gap          = " << fmt(result.predicted_gap) << '\n';
    return 0;
}

// --- alpha-tune --------------------------------------------------------------

int run_alpha_tune(const std::string& config_path, int test_episodes, const std::string& out,
                   std::optional<std::uint64_t> seed) {
    auto cfg = config::trainer_config(load_or_empty(config_path));
    if (seed) cfg.seed = *seed;
    if (test_episodes < 1) throw ConfigError("--test-episodes must be >= 1");
    const auto result = experiments::alpha_heuristic(cfg, test_episodes);
    std::cout << "recommended alpha = VaR_" << fmt(cfg.penalty.beta) << " = " << fmt(result.alpha, 10) << '\n';
    print_report(result.report);
    if (!out.empty()) {
        io::write_file(out, result.report.to_json() + "\n");
        std::cout << "report -> " << out << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained multi-agent advantage actor-critic with chance and CVaR penalties"};
    app.require_subcommand(1);
    const std::string trainer_keys = "\nConfig keys (defaults):\n" + config::describe(config::trainer_schema());
    const std::string suite_keys = "\nConfig keys (defaults):\n" + config::describe(config::suite_schema());
    const std::string pe_keys = "\nConfig keys (defaults):\n" + config::describe(config::policy_eval_schema());
    const std::string env_note = "\nEnvironment: CMAA2C_OUTPUT_ROOT overrides the output root, CMAA2C_WORKERS the worker count.";

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train one run; writes <out>/run_<seed>/");
    train_cmd->add_option("-c,--config", train.config, "config file");
    train_cmd->add_option("-o,--out", train.out, "output root");
    train_cmd->add_option("--seed", train.seed, "seed override");
    train_cmd->add_flag("-v,--verbose", train.verbose);
    train_cmd->footer(trainer_keys + env_note);

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate saved actors and write a risk report");
    eval_cmd->add_option("-c,--config", eval.config, "config file");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint directory")->required();
    eval_cmd->add_option("-o,--out", eval.out, "report path (default <checkpoint>/evaluation.json)");
    eval_cmd->add_option("--episodes", eval.episodes, "evaluation episodes (default evaluation.episodes)");
    eval_cmd->add_option("--seed", eval.seed, "seed override");
    eval_cmd->footer(trainer_keys);

    SuiteArgs suite;
    auto* suite_cmd = app.add_subcommand("suite", "Run a multi-seed experiment suite (fig6, fig8, figA)");
    suite_cmd->add_option("-c,--config", suite.config, "config file");
    suite_cmd->add_option("--suite", suite.suite, "suite id");
    suite_cmd->add_option("-o,--out", suite.out, "output root");
    suite_cmd->add_option("--seeds", suite.seeds, "number of seeds");
    suite_cmd->add_option("-j,--workers", suite.workers, "worker threads (default: cores)");
    suite_cmd->add_flag("--reuse", suite.reuse, "skip runs whose outputs match the config");
    suite_cmd->add_flag("--table3", suite.table3, "also write the CVaR upper-bound accuracy table");
    suite_cmd->add_flag("-v,--verbose", suite.verbose);
    suite_cmd->footer(suite_keys + env_note);

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Occupation-measure oracle checks on a tabular chain");
    oracle_cmd->add_option("--chain", oracle.chain, "builtin-2state | builtin-3state | random")->capture_default_str();
    oracle_cmd->add_option("--states", oracle.states, "states for --chain random")->capture_default_str();
    oracle_cmd->add_option("--seed", oracle.seed, "seed for --chain random")->capture_default_str();
    oracle_cmd->add_option("--gamma", oracle.gamma, "discount factor")->capture_default_str();
    oracle_cmd->add_option("-o,--out", oracle.out, "directory for the gamma sweep CSV");

    double horizon_gamma = 0.99;
    std::string horizon_csv;
    auto* horizon_cmd = app.add_subcommand("horizon", "Effective horizons T1 and T2");
    horizon_cmd->add_option("--gamma", horizon_gamma, "discount factor")->capture_default_str();
    horizon_cmd->add_option("--csv", horizon_csv, "write the gamma sweep to this CSV");

    std::string pe_config, pe_out;
    std::optional<std::uint64_t> pe_seed;
    auto* pe_cmd = app.add_subcommand("policy-eval", "Critic comparison on the linear-quadratic testbed");
    pe_cmd->add_option("-c,--config", pe_config, "config file");
    pe_cmd->add_option("-o,--out", pe_out, "output directory");
    pe_cmd->add_option("--seed", pe_seed, "seed override");
    pe_cmd->footer(pe_keys + env_note);

    std::string at_config, at_out;
    int at_episodes = 500;
    std::optional<std::uint64_t> at_seed;
    auto* at_cmd = app.add_subcommand("alpha-tune", "Train once with alpha = 0 and recommend alpha = VaR");
    at_cmd->add_option("-c,--config", at_config, "config file");
    at_cmd->add_option("--test-episodes", at_episodes, "test rollouts")->capture_default_str();
    at_cmd->add_option("-o,--out", at_out, "report path");
    at_cmd->add_option("--seed", at_seed, "seed override");
    at_cmd->footer(trainer_keys);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    try {
        if (*train_cmd) return run_train(train);
        if (*eval_cmd) return run_evaluate(eval);
        if (*suite_cmd) return run_suite_command(suite);
        if (*oracle_cmd) return run_oracle_check(oracle);
        if (*horizon_cmd) return run_horizon(horizon_gamma, horizon_csv);
        if (*pe_cmd) return run_policy_eval(pe_config, pe_out, pe_seed);
        if (*at_cmd) return run_alpha_tune(at_config, at_episodes, at_out, at_seed);
    } catch (const NumericalError& e) {
        std::cerr << "error: numerical: " << e.what() << '\n';
        return kNumericalExit;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kConfigExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigExit;
    }
    return kConfigExit;
}
