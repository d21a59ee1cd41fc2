#include "cmaa2c/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cmaa2c/checkpoint.hpp"
#include "cmaa2c/config.hpp"
#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"

namespace cmaa2c::experiments {

namespace {

using training::TrainerConfig;

RunSpec variant(const TrainerConfig& base, const std::string& name, critics::CriticVariant critic) {
    RunSpec run{name, base};
    run.config.critic = critic;
    return run;
}

void set_penalty(TrainerConfig& c, risk::RiskMetric metric, double alpha, double delta, double beta) {
    c.penalty.metric = metric;
    c.penalty.alpha = Eigen::VectorXd::Constant(1, alpha);
    c.penalty.delta = Eigen::VectorXd::Constant(1, delta);
    c.penalty.beta = beta;
}

const std::vector<std::string> kEvalColumns{"prob_violation_eval", "var_eval", "cvar_eval",
                                            "cvar_ub",             "return_eval", "dsc_eval",
                                            "lambda_1"};

std::vector<nn::CategoricalPolicy> load_actors(const std::filesystem::path& dir, int agents) {
    std::vector<nn::CategoricalPolicy> actors;
    for (int i = 1; i <= agents; ++i)
        actors.emplace_back(nn::load_mlp(dir / ("actor_" + std::to_string(i) + ".mlp")));
    return actors;
}

bool reusable(const RunSpec& run, const std::filesystem::path& dir) {
    const auto snapshot = dir / "config.snapshot";
    const auto metrics = dir / "metrics.csv";
    const auto final_ckpt = dir / "checkpoints" / ("ckpt_" + std::to_string(run.config.episodes));
    if (!std::filesystem::exists(snapshot) || !std::filesystem::exists(metrics) ||
        !std::filesystem::exists(final_ckpt))
        return false;
    if (io::read_file(snapshot) != config::to_document(run.config).dump()) return false;
    const auto table = io::CsvTable::read(metrics);
    return table.row_count() > 0 &&
           static_cast<int>(table.number(table.row_count() - 1, "episode")) == run.config.episodes;
}

}  // namespace

std::vector<std::uint64_t> default_seeds(int count) {
    std::vector<std::uint64_t> seeds;
    for (int s = 1; s <= count; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
}

SuiteSpec fig6_suite(const TrainerConfig& base, std::vector<std::uint64_t> seeds) {
    TrainerConfig raw = base;
    set_penalty(raw, risk::RiskMetric::average, 0.0, 0.0, base.penalty.beta);
    raw.eval_alpha = 0.1;
    TrainerConfig mp = raw;
    set_penalty(mp, risk::RiskMetric::chance, 0.1, 0.1, base.penalty.beta);
    SuiteSpec suite{"fig6", {}, std::move(seeds)};
    suite.configs.push_back(variant(raw, "gc_raw", critics::CriticVariant::generic));
    suite.configs.push_back(variant(raw, "sc_raw", critics::CriticVariant::structured));
    suite.configs.push_back(variant(mp, "gc_mp", critics::CriticVariant::generic));
    suite.configs.push_back(variant(mp, "sc_mp", critics::CriticVariant::structured));
    return suite;
}

SuiteSpec fig8_suite(const TrainerConfig& base, std::vector<std::uint64_t> seeds) {
    TrainerConfig raw = base;
    set_penalty(raw, risk::RiskMetric::average, 0.0, 0.0, 0.9);
    raw.eval_alpha = 0.2;
    raw.eval_beta = 0.9;
    TrainerConfig mp = raw;
    set_penalty(mp, risk::RiskMetric::cvar, 0.2, 5e-3, 0.9);
    SuiteSpec suite{"fig8", {}, std::move(seeds)};
    suite.configs.push_back(variant(raw, "gc_raw", critics::CriticVariant::generic));
    suite.configs.push_back(variant(raw, "sc_raw", critics::CriticVariant::structured));
    suite.configs.push_back(variant(mp, "gc_mp", critics::CriticVariant::generic));
    suite.configs.push_back(variant(mp, "sc_mp", critics::CriticVariant::structured));
    return suite;
}

SuiteSpec figA_suite(const TrainerConfig& base, std::vector<std::uint64_t> seeds) {
    TrainerConfig raw = base;
    set_penalty(raw, risk::RiskMetric::average, 0.0, 0.0, base.penalty.beta);
    SuiteSpec suite{"figA", {}, std::move(seeds)};
    suite.configs.push_back(variant(raw, "gc_raw", critics::CriticVariant::generic));
    suite.configs.push_back(variant(raw, "sc_raw", critics::CriticVariant::structured));
    return suite;
}

SuiteSpec make_suite(const std::string& id, const TrainerConfig& base, std::vector<std::uint64_t> seeds) {
    if (seeds.empty()) throw ConfigError("suite needs at least one seed");
    if (id == "fig6") return fig6_suite(base, std::move(seeds));
    if (id == "fig8") return fig8_suite(base, std::move(seeds));
    if (id == "figA") return figA_suite(base, std::move(seeds));
    throw ConfigError("unknown suite '" + id + "' (expected fig6, fig8 or figA)");
}

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& suite,
                                    const std::string& config, std::uint64_t seed) {
    return root / "suites" / suite / config / std::to_string(seed);
}

void run_suite(const SuiteSpec& suite, const std::filesystem::path& root, int workers, bool reuse, bool verbose) {
    struct Job {
        RunSpec run;
        std::filesystem::path dir;
    };
    std::vector<Job> jobs;
    for (const auto& spec : suite.configs)
        for (auto seed : suite.seeds) {
            Job job{spec, run_directory(root, suite.id, spec.name, seed)};
            job.run.config.seed = seed;
            job.run.config.validate();
            jobs.push_back(std::move(job));
        }
    const int width = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr failure;
    const auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            {
                std::lock_guard lock(mutex);
                if (failure) return;
            }
            const auto& job = jobs[k];
            try {
                if (reuse && reusable(job.run, job.dir)) {
                    if (verbose) {
                        std::lock_guard lock(mutex);
                        std::cout << "reuse " << job.dir.string() << '\n';
                    }
                    continue;
                }
                training::train(job.run.config, job.dir);
                if (verbose) {
                    std::lock_guard lock(mutex);
                    std::cout << "done  " << job.dir.string() << '\n';
                }
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    write_suite_summary(suite, root);
}

void write_suite_summary(const SuiteSpec& suite, const std::filesystem::path& root) {
    std::ostringstream out;
    out << "config,episode,column,mean,std,n";
    for (auto seed : suite.seeds) out << ",seed_" << seed;
    out << '\n';
    for (const auto& spec : suite.configs) {
        std::vector<io::CsvTable> tables;
        for (auto seed : suite.seeds)
            tables.push_back(io::CsvTable::read(run_directory(root, suite.id, spec.name, seed) / "metrics.csv"));
        // Evaluation rows are the ones with a non-empty evaluation cell; all seeds share the schedule.
        const auto& first = tables.front();
        for (std::size_t r = 0; r < first.row_count(); ++r) {
            if (first.cell(r, "prob_violation_eval").empty()) continue;
            const auto episode = first.cell(r, "episode");
            for (const auto& column : kEvalColumns) {
                std::vector<double> values;
                for (const auto& t : tables) {
                    if (t.row_count() != first.row_count())
                        throw ConfigError("suite " + suite.id + "/" + spec.name + ": seeds logged different lengths");
                    values.push_back(t.number(r, column));
                }
                double mean = 0.0;
                for (double v : values) mean += v / static_cast<double>(values.size());
                double var = 0.0;
                for (double v : values) var += (v - mean) * (v - mean);
                const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
                out << spec.name << ',' << episode << ',' << column << ',' << io::format_number(mean) << ','
                    << io::format_number(sd) << ',' << values.size();
                for (double v : values) out << ',' << io::format_number(v);
                out << '\n';
            }
        }
    }
    io::write_file(root / "suites" / suite.id / "summary.csv", out.str());
}

std::vector<BoundAccuracyRow> table3_bound_accuracy(const SuiteSpec& suite, const std::filesystem::path& root,
                                                    int test_episodes, double alpha, double beta) {
    if (test_episodes < 1) throw ConfigError("table3: test_episodes must be >= 1");
    std::vector<BoundAccuracyRow> rows;
    for (const auto& spec : suite.configs) {
        const env::ParticleEnv env(spec.config.env);
        std::vector<std::vector<double>> paths;
        for (auto seed : suite.seeds) {
            const auto dir = run_directory(root, suite.id, spec.name, seed) / "checkpoints" /
                             ("ckpt_" + std::to_string(spec.config.episodes));
            const auto actors = load_actors(dir, env.agent_count());
            Rng rng(derive_seed(seed, 0x7E57));
            auto p = training::rollout_constraints(actors, env, test_episodes, rng);
            paths.insert(paths.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        }
        const auto samples = risk::occupation_samples(paths, spec.config.gamma);
        BoundAccuracyRow row;
        row.config = spec.name;
        row.cvar = risk::empirical_cvar(samples, beta);
        row.cvar_ub = risk::f_alpha(samples, beta, alpha);
        row.absolute = !(row.cvar > 0.0);
        row.error = row.absolute ? std::abs(row.cvar_ub - row.cvar) : std::abs(row.cvar_ub - row.cvar) / row.cvar;
        rows.push_back(row);
    }
    return rows;
}

void write_bound_accuracy_csv(std::ostream& out, const std::vector<BoundAccuracyRow>& rows) {
    out << "config,cvar,cvar_ub,error,absolute\n";
    for (const auto& r : rows)
        out << r.config << ',' << io::format_number(r.cvar) << ',' << io::format_number(r.cvar_ub) << ','
            << io::format_number(r.error) << ',' << (r.absolute ? 1 : 0) << '\n';
}

AlphaHeuristicResult alpha_heuristic(const TrainerConfig& base, int test_episodes) {
    TrainerConfig config = base;
    config.penalty.alpha.setZero();
    const auto artifacts = training::train(config, std::nullopt);
    const env::ParticleEnv env(config.env);
    Rng rng(derive_seed(config.seed, 0xA1FA));
    const auto paths = training::rollout_constraints(artifacts.policies, env, test_episodes, rng);
    const auto samples = risk::occupation_samples(paths, config.gamma);
    AlphaHeuristicResult result;
    result.alpha = risk::empirical_var(samples, config.penalty.beta);
    result.report = risk::make_report(samples, config.penalty.metric, result.alpha, config.penalty.delta(0),
                                      config.penalty.beta, test_episodes);
    return result;
}

}  // namespace cmaa2c::experiments
