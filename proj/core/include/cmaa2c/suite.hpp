#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmaa2c/trainer.hpp"

namespace cmaa2c::experiments {

struct RunSpec {
    std::string name;
    training::TrainerConfig config;
};

struct SuiteSpec {
    std::string id;
    std::vector<RunSpec> configs;
    std::vector<std::uint64_t> seeds;
};

std::vector<std::uint64_t> default_seeds(int count = 5);

/// {generic, structured} x {raw, chance-modified}, alpha = delta = 0.1.
SuiteSpec fig6_suite(const training::TrainerConfig& base, std::vector<std::uint64_t> seeds);
/// {generic, structured} x {raw, cvar-modified}, alpha = 0.2, delta = 5e-3, beta = 0.9.
SuiteSpec fig8_suite(const training::TrainerConfig& base, std::vector<std::uint64_t> seeds);
/// {generic, structured} x raw penalty.
SuiteSpec figA_suite(const training::TrainerConfig& base, std::vector<std::uint64_t> seeds);

SuiteSpec make_suite(const std::string& id, const training::TrainerConfig& base, std::vector<std::uint64_t> seeds);

/// <root>/suites/<suite>/<config>/<seed>/
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& suite,
                                    const std::string& config, std::uint64_t seed);

/// Trains every (config, seed) pair on a bounded worker pool and writes
/// summary.csv per suite. Runs whose metrics.csv already matches the config
/// snapshot are reused when `reuse` is set.
void run_suite(const SuiteSpec& suite, const std::filesystem::path& root, int workers, bool reuse = false,
               bool verbose = false);

/// Per config and evaluation episode: mean and std over seeds of every
/// evaluation column, plus the per-seed values.
void write_suite_summary(const SuiteSpec& suite, const std::filesystem::path& root);

struct BoundAccuracyRow {
    std::string config;
    double cvar = 0.0;
    double cvar_ub = 0.0;
    double error = 0.0;     // relative unless `absolute`
    bool absolute = false;  // set when CVaR <= 0
};

/// Relative CVaR upper-bound error |UB - CVaR| / CVaR per configuration,
/// from test rollouts of the final checkpoints (pooled over seeds).
std::vector<BoundAccuracyRow> table3_bound_accuracy(const SuiteSpec& suite, const std::filesystem::path& root,
                                                    int test_episodes, double alpha, double beta);

/// config,cvar,cvar_ub,error,absolute
void write_bound_accuracy_csv(std::ostream& out, const std::vector<BoundAccuracyRow>& rows);

struct AlphaHeuristicResult {
    double alpha = 0.0;
    risk::RiskReport report;
};

/// Trains once with alpha = 0 and returns VaR_beta of C over test rollouts.
AlphaHeuristicResult alpha_heuristic(const training::TrainerConfig& base, int test_episodes);

}  // namespace cmaa2c::experiments
