#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cmaa2c/config.hpp"

namespace cmaa2c::experiments {

struct MstdeRow {
    int epoch = 0;
    double generic = 0.0;
    double input_augmented = 0.0;
    double structured = 0.0;
};

/// Outcome of training the three feature critics on one shared trajectory stream.
struct PolicyEvalResult {
    std::vector<MstdeRow> curve;
    Eigen::VectorXd c_mean;
    Eigen::MatrixXd c_cov;
    Eigen::MatrixXd lambda_cov;
    double predicted_gap = 0.0;
    /// Converged MSTDE per variant on the held-out stream.
    double mstde_generic = 0.0;
    double mstde_input_augmented = 0.0;
    double mstde_structured = 0.0;
    /// MSTDE(generic) - MSTDE(structured), with a standard error from
    /// per-episode paired differences.
    double gap = 0.0;
    double gap_standard_error = 0.0;
};

/// Trains generic, input-augmented and structured critics on identical
/// episodes; MSTDE is measured after every epoch on a fixed held-out set.
/// Throws NumericalError if any MSTDE exceeds 1e6.
PolicyEvalResult fig5_policy_eval(const config::PolicyEvalSettings& settings);

void write_policy_eval_csv(std::ostream& out, const PolicyEvalResult& result);
/// quantity,value rows: converged MSTDE per variant, gap, its standard error, predicted gap.
void write_policy_eval_summary(std::ostream& out, const PolicyEvalResult& result);

}  // namespace cmaa2c::experiments
