#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmaa2c/lq_env.hpp"
#include "cmaa2c/trainer.hpp"

namespace cmaa2c::config {

/// Line-oriented "[section]" / "key = value" document. '#' starts a comment.
class Document {
public:
    static Document parse(std::istream& in, const std::string& source = "<input>");
    /// Throws ConfigError naming the path when the file cannot be opened.
    static Document load(const std::filesystem::path& path);

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    bool empty() const { return values_.empty(); }

    /// Sections and keys in sorted order.
    std::string dump() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return values_; }

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
};

struct KeySpec {
    std::string section;
    std::string key;
    std::string default_value;
    std::string description;
};

const std::vector<KeySpec>& trainer_schema();
const std::vector<KeySpec>& policy_eval_schema();
const std::vector<KeySpec>& suite_schema();

/// Rejects any key that is not listed in `schema` (ConfigError).
void check_keys(const Document& doc, const std::vector<KeySpec>& schema);

/// Help text: one line per key with its default.
std::string describe(const std::vector<KeySpec>& schema);

/// Table defaults overridden by the document. Unknown keys are errors.
training::TrainerConfig trainer_config(const Document& doc);
Document to_document(const training::TrainerConfig& config);

struct SuiteSettings {
    training::TrainerConfig base;
    std::string id = "fig6";
    int seeds = 5;
    int test_episodes = 500;
};

/// Trainer defaults plus the [suite] block.
SuiteSettings suite_settings(const Document& doc);

struct PolicyEvalSettings {
    env::LqConfig lq = env::LqConfig::defaults();
    double gamma = 0.99;
    int horizon = 20;
    int epochs = 200;
    int episodes_per_epoch = 50;
    int eval_episodes = 2000;
    double learning_rate = 0.02;
    double rate_decay_epochs = 20.0;
    int averaging_start_epoch = 100;
    std::uint64_t seed = 1;
};

PolicyEvalSettings policy_eval_settings(const Document& doc);
Document to_document(const PolicyEvalSettings& settings);

/// Numeric list "a, b, c".
std::vector<double> parse_list(const std::string& text);

}  // namespace cmaa2c::config
