#include "cmaa2c/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmaa2c/csv.hpp"
#include "cmaa2c/errors.hpp"

namespace cmaa2c::config {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string where(const std::string& section, const std::string& key) {
    return section + "." + key;
}

double to_double(const std::string& text, const std::string& name) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(name + ": expected a finite number, got '" + text + "'");
}

long long to_integer(const std::string& text, const std::string& name) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(name + ": expected an integer, got '" + text + "'");
}

int to_int(const std::string& text, const std::string& name) {
    const long long v = to_integer(text, name);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(name + ": integer out of range");
    return static_cast<int>(v);
}

bool to_bool(const std::string& text, const std::string& name) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(name + ": expected true or false, got '" + text + "'");
}

std::vector<int> to_widths(const std::string& text, const std::string& name) {
    std::vector<int> out;
    for (double v : parse_list(text)) {
        if (v != std::floor(v)) throw ConfigError(name + ": widths must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string join(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + io::format_number(values[i]);
    return out;
}

std::string join(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + std::to_string(values[i]);
    return out;
}

std::string join(const Eigen::MatrixXd& m) {
    // Row-major.
    std::vector<double> flat;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    return join(flat);
}

Eigen::VectorXd to_vector(const std::string& text, const std::string& name) {
    const auto values = parse_list(text);
    if (values.empty()) throw ConfigError(name + ": empty list");
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd to_matrix(const std::string& text, Eigen::Index cols, const std::string& name) {
    const auto values = parse_list(text);
    if (cols < 1 || values.empty() || values.size() % static_cast<std::size_t>(cols) != 0)
        throw ConfigError(name + ": expected a row-major matrix with " + std::to_string(cols) + " columns");
    const auto rows = static_cast<Eigen::Index>(values.size()) / cols;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return m;
}

std::string landmarks_text(const std::vector<std::array<double, 2>>& landmarks) {
    std::string out;
    for (std::size_t i = 0; i < landmarks.size(); ++i)
        out += (i ? "; " : "") + io::format_number(landmarks[i][0]) + ", " + io::format_number(landmarks[i][1]);
    return out;
}

std::vector<std::array<double, 2>> parse_landmarks(const std::string& text, const std::string& name) {
    std::vector<std::array<double, 2>> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        const auto xy = parse_list(item);
        if (xy.size() != 2) throw ConfigError(name + ": each landmark needs exactly two coordinates");
        out.push_back({xy[0], xy[1]});
    }
    return out;
}

const char* optimizer_name(training::Optimizer o) {
    return o == training::Optimizer::adam ? "adam" : "sgd";
}

}  // namespace

Document Document::parse(std::istream& in, const std::string& source) {
    Document doc;
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto at = source + ":" + std::to_string(number);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(at + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        if (section.empty()) throw ConfigError(at + ": key outside of any section");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(at + ": empty key");
        if (doc.get(section, key)) throw ConfigError(at + ": duplicate key " + where(section, key));
        doc.set(section, key, trim(line.substr(eq + 1)));
    }
    return doc;
}

Document Document::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

std::optional<std::string> Document::get(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

void Document::set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
}

std::string Document::dump() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, keys] : values_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        for (const auto& [key, value] : keys) out << key << " = " << value << '\n';
    }
    return out.str();
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
        out.push_back(to_double(item, "list"));
    }
    return out;
}

const std::vector<KeySpec>& trainer_schema() {
    static const std::vector<KeySpec> schema = [] {
        const training::TrainerConfig d;
        env::ParticleConfig e = d.env;
        e.finalize();
        const auto n = [](double v) { return io::format_number(v); };
        return std::vector<KeySpec>{
            {"trainer", "gamma", n(d.gamma), "discount factor"},
            {"trainer", "actor_lr", n(d.actor_lr), "actor learning rate"},
            {"trainer", "critic_lr", n(d.critic_lr), "critic learning rate"},
            {"trainer", "dual_lr", n(d.dual_lr), "dual learning rate"},
            {"trainer", "optimizer", optimizer_name(d.optimizer), "adam | sgd"},
            {"trainer", "nstep", std::to_string(d.nstep), "n-step return horizon kappa"},
            {"trainer", "lambda_max", n(d.lambda_max), "dual variable cap"},
            {"trainer", "lambda_init", n(d.lambda_init), "initial dual variable"},
            {"trainer", "episodes", std::to_string(d.episodes), "number of training episodes K"},
            {"trainer", "seed", std::to_string(d.seed), "random seed"},
            {"trainer", "critic", critics::to_string(d.critic), "generic | input_augmented | structured"},
            {"trainer", "target_interval", std::to_string(d.target_interval), "target critic copy interval (episodes)"},
            {"trainer", "batch_episodes", std::to_string(d.batch_episodes), "episodes per update"},
            {"trainer", "entropy_coef", n(d.entropy_coef), "actor entropy bonus (0 disables)"},
            {"trainer", "grad_clip", n(d.grad_clip), "global gradient norm clip (0 disables)"},
            {"trainer", "normalize_rewards", d.normalize_rewards ? "true" : "false", "scale rewards by a running std"},
            {"trainer", "checkpoint_interval", std::to_string(d.checkpoint_interval),
             "checkpoint cadence in episodes (0: initial and final only)"},
            {"trainer", "dual_tolerance", n(d.dual_tolerance), "band for the running mean of the dual signal"},
            {"network", "actor_hidden", join(d.actor_hidden), "actor hidden widths"},
            {"network", "critic_hidden", join(d.critic_hidden), "critic hidden widths"},
            {"network", "adam_beta1", n(d.adam_beta1), "Adam first-moment decay"},
            {"network", "adam_beta2", n(d.adam_beta2), "Adam second-moment decay"},
            {"network", "adam_epsilon", n(d.adam_epsilon), "Adam epsilon"},
            {"penalty", "metric", risk::to_string(d.penalty.metric), "average | chance | cvar"},
            {"penalty", "alpha", join(std::span<const double>(d.penalty.alpha.data(), d.penalty.alpha.size())),
             "tolerance alpha per constraint"},
            {"penalty", "delta", join(std::span<const double>(d.penalty.delta.data(), d.penalty.delta.size())),
             "tolerance delta per constraint"},
            {"penalty", "beta", n(d.penalty.beta), "CVaR risk level"},
            {"env", "agents", std::to_string(e.agents), "number of agents"},
            {"env", "dt", n(e.dt), "time step"},
            {"env", "damping", n(e.damping), "velocity damping per step"},
            {"env", "mass", n(e.mass), "particle mass"},
            {"env", "force", n(e.force), "applied force magnitude"},
            {"env", "sensitivity", n(e.sensitivity), "force sensitivity"},
            {"env", "episode_length", std::to_string(e.episode_length), "episode length T"},
            {"env", "init_low", n(e.init_low), "initial position lower bound"},
            {"env", "init_high", n(e.init_high), "initial position upper bound"},
            {"env", "landmarks", landmarks_text(e.landmarks), "landmark per agent, 'x, y; x, y'"},
            {"env", "xi", join(e.xi), "reward weight per agent"},
            {"env", "constraint", "sum", "sum | constant"},
            {"env", "constraint_constant", n(e.constraint_constant), "value of C in constant mode"},
            {"evaluation", "interval", std::to_string(d.eval_interval), "episodes between evaluations (0 disables)"},
            {"evaluation", "episodes", std::to_string(d.eval_episodes), "rollouts per evaluation"},
            {"evaluation", "alpha", n(d.eval_alpha), "violation threshold for Pr{C >= alpha}"},
            {"evaluation", "beta", n(d.eval_beta), "VaR/CVaR level"},
        };
    }();
    return schema;
}

const std::vector<KeySpec>& policy_eval_schema() {
    static const std::vector<KeySpec> schema = [] {
        const PolicyEvalSettings d;
        const auto n = [](double v) { return io::format_number(v); };
        return std::vector<KeySpec>{
            {"policy_eval", "gamma", n(d.gamma), "discount factor"},
            {"policy_eval", "horizon", std::to_string(d.horizon), "steps per episode"},
            {"policy_eval", "epochs", std::to_string(d.epochs), "training epochs"},
            {"policy_eval", "episodes_per_epoch", std::to_string(d.episodes_per_epoch), "episodes per epoch"},
            {"policy_eval", "eval_episodes", std::to_string(d.eval_episodes), "held-out episodes for MSTDE"},
            {"policy_eval", "learning_rate", n(d.learning_rate), "initial TD step size"},
            {"policy_eval", "rate_decay_epochs", n(d.rate_decay_epochs), "step size / (1 + epoch / this)"},
            {"policy_eval", "averaging_start_epoch", std::to_string(d.averaging_start_epoch),
             "epoch from which iterates are averaged"},
            {"policy_eval", "seed", std::to_string(d.seed), "random seed"},
            {"lq", "a", join(d.lq.a), "dynamics matrix, row-major"},
            {"lq", "b", join(d.lq.b), "input matrix, row-major"},
            {"lq", "gain", join(d.lq.gain), "policy gain K, row-major"},
            {"lq", "noise_std", n(d.lq.noise_std), "process noise std"},
            {"lq", "init_std", n(d.lq.init_std), "initial state std"},
            {"lq", "q", join(d.lq.q), "reward weight Q, row-major"},
            {"lq", "c_lin", join(d.lq.c_lin), "constraint map, row-major (m x n)"},
            {"lq", "lambda_mean", join(std::span<const double>(d.lq.lambda_mean.data(), d.lq.lambda_mean.size())),
             "dual variable mean"},
            {"lq", "lambda_cov", join(d.lq.lambda_cov), "dual variable covariance, row-major"},
        };
    }();
    return schema;
}

const std::vector<KeySpec>& suite_schema() {
    static const std::vector<KeySpec> schema = [] {
        auto s = trainer_schema();
        s.push_back({"suite", "id", "fig6", "fig6 | fig8 | figA"});
        s.push_back({"suite", "seeds", "5", "number of seeds (1..N)"});
        s.push_back({"suite", "test_episodes", "500", "test rollouts for the bound-accuracy table"});
        return s;
    }();
    return schema;
}

void check_keys(const Document& doc, const std::vector<KeySpec>& schema) {
    for (const auto& [section, keys] : doc.sections())
        for (const auto& [key, value] : keys) {
            const bool known = std::any_of(schema.begin(), schema.end(), [&](const KeySpec& s) {
                return s.section == section && s.key == key;
            });
            if (!known) throw ConfigError("unknown config key " + where(section, key));
        }
}

std::string describe(const std::vector<KeySpec>& schema) {
    std::ostringstream out;
    std::string section;
    for (const auto& s : schema) {
        if (s.section != section) {
            section = s.section;
            out << "[" << section << "]\n";
        }
        out << "  " << s.key << " = " << s.default_value << "    # " << s.description << '\n';
    }
    return out.str();
}

training::TrainerConfig trainer_config(const Document& doc) {
    // Suite keys are allowed here so a suite file can also drive a single run.
    check_keys(doc, suite_schema());
    training::TrainerConfig c;
    const auto num = [&](const char* section, const char* key, double& target) {
        if (auto v = doc.get(section, key)) target = to_double(*v, where(section, key));
    };
    const auto integer = [&](const char* section, const char* key, int& target) {
        if (auto v = doc.get(section, key)) target = to_int(*v, where(section, key));
    };
    num("trainer", "gamma", c.gamma);
    num("trainer", "actor_lr", c.actor_lr);
    num("trainer", "critic_lr", c.critic_lr);
    num("trainer", "dual_lr", c.dual_lr);
    if (auto v = doc.get("trainer", "optimizer")) {
        if (*v == "adam") c.optimizer = training::Optimizer::adam;
        else if (*v == "sgd") c.optimizer = training::Optimizer::sgd;
        else throw ConfigError("trainer.optimizer: expected adam or sgd, got '" + *v + "'");
    }
    integer("trainer", "nstep", c.nstep);
    num("trainer", "lambda_max", c.lambda_max);
    num("trainer", "lambda_init", c.lambda_init);
    integer("trainer", "episodes", c.episodes);
    if (auto v = doc.get("trainer", "seed")) {
        const auto s = to_integer(*v, "trainer.seed");
        if (s < 0) throw ConfigError("trainer.seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = doc.get("trainer", "critic")) {
        try {
            c.critic = critics::parse_variant(*v);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("trainer.critic: ") + e.what());
        }
    }
    integer("trainer", "target_interval", c.target_interval);
    integer("trainer", "batch_episodes", c.batch_episodes);
    num("trainer", "entropy_coef", c.entropy_coef);
    num("trainer", "grad_clip", c.grad_clip);
    if (auto v = doc.get("trainer", "normalize_rewards")) c.normalize_rewards = to_bool(*v, "trainer.normalize_rewards");
    integer("trainer", "checkpoint_interval", c.checkpoint_interval);
    num("trainer", "dual_tolerance", c.dual_tolerance);

    if (auto v = doc.get("network", "actor_hidden")) c.actor_hidden = to_widths(*v, "network.actor_hidden");
    if (auto v = doc.get("network", "critic_hidden")) c.critic_hidden = to_widths(*v, "network.critic_hidden");
    num("network", "adam_beta1", c.adam_beta1);
    num("network", "adam_beta2", c.adam_beta2);
    num("network", "adam_epsilon", c.adam_epsilon);

    if (auto v = doc.get("penalty", "metric")) {
        try {
            c.penalty.metric = risk::parse_metric(*v);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("penalty.metric: ") + e.what());
        }
    }
    if (auto v = doc.get("penalty", "alpha")) c.penalty.alpha = to_vector(*v, "penalty.alpha");
    if (auto v = doc.get("penalty", "delta")) c.penalty.delta = to_vector(*v, "penalty.delta");
    num("penalty", "beta", c.penalty.beta);

    integer("env", "agents", c.env.agents);
    num("env", "dt", c.env.dt);
    num("env", "damping", c.env.damping);
    num("env", "mass", c.env.mass);
    num("env", "force", c.env.force);
    num("env", "sensitivity", c.env.sensitivity);
    integer("env", "episode_length", c.env.episode_length);
    num("env", "init_low", c.env.init_low);
    num("env", "init_high", c.env.init_high);
    if (auto v = doc.get("env", "landmarks")) c.env.landmarks = parse_landmarks(*v, "env.landmarks");
    if (auto v = doc.get("env", "xi")) c.env.xi = parse_list(*v);
    if (auto v = doc.get("env", "constraint")) {
        if (*v == "sum") c.env.constraint = env::ConstraintMode::sum;
        else if (*v == "constant") c.env.constraint = env::ConstraintMode::constant;
        else throw ConfigError("env.constraint: expected sum or constant, got '" + *v + "'");
    }
    num("env", "constraint_constant", c.env.constraint_constant);

    integer("evaluation", "interval", c.eval_interval);
    integer("evaluation", "episodes", c.eval_episodes);
    num("evaluation", "alpha", c.eval_alpha);
    num("evaluation", "beta", c.eval_beta);

    c.validate();
    return c;
}

SuiteSettings suite_settings(const Document& doc) {
    SuiteSettings s;
    s.base = trainer_config(doc);
    if (auto v = doc.get("suite", "id")) s.id = *v;
    if (auto v = doc.get("suite", "seeds")) s.seeds = to_int(*v, where("suite", "seeds"));
    if (auto v = doc.get("suite", "test_episodes")) s.test_episodes = to_int(*v, where("suite", "test_episodes"));
    if (s.seeds < 1) throw ConfigError("suite.seeds must be >= 1");
    if (s.test_episodes < 1) throw ConfigError("suite.test_episodes must be >= 1");
    return s;
}

Document to_document(const training::TrainerConfig& c) {
    Document doc;
    const auto n = [](double v) { return io::format_number(v); };
    doc.set("trainer", "gamma", n(c.gamma));
    doc.set("trainer", "actor_lr", n(c.actor_lr));
    doc.set("trainer", "critic_lr", n(c.critic_lr));
    doc.set("trainer", "dual_lr", n(c.dual_lr));
    doc.set("trainer", "optimizer", optimizer_name(c.optimizer));
    doc.set("trainer", "nstep", std::to_string(c.nstep));
    doc.set("trainer", "lambda_max", n(c.lambda_max));
    doc.set("trainer", "lambda_init", n(c.lambda_init));
    doc.set("trainer", "episodes", std::to_string(c.episodes));
    doc.set("trainer", "seed", std::to_string(c.seed));
    doc.set("trainer", "critic", critics::to_string(c.critic));
    doc.set("trainer", "target_interval", std::to_string(c.target_interval));
    doc.set("trainer", "batch_episodes", std::to_string(c.batch_episodes));
    doc.set("trainer", "entropy_coef", n(c.entropy_coef));
    doc.set("trainer", "grad_clip", n(c.grad_clip));
    doc.set("trainer", "normalize_rewards", c.normalize_rewards ? "true" : "false");
    doc.set("trainer", "checkpoint_interval", std::to_string(c.checkpoint_interval));
    doc.set("trainer", "dual_tolerance", n(c.dual_tolerance));
    doc.set("network", "actor_hidden", join(c.actor_hidden));
    doc.set("network", "critic_hidden", join(c.critic_hidden));
    doc.set("network", "adam_beta1", n(c.adam_beta1));
    doc.set("network", "adam_beta2", n(c.adam_beta2));
    doc.set("network", "adam_epsilon", n(c.adam_epsilon));
    doc.set("penalty", "metric", risk::to_string(c.penalty.metric));
    doc.set("penalty", "alpha", join(std::span<const double>(c.penalty.alpha.data(), c.penalty.alpha.size())));
    doc.set("penalty", "delta", join(std::span<const double>(c.penalty.delta.data(), c.penalty.delta.size())));
    doc.set("penalty", "beta", n(c.penalty.beta));
    env::ParticleConfig e = c.env;
    e.finalize();
    doc.set("env", "agents", std::to_string(e.agents));
    doc.set("env", "dt", n(e.dt));
    doc.set("env", "damping", n(e.damping));
    doc.set("env", "mass", n(e.mass));
    doc.set("env", "force", n(e.force));
    doc.set("env", "sensitivity", n(e.sensitivity));
    doc.set("env", "episode_length", std::to_string(e.episode_length));
    doc.set("env", "init_low", n(e.init_low));
    doc.set("env", "init_high", n(e.init_high));
    doc.set("env", "landmarks", landmarks_text(e.landmarks));
    doc.set("env", "xi", join(e.xi));
    doc.set("env", "constraint", e.constraint == env::ConstraintMode::sum ? "sum" : "constant");
    doc.set("env", "constraint_constant", n(e.constraint_constant));
    doc.set("evaluation", "interval", std::to_string(c.eval_interval));
    doc.set("evaluation", "episodes", std::to_string(c.eval_episodes));
    doc.set("evaluation", "alpha", n(c.eval_alpha));
    doc.set("evaluation", "beta", n(c.eval_beta));
    return doc;
}

PolicyEvalSettings policy_eval_settings(const Document& doc) {
    check_keys(doc, policy_eval_schema());
    PolicyEvalSettings s;
    const auto num = [&](const char* section, const char* key, double& target) {
        if (auto v = doc.get(section, key)) target = to_double(*v, where(section, key));
    };
    const auto integer = [&](const char* key, int& target) {
        if (auto v = doc.get("policy_eval", key)) target = to_int(*v, where("policy_eval", key));
    };
    num("policy_eval", "gamma", s.gamma);
    integer("horizon", s.horizon);
    integer("epochs", s.epochs);
    integer("episodes_per_epoch", s.episodes_per_epoch);
    integer("eval_episodes", s.eval_episodes);
    num("policy_eval", "learning_rate", s.learning_rate);
    num("policy_eval", "rate_decay_epochs", s.rate_decay_epochs);
    integer("averaging_start_epoch", s.averaging_start_epoch);
    if (auto v = doc.get("policy_eval", "seed")) {
        const auto seed = to_integer(*v, "policy_eval.seed");
        if (seed < 0) throw ConfigError("policy_eval.seed must be >= 0");
        s.seed = static_cast<std::uint64_t>(seed);
    }

    auto& lq = s.lq;
    if (auto v = doc.get("lq", "a")) {
        const auto values = parse_list(*v);
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
        lq.a = to_matrix(*v, n, "lq.a");
        if (lq.a.rows() != lq.a.cols()) throw ConfigError("lq.a must be square");
    }
    const Eigen::Index n = lq.a.rows();
    if (auto v = doc.get("lq", "gain")) lq.gain = to_matrix(*v, n, "lq.gain");
    if (auto v = doc.get("lq", "b")) lq.b = to_matrix(*v, lq.gain.rows(), "lq.b");
    num("lq", "noise_std", lq.noise_std);
    num("lq", "init_std", lq.init_std);
    if (auto v = doc.get("lq", "q")) lq.q = to_matrix(*v, n, "lq.q");
    if (auto v = doc.get("lq", "c_lin")) lq.c_lin = to_matrix(*v, n, "lq.c_lin");
    if (auto v = doc.get("lq", "lambda_mean")) lq.lambda_mean = to_vector(*v, "lq.lambda_mean");
    if (auto v = doc.get("lq", "lambda_cov")) {
        const auto m = lq.lambda_mean.size();
        lq.lambda_cov = to_matrix(*v, m, "lq.lambda_cov");
    }

    if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw ConfigError("policy_eval.gamma must lie in (0, 1)");
    if (s.horizon < 1 || s.epochs < 1 || s.episodes_per_epoch < 1 || s.eval_episodes < 2)
        throw ConfigError("policy_eval: horizon, epochs and episodes_per_epoch must be >= 1, eval_episodes >= 2");
    if (!(s.learning_rate > 0.0) || !(s.rate_decay_epochs > 0.0))
        throw ConfigError("policy_eval: learning_rate and rate_decay_epochs must be positive");
    if (s.averaging_start_epoch < 0) throw ConfigError("policy_eval.averaging_start_epoch must be >= 0");
    if (lq.q.rows() != n || lq.q.cols() != n || lq.c_lin.cols() != n || lq.gain.cols() != n ||
        lq.b.rows() != n || lq.b.cols() != lq.gain.rows())
        throw ConfigError("lq: matrix shapes are inconsistent with lq.a");
    if (lq.lambda_mean.size() != lq.c_lin.rows() || lq.lambda_cov.rows() != lq.c_lin.rows() ||
        lq.lambda_cov.cols() != lq.c_lin.rows())
        throw ConfigError("lq: lambda_mean/lambda_cov must match the number of constraint rows");
    if (!(lq.noise_std >= 0.0) || !(lq.init_std >= 0.0)) throw ConfigError("lq: standard deviations must be >= 0");
    return s;
}

Document to_document(const PolicyEvalSettings& s) {
    Document doc;
    const auto n = [](double v) { return io::format_number(v); };
    doc.set("policy_eval", "gamma", n(s.gamma));
    doc.set("policy_eval", "horizon", std::to_string(s.horizon));
    doc.set("policy_eval", "epochs", std::to_string(s.epochs));
    doc.set("policy_eval", "episodes_per_epoch", std::to_string(s.episodes_per_epoch));
    doc.set("policy_eval", "eval_episodes", std::to_string(s.eval_episodes));
    doc.set("policy_eval", "learning_rate", n(s.learning_rate));
    doc.set("policy_eval", "rate_decay_epochs", n(s.rate_decay_epochs));
    doc.set("policy_eval", "averaging_start_epoch", std::to_string(s.averaging_start_epoch));
    doc.set("policy_eval", "seed", std::to_string(s.seed));
    doc.set("lq", "a", join(s.lq.a));
    doc.set("lq", "b", join(s.lq.b));
    doc.set("lq", "gain", join(s.lq.gain));
    doc.set("lq", "noise_std", n(s.lq.noise_std));
    doc.set("lq", "init_std", n(s.lq.init_std));
    doc.set("lq", "q", join(s.lq.q));
    doc.set("lq", "c_lin", join(s.lq.c_lin));
    doc.set("lq", "lambda_mean", join(std::span<const double>(s.lq.lambda_mean.data(), s.lq.lambda_mean.size())));
    doc.set("lq", "lambda_cov", join(s.lq.lambda_cov));
    return doc;
}

}  // namespace cmaa2c::config
