#include "robustpolicy/config.hpp"

#include <fstream>

#include "robustpolicy/errors.hpp"

namespace robustpolicy {

std::string to_string(Objective o) { return o == Objective::value ? "value" : "regret"; }

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::efficient: return "efficient";
        case Estimator::plugin: return "plugin";
        case Estimator::ipw: return "ipw";
        case Estimator::dr: return "dr";
    }
    return "?";
}

Objective objective_from_string(const std::string& s) {
    if (s == "value") return Objective::value;
    if (s == "regret") return Objective::regret;
    throw ConfigError("unknown objective '" + s + "' (expected value|regret)");
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "efficient") return Estimator::efficient;
    if (s == "plugin") return Estimator::plugin;
    if (s == "ipw") return Estimator::ipw;
    if (s == "dr") return Estimator::dr;
    throw ConfigError("unknown estimator '" + s + "' (expected efficient|plugin|ipw|dr)");
}

void LearnerConfig::validate() const {
    for (int h : hidden)
        if (h < 1) throw ConfigError("nuisance hidden sizes must be positive");
    if (!(lr > 0.0)) throw ConfigError("nuisance learning rate must be > 0");
    if (epochs < 1) throw ConfigError("nuisance epochs must be >= 1");
    if (patience < 0) throw ConfigError("nuisance patience must be >= 0");
    if (batch < 1) throw ConfigError("nuisance batch must be >= 1");
}

void PolicyConfig::validate() const {
    if (mlp) {
        if (hidden.empty()) throw ConfigError("mlp policy needs at least one hidden layer");
        for (int h : hidden)
            if (h < 1) throw ConfigError("policy hidden sizes must be positive");
    }
}

void RunConfig::validate() const {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0,1)");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (iters < 0) throw ConfigError("iteration count must be >= 0");
    if (!(gamma >= 1.0)) throw ConfigError("gamma must be >= 1");
    if (batch_size < 0) throw ConfigError("batch size must be >= 0");
    if (snapshot_every < 0) throw ConfigError("snapshot cadence must be >= 0");
    policy.validate();
    nuisance.validate();
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
        out[key] = value;
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t pos = csv.find(',', start);
        std::string tok = (pos == std::string::npos) ? csv.substr(start) : csv.substr(start, pos - start);
        tok = std::string(tok.begin(), tok.end());
        if (!tok.empty()) {
            try {
                out.push_back(std::stoi(tok));
            } catch (...) {
                throw ConfigError("bad integer '" + tok + "' in list '" + csv + "'");
            }
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace robustpolicy
