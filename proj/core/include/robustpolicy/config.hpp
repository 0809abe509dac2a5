#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robustpolicy/net.hpp"

namespace robustpolicy {

enum class Objective { value, regret };
enum class Estimator { efficient, plugin, ipw, dr };

std::string to_string(Objective o);
std::string to_string(Estimator e);
Objective objective_from_string(const std::string& s);    // throws ConfigError
Estimator estimator_from_string(const std::string& s);    // throws ConfigError

// Nuisance learner settings. Empty hidden list = linear model (fast,
// deterministic tests); otherwise a ReLU MLP.
struct LearnerConfig {
    std::vector<int> hidden{64, 64, 32};
    double lr = 1e-3;
    int epochs = 300;
    int patience = 10;
    int batch = 64;

    void validate() const;
};

struct PolicyConfig {
    bool mlp = false;                       // default: linear-softmax scores
    std::vector<int> hidden{64, 64, 32};
    InitScheme init = InitScheme::TinyUniform;

    void validate() const;
};

// Everything a training run needs. batch_size = 0 keeps the default
// deterministic full-batch descent; > 0 switches the policy loop to seeded
// mini-batch epochs.
struct RunConfig {
    std::uint64_t seed = 0;
    double rho = 0.5;          // nuisance-fold fraction, in (0,1)
    double lambda = 1e-3;      // policy learning rate
    int iters = 300;           // K
    double gamma = 1.0;
    Objective objective = Objective::value;
    PolicyConfig policy;
    LearnerConfig nuisance;
    int batch_size = 0;
    int snapshot_every = 0;    // 0 = record no parameter snapshots
    std::string out_path;

    void validate() const;     // throws ConfigError
};

// Flat `key = value` file with '#' comments; used by the CLI with
// flag > file > default precedence.
std::map<std::string, std::string> parse_config_file(const std::string& path);

std::vector<int> parse_int_list(const std::string& csv);  // "64,64,32"

}  // namespace robustpolicy
