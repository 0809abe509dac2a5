// Command-line front end: simulate confounded data, train and evaluate
// policies under worst-case sensitivity bounds, sweep experiment grids,
// calibrate the sensitivity level, and emit finite-sample certificates.

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robustpolicy/bounds.hpp"
#include "robustpolicy/config.hpp"
#include "robustpolicy/dataset.hpp"
#include "robustpolicy/dgp.hpp"
#include "robustpolicy/errors.hpp"
#include "robustpolicy/learn.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/oracle.hpp"
#include "robustpolicy/parallel.hpp"
#include "robustpolicy/policy.hpp"
#include "robustpolicy/rng.hpp"
#include "robustpolicy/sensitivity.hpp"

namespace rp = robustpolicy;

namespace {

struct NuisanceFlags {
    std::string hidden = "64,64,32";
    double lr = 1e-3;
    int epochs = 300;
    int patience = 10;
    int batch = 64;

    rp::LearnerConfig to_config() const {
        rp::LearnerConfig cfg;
        cfg.hidden = rp::parse_int_list(hidden);
        cfg.lr = lr;
        cfg.epochs = epochs;
        cfg.patience = patience;
        cfg.batch = batch;
        cfg.validate();
        return cfg;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--nuisance-hidden", hidden,
                        "hidden sizes of the nuisance nets, comma separated; empty = linear")
            ->capture_default_str();
        cmd->add_option("--nuisance-lr", lr, "nuisance learning rate")->capture_default_str();
        cmd->add_option("--nuisance-epochs", epochs, "max nuisance epochs")->capture_default_str();
        cmd->add_option("--nuisance-patience", patience, "early-stopping patience (epochs)")
            ->capture_default_str();
        cmd->add_option("--nuisance-batch", batch, "nuisance mini-batch size")
            ->capture_default_str();
    }
};

struct PolicyFlags {
    bool mlp = false;
    std::string hidden = "64,64,32";
    std::string init = "tiny";

    rp::PolicyConfig to_config() const {
        rp::PolicyConfig cfg;
        cfg.mlp = mlp;
        cfg.hidden = rp::parse_int_list(hidden);
        if (init == "tiny")
            cfg.init = rp::InitScheme::TinyUniform;
        else if (init == "fanin")
            cfg.init = rp::InitScheme::FanInUniform;
        else if (init == "kink-grid")
            cfg.init = rp::InitScheme::KinkGrid;
        else
            throw rp::ConfigError("unknown policy init '" + init + "' (tiny, fanin, kink-grid)");
        cfg.validate();
        return cfg;
    }

    void attach(CLI::App* cmd) {
        cmd->add_flag("--policy-mlp", mlp, "score network is an MLP instead of linear");
        cmd->add_option("--policy-hidden", hidden, "hidden sizes of the MLP policy")
            ->capture_default_str();
        cmd->add_option("--policy-init", init, "policy init: tiny, fanin, or kink-grid")
            ->capture_default_str();
    }
};

rp::BaselinePolicy load_baseline(const std::string& spec, int d_a) {
    if (spec.empty() || spec == "uniform") return rp::BaselinePolicy::uniform(d_a);
    return rp::BaselinePolicy::frozen(rp::SoftmaxPolicy::load(spec));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw rp::DataError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw rp::DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    double gamma_star = 1.0;
    int n = 1000;
    std::uint64_t seed = 0;
    std::string out;
    bool debug = false;
};

void run_simulate(const SimulateArgs& args) {
    rp::SyntheticSpec spec;
    spec.gamma_star = args.gamma_star;
    spec.n = args.n;
    spec.seed = args.seed;
    const rp::SyntheticData sd = rp::generate(spec);
    if (args.debug)
        rp::save_debug_csv(sd, args.out);
    else
        rp::save_csv(sd.data, args.out);
    std::cout << "wrote " << args.out << " (" << sd.data.n() << " rows)\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data_path;
    std::string out;
    std::string trace_path;
    std::string baseline = "uniform";
    std::string estimator = "efficient";
    std::string objective = "value";
    int arms = 2;
    std::uint64_t seed = 0;
    double rho = 0.5;
    double lambda = 1e-3;
    int iters = 300;
    double gamma = 1.0;
    int batch_size = 0;
    NuisanceFlags nuisance;
    PolicyFlags policy;
};

void run_train(const TrainArgs& args) {
    const rp::Dataset data = rp::load_csv(args.data_path, args.arms);
    rp::RunConfig cfg;
    cfg.seed = args.seed;
    cfg.rho = args.rho;
    cfg.lambda = args.lambda;
    cfg.iters = args.iters;
    cfg.gamma = args.gamma;
    cfg.objective = rp::objective_from_string(args.objective);
    cfg.policy = args.policy.to_config();
    cfg.nuisance = args.nuisance.to_config();
    cfg.batch_size = args.batch_size;
    cfg.out_path = args.out;

    const rp::Estimator kind = rp::estimator_from_string(args.estimator);
    const rp::BaselinePolicy baseline = load_baseline(args.baseline, data.d_a);
    const rp::TrainResult res = rp::train(cfg, data, kind, &baseline);

    if (!args.out.empty()) res.policy.save(args.out);
    if (!args.trace_path.empty()) write_text_file(args.trace_path, res.trace.to_csv());

    std::cout << res.fit_report.to_text();
    std::cout << "iterations=" << res.trace.objective.size() << '\n';
    if (!res.trace.objective.empty())
        std::cout << "final_objective=" << rp::format_double(res.trace.objective.back()) << '\n';
    if (!args.out.empty()) std::cout << "policy=" << args.out << '\n';
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string data_path;
    std::string policy_path;
    std::string baseline = "uniform";
    std::string estimator = "efficient";
    std::string objective = "value";
    std::string side = "upper";
    int arms = 2;
    double gamma = 1.0;
    double rho = 0.5;
    std::uint64_t seed = 0;
    bool ground_truth = false;
    NuisanceFlags nuisance;
};

rp::Side side_from_string(const std::string& s) {
    if (s == "upper") return rp::Side::upper;
    if (s == "lower") return rp::Side::lower;
    throw rp::ConfigError("unknown side '" + s + "' (upper or lower)");
}

void run_evaluate(const EvaluateArgs& args) {
    const rp::Dataset data = rp::load_csv(args.data_path, args.arms);
    const rp::SensitivitySpec spec(args.gamma);
    // Nuisances are fitted on fold 1; the policy is scored on fold 2.
    const auto [fold1, fold2] = rp::split(data, args.rho, rp::derive_seed(args.seed, "split"));
    auto [nuis, fit_report] = rp::assemble(fold1, spec, args.nuisance.to_config(),
                                           rp::derive_seed(args.seed, "nuisance"));

    const rp::SoftmaxPolicy policy = rp::SoftmaxPolicy::load(args.policy_path);
    if (policy.d_x() != data.d_x() || policy.d_a() != data.d_a)
        throw rp::DataError("policy dimensions do not match the dataset");

    const rp::Estimator kind = rp::estimator_from_string(args.estimator);
    const rp::Objective objective = rp::objective_from_string(args.objective);
    const rp::BaselinePolicy baseline = load_baseline(args.baseline, data.d_a);
    const Eigen::MatrixXd pi = policy.probs_batch(fold2.x);
    const rp::BoundReport report = rp::evaluate_policy(
        *nuis, pi, fold2, spec, kind, objective, &baseline, side_from_string(args.side));

    std::string header = rp::BoundReport::csv_header();
    std::string row = report.csv_row();
    if (args.ground_truth) {
        if (data.d_x() != 1)
            throw rp::ConfigError(
                "--ground-truth is defined for the scalar-covariate synthetic process");
        const double tv = rp::true_value(policy);
        const double tr = tv - rp::true_value(baseline);
        header += ",true_value,true_regret";
        row += ',' + rp::format_double(tv) + ',' + rp::format_double(tr);
    }
    std::cout << header << '\n' << row << '\n';
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
    std::string experiment = "sweep";
    std::vector<double> gamma_star{1.0};
    std::vector<double> gamma;  // empty: use gamma_star pairwise
    std::vector<int> n_values{8000};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::string> estimators{"efficient", "dr"};
    std::string objective = "regret";
    std::string baseline = "uniform";
    std::string out_dir = ".";
    double rho = 0.5;
    double lambda = 1e-3;
    int iters = 300;
    int batch_size = 0;
    NuisanceFlags nuisance;
    PolicyFlags policy;
};

struct SweepCell {
    double gamma_star = 1.0;
    double gamma = 1.0;
    int n = 0;
    std::uint64_t seed = 0;
};

struct SweepTaskOutput {
    std::vector<std::string> rows;      // results.csv lines
    std::vector<std::string> failures;  // failures.csv lines
};

void run_sweep(const SweepArgs& args) {
    const rp::Objective objective = rp::objective_from_string(args.objective);
    std::vector<rp::Estimator> kinds;
    for (const std::string& e : args.estimators) kinds.push_back(rp::estimator_from_string(e));
    if (kinds.empty()) throw rp::ConfigError("sweep needs at least one estimator");
    if (args.seeds.empty()) throw rp::ConfigError("sweep needs at least one seed");

    std::vector<SweepCell> cells;
    for (const double gs : args.gamma_star) {
        const std::vector<double> gammas = args.gamma.empty() ? std::vector<double>{gs} : args.gamma;
        for (const double g : gammas)
            for (const int n : args.n_values)
                for (const std::uint64_t s : args.seeds) cells.push_back(SweepCell{gs, g, n, s});
    }

    const rp::PolicyConfig policy_cfg = args.policy.to_config();
    const rp::LearnerConfig learner_cfg = args.nuisance.to_config();

    std::vector<SweepTaskOutput> outputs(cells.size());
    rp::parallel_for(static_cast<int>(cells.size()), [&](int t) {
        const SweepCell& cell = cells[t];
        SweepTaskOutput& out = outputs[t];
        const std::string prefix = args.experiment + ',' + std::to_string(cell.seed) + ',' +
                                   rp::format_double(cell.gamma_star) + ',' +
                                   rp::format_double(cell.gamma) + ',' + std::to_string(cell.n);
        auto fail_all = [&](const std::string& what) {
            for (const std::string& e : args.estimators)
                out.failures.push_back(prefix + ',' + e + ',' + '"' + what + '"');
        };
        try {
            rp::SyntheticSpec sim;
            sim.gamma_star = cell.gamma_star;
            sim.n = cell.n;
            sim.seed = rp::derive_seed(cell.seed, "data");
            const rp::SyntheticData sd = rp::generate(sim);

            rp::RunConfig cfg;
            cfg.seed = cell.seed;
            cfg.rho = args.rho;
            cfg.lambda = args.lambda;
            cfg.iters = args.iters;
            cfg.gamma = cell.gamma;
            cfg.objective = objective;
            cfg.policy = policy_cfg;
            cfg.nuisance = learner_cfg;
            cfg.batch_size = args.batch_size;

            const rp::SensitivitySpec spec(cell.gamma);
            const auto [fold1, fold2] =
                rp::split(sd.data, cfg.rho, rp::derive_seed(cfg.seed, "split"));
            // One nuisance fit per cell, shared by every estimator: fit seeds
            // never depend on the estimator, so comparisons are paired.
            auto [nuis, fit_report] =
                rp::assemble(fold1, spec, cfg.nuisance, rp::derive_seed(cfg.seed, "nuisance"));
            const rp::BaselinePolicy baseline = load_baseline(args.baseline, sd.data.d_a);

            for (std::size_t k = 0; k < kinds.size(); ++k) {
                try {
                    const rp::TrainResult res =
                        rp::train(cfg, sd.data, kinds[k], &baseline, nuis);
                    const Eigen::MatrixXd pi = res.policy.probs_batch(fold2.x);
                    const rp::BoundReport rep = rp::evaluate_policy(
                        *nuis, pi, fold2, spec, kinds[k], objective, &baseline);
                    const double tv = rp::true_value(res.policy);
                    const double tr = tv - rp::true_value(baseline);
                    out.rows.push_back(prefix + ',' + args.estimators[k] + ',' +
                                       rp::to_string(objective) + ',' +
                                       rp::format_double(rep.estimate) + ',' +
                                       rp::format_double(rep.se) + ',' + rp::format_double(tv) +
                                       ',' + rp::format_double(tr));
                } catch (const std::exception& e) {
                    out.failures.push_back(prefix + ',' + args.estimators[k] + ',' + '"' +
                                           e.what() + '"');
                }
            }
        } catch (const std::exception& e) {
            fail_all(e.what());
        }
    });

    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const std::string results_path = (fs::path(args.out_dir) / "results.csv").string();
    const std::string summary_path = (fs::path(args.out_dir) / "summary.csv").string();
    const std::string failures_path = (fs::path(args.out_dir) / "failures.csv").string();

    std::ostringstream results;
    results << "experiment,seed,gamma_star,gamma,n,estimator,objective,estimate,se,true_value,"
               "true_regret\n";
    for (const SweepTaskOutput& out : outputs)
        for (const std::string& row : out.rows) results << row << '\n';
    write_text_file(results_path, results.str());

    std::ostringstream failures;
    failures << "experiment,seed,gamma_star,gamma,n,estimator,error\n";
    int failure_count = 0;
    for (const SweepTaskOutput& out : outputs)
        for (const std::string& row : out.failures) {
            failures << row << '\n';
            ++failure_count;
        }
    write_text_file(failures_path, failures.str());

    // Per-cell summary: mean and sample sd over seeds, recomputable from the
    // results file.
    struct Agg {
        std::vector<double> estimate, tv, tr;
    };
    std::vector<std::string> cell_order;
    std::map<std::string, Agg> agg;
    for (std::size_t t = 0; t < cells.size(); ++t) {
        const SweepCell& cell = cells[t];
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            // Row order within a task mirrors the estimator list.
            const std::string key = rp::format_double(cell.gamma_star) + ',' +
                                    rp::format_double(cell.gamma) + ',' + std::to_string(cell.n) +
                                    ',' + args.estimators[k];
            if (!agg.count(key)) cell_order.push_back(key);
            agg[key];  // ensure the cell exists even if every seed failed
        }
        for (const std::string& row : outputs[t].rows) {
            // experiment,seed,gs,g,n,estimator,objective,estimate,se,tv,tr
            std::vector<std::string> fields;
            std::stringstream ss(row);
            std::string f;
            while (std::getline(ss, f, ',')) fields.push_back(f);
            const std::string key = fields[2] + ',' + fields[3] + ',' + fields[4] + ',' + fields[5];
            Agg& a = agg[key];
            a.estimate.push_back(rp::parse_double(fields[7]));
            a.tv.push_back(rp::parse_double(fields[9]));
            a.tr.push_back(rp::parse_double(fields[10]));
        }
    }
    auto mean_sd = [](const std::vector<double>& v) {
        if (v.empty()) return std::pair<double, double>{0.0, 0.0};
        double m = 0.0;
        for (const double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s2 = 0.0;
        for (const double x : v) s2 += (x - m) * (x - m);
        const double sd = v.size() > 1 ? std::sqrt(s2 / (static_cast<double>(v.size()) - 1.0)) : 0.0;
        return std::pair<double, double>{m, sd};
    };
    std::ostringstream summary;
    summary << "experiment,gamma_star,gamma,n,estimator,objective,seeds,mean_estimate,sd_estimate,"
               "mean_true_value,sd_true_value,mean_true_regret,sd_true_regret\n";
    for (const std::string& key : cell_order) {
        const Agg& a = agg[key];
        const auto [me, se] = mean_sd(a.estimate);
        const auto [mv, sv] = mean_sd(a.tv);
        const auto [mr, sr] = mean_sd(a.tr);
        summary << args.experiment << ',' << key << ',' << args.objective << ','
                << a.estimate.size() << ',' << rp::format_double(me) << ','
                << rp::format_double(se) << ',' << rp::format_double(mv) << ','
                << rp::format_double(sv) << ',' << rp::format_double(mr) << ','
                << rp::format_double(sr) << '\n';
    }
    write_text_file(summary_path, summary.str());

    std::cout << "wrote " << results_path << ", " << summary_path << ", " << failures_path << '\n';
    if (failure_count > 0) std::cout << "partial failures: " << failure_count << '\n';
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
    std::string data_path;
    std::string policy_path;
    std::string baseline;  // empty: calibrate the value interval
    std::string trace_path;
    int arms = 2;
    double gamma_max = 100.0;
    double tol = 1e-3;
    double rho = 0.5;
    std::uint64_t seed = 0;
    NuisanceFlags nuisance;
};

void run_calibrate(const CalibrateArgs& args) {
    const rp::Dataset data = rp::load_csv(args.data_path, args.arms);
    const auto [fold1, fold2] = rp::split(data, args.rho, rp::derive_seed(args.seed, "split"));
    const rp::LearnerConfig learner = args.nuisance.to_config();

    const rp::SoftmaxPolicy policy = rp::SoftmaxPolicy::load(args.policy_path);
    if (policy.d_x() != data.d_x() || policy.d_a() != data.d_a)
        throw rp::DataError("policy dimensions do not match the dataset");
    const Eigen::MatrixXd pi = policy.probs_batch(fold2.x);
    const bool regret_mode = !args.baseline.empty();
    Eigen::MatrixXd pi0;
    if (regret_mode) pi0 = load_baseline(args.baseline, data.d_a).probs_batch(fold2.x);

    // The propensity model does not depend on the probed level: fit it once,
    // refit only the level-dependent models per probe (seeded by the level's
    // bit pattern, so probes are reproducible independent of probe order).
    rp::FeedForwardNet prop_net;
    bool have_prop = false;
    auto interval_fn = [&](double g) -> std::pair<double, double> {
        const rp::SensitivitySpec sp(g);
        const std::uint64_t probe_seed = rp::derive_seed(rp::derive_seed(args.seed, "nuisance"),
                                                         "probe", std::bit_cast<std::uint64_t>(g));
        auto [nuis, report] =
            rp::assemble(fold1, sp, learner, probe_seed, have_prop ? &prop_net : nullptr);
        if (!have_prop) {
            prop_net = nuis->propensity_net();
            have_prop = true;
        }
        if (regret_mode) {
            const double up = rp::regret_upper(*nuis, pi, pi0, fold2, sp, rp::Estimator::efficient)
                                  .estimate;
            const double lo = -rp::regret_upper(*nuis, pi0, pi, fold2, sp, rp::Estimator::efficient)
                                   .estimate;
            return {lo, up};
        }
        const double lo =
            rp::value_bound(*nuis, pi, fold2, sp, rp::Side::lower, rp::Estimator::efficient)
                .estimate;
        const double up =
            rp::value_bound(*nuis, pi, fold2, sp, rp::Side::upper, rp::Estimator::efficient)
                .estimate;
        return {lo, up};
    };

    const rp::CalibrationResult res = rp::calibrate_gamma(interval_fn, args.gamma_max, args.tol);

    if (!args.trace_path.empty()) {
        std::ostringstream trace;
        trace << "gamma,lower,upper\n";
        for (const rp::CalibrationProbe& p : res.trace)
            trace << rp::format_double(p.gamma) << ',' << rp::format_double(p.lower) << ','
                  << rp::format_double(p.upper) << '\n';
        write_text_file(args.trace_path, trace.str());
    }
    std::cout << "gamma=" << rp::format_double(res.gamma) << '\n'
              << "explained=" << (res.explained ? "true" : "false") << '\n'
              << "message=" << res.message << '\n'
              << "probes=" << res.trace.size() << '\n';
}

// ---------------------------------------------------------------------------
// certify

struct CertifyArgs {
    double estimate = 0.0;
    double c_y = 1.0;
    double gamma = 1.0;
    double delta = 0.05;
    int n = 0;
    double r_n = -1.0;  // negative: use the n^{-1/2} surrogate
    std::string mode = "regret";
};

void run_certify(const CertifyArgs& args) {
    const rp::Certificate cert = rp::certificate(args.gamma, args.c_y, args.delta, args.n,
                                                 args.r_n, rp::objective_from_string(args.mode));
    std::cout << cert.text();
    std::cout << "estimate=" << rp::format_double(args.estimate) << '\n';
    std::cout << "certified=" << (args.estimate + cert.slack < 0.0 ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// config files

// CLI11 reads --config files only while finishing the root command, and this
// tool routes everything through subcommand callbacks, so a --config value
// given to a subcommand would otherwise be stored and never applied.  When a
// config file is pending, feed it back through the subcommand's own parser;
// options given on the command line keep priority because file values only
// fill options that are still unset.  The nested parse re-enters the
// subcommand callback once with the merged settings, so this returns true to
// tell the caller to skip the command body (the nested run already did it).
bool reparse_with_config(CLI::App& cmd) {
    CLI::Option* copt = cmd.get_config_ptr();
    if (copt == nullptr || copt->count() == 0) return false;
    const auto path = copt->as<std::string>();
    copt->clear();  // consume the pending file so the nested run stops here
    std::ifstream stream(path);
    if (!stream) throw rp::ConfigError("cannot open config file: " + path);
    cmd.parse_from_stream(stream);
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Confounding-robust policy learning: sharp sensitivity bounds on policy value, "
        "one-step corrected estimation, and worst-case policy training."};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "draw a confounded synthetic dataset");
    c_sim->add_option("--gamma-star", sim.gamma_star, "confounding strength of the process (>= 1)")
        ->capture_default_str();
    c_sim->add_option("--n", sim.n, "sample size")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    c_sim->add_option("--out", sim.out, "output CSV path")->required();
    c_sim->add_flag("--debug", sim.debug, "append hidden columns u,y0,y1");
    c_sim->set_config("--config");
    c_sim->callback([&]() { if (!reparse_with_config(*c_sim)) run_simulate(sim); });

    TrainArgs tr;
    CLI::App* c_tr = app.add_subcommand("train", "train a policy on the worst-case objective");
    c_tr->add_option("--data", tr.data_path, "input CSV (header y,a,x0,...)")->required();
    c_tr->add_option("--arms", tr.arms, "number of arms")->capture_default_str();
    c_tr->add_option("--gamma", tr.gamma, "sensitivity level")->capture_default_str();
    c_tr->add_option("--estimator", tr.estimator, "efficient, plugin, ipw, or dr")
        ->capture_default_str();
    c_tr->add_option("--objective", tr.objective, "value or regret")->capture_default_str();
    c_tr->add_option("--baseline", tr.baseline, "'uniform' or a saved policy file (regret mode)")
        ->capture_default_str();
    c_tr->add_option("--out", tr.out, "write the trained policy here");
    c_tr->add_option("--trace", tr.trace_path, "write the iteration trace CSV here");
    c_tr->add_option("--seed", tr.seed, "run seed (fold split, fits, policy init)")
        ->capture_default_str();
    c_tr->add_option("--rho", tr.rho, "nuisance-fold fraction in (0,1)")->capture_default_str();
    c_tr->add_option("--lambda", tr.lambda, "policy learning rate")->capture_default_str();
    c_tr->add_option("--iters", tr.iters, "policy gradient steps")->capture_default_str();
    c_tr->add_option("--batch-size", tr.batch_size,
                     "0 = deterministic full-batch descent; > 0 = seeded mini-batch epochs")
        ->capture_default_str();
    tr.nuisance.attach(c_tr);
    tr.policy.attach(c_tr);
    c_tr->set_config("--config");
    c_tr->callback([&]() { if (!reparse_with_config(*c_tr)) run_train(tr); });

    EvaluateArgs ev;
    CLI::App* c_ev = app.add_subcommand(
        "evaluate", "fit nuisances on fold 1 and score a saved policy on fold 2");
    c_ev->add_option("--data", ev.data_path, "input CSV")->required();
    c_ev->add_option("--policy", ev.policy_path, "saved policy file")->required();
    c_ev->add_option("--arms", ev.arms, "number of arms")->capture_default_str();
    c_ev->add_option("--gamma", ev.gamma, "sensitivity level")->capture_default_str();
    c_ev->add_option("--estimator", ev.estimator, "efficient, plugin, ipw, or dr")
        ->capture_default_str();
    c_ev->add_option("--objective", ev.objective, "value or regret")->capture_default_str();
    c_ev->add_option("--side", ev.side, "upper or lower (value bounds)")->capture_default_str();
    c_ev->add_option("--baseline", ev.baseline, "'uniform' or a saved policy file")
        ->capture_default_str();
    c_ev->add_flag("--ground-truth", ev.ground_truth,
                   "append true_value,true_regret (synthetic scalar-covariate process)");
    c_ev->add_option("--rho", ev.rho, "nuisance-fold fraction")->capture_default_str();
    c_ev->add_option("--seed", ev.seed, "seed for the split and the fits")->capture_default_str();
    ev.nuisance.attach(c_ev);
    c_ev->set_config("--config");
    c_ev->callback([&]() { if (!reparse_with_config(*c_ev)) run_evaluate(ev); });

    SweepArgs sw;
    CLI::App* c_sw = app.add_subcommand("sweep", "run a seeded experiment grid");
    c_sw->add_option("--experiment", sw.experiment, "label written to every row")
        ->capture_default_str();
    c_sw->add_option("--gamma-star", sw.gamma_star, "process confounding levels")
        ->capture_default_str();
    c_sw->add_option("--gamma", sw.gamma,
                     "sensitivity levels (omit to use gamma = gamma_star per cell)");
    c_sw->add_option("--n", sw.n_values, "sample sizes")->capture_default_str();
    c_sw->add_option("--seeds", sw.seeds, "seeds (one dataset + run per seed)")
        ->capture_default_str();
    c_sw->add_option("--estimators", sw.estimators, "training estimators to compare")
        ->capture_default_str();
    c_sw->add_option("--objective", sw.objective, "value or regret")->capture_default_str();
    c_sw->add_option("--baseline", sw.baseline, "'uniform' or a saved policy file")
        ->capture_default_str();
    c_sw->add_option("--out-dir", sw.out_dir, "directory for results/summary/failures CSVs")
        ->capture_default_str();
    c_sw->add_option("--rho", sw.rho, "nuisance-fold fraction")->capture_default_str();
    c_sw->add_option("--lambda", sw.lambda, "policy learning rate")->capture_default_str();
    c_sw->add_option("--iters", sw.iters, "policy gradient steps")->capture_default_str();
    c_sw->add_option("--batch-size", sw.batch_size, "policy mini-batch size (0 = full batch)")
        ->capture_default_str();
    sw.nuisance.attach(c_sw);
    sw.policy.attach(c_sw);
    c_sw->set_config("--config");
    c_sw->callback([&]() { if (!reparse_with_config(*c_sw)) run_sweep(sw); });

    CalibrateArgs ca;
    CLI::App* c_ca = app.add_subcommand(
        "calibrate", "smallest sensitivity level whose interval contains zero");
    c_ca->add_option("--data", ca.data_path, "input CSV")->required();
    c_ca->add_option("--policy", ca.policy_path, "saved policy file")->required();
    c_ca->add_option("--baseline", ca.baseline,
                     "'uniform' or a saved policy file; sets regret-interval mode");
    c_ca->add_option("--arms", ca.arms, "number of arms")->capture_default_str();
    c_ca->add_option("--gamma-max", ca.gamma_max, "largest level probed")->capture_default_str();
    c_ca->add_option("--tol", ca.tol, "multiplicative tolerance on the level")
        ->capture_default_str();
    c_ca->add_option("--trace", ca.trace_path, "write probe trace CSV here");
    c_ca->add_option("--rho", ca.rho, "nuisance-fold fraction")->capture_default_str();
    c_ca->add_option("--seed", ca.seed, "seed for the split and the fits")->capture_default_str();
    ca.nuisance.attach(c_ca);
    c_ca->set_config("--config");
    c_ca->callback([&]() { if (!reparse_with_config(*c_ca)) run_calibrate(ca); });

    CertifyArgs ce;
    CLI::App* c_ce = app.add_subcommand("certify", "finite-sample no-harm certificate");
    c_ce->add_option("--estimate", ce.estimate, "upper-bound estimate to certify")->required();
    c_ce->add_option("--c-y", ce.c_y, "outcome envelope C_y")->capture_default_str();
    c_ce->add_option("--gamma", ce.gamma, "sensitivity level")->required();
    c_ce->add_option("--delta", ce.delta, "failure probability")->capture_default_str();
    c_ce->add_option("--n", ce.n, "evaluation sample size")->required();
    c_ce->add_option("--r-n", ce.r_n, "nuisance rate R_n (negative: n^{-1/2} surrogate)")
        ->capture_default_str();
    c_ce->add_option("--mode", ce.mode, "value or regret")->capture_default_str();
    c_ce->set_config("--config");
    c_ce->callback([&]() { if (!reparse_with_config(*c_ce)) run_certify(ce); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const rp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const rp::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const rp::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
