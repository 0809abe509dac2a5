#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "robustpolicy/config.hpp"
#include "robustpolicy/dataset.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/sensitivity.hpp"

namespace robustpolicy {

struct BoundReport {
    double estimate = 0.0;
    Eigen::VectorXd per_sample;  // estimate = deterministic chunked mean
    double se = 0.0;             // sample sd / sqrt(n_eval)
    Estimator kind = Estimator::efficient;
    Side side = Side::upper;
    Objective objective = Objective::value;
    double gamma = 1.0;
    int n_eval = 0;

    static std::string csv_header();  // objective,side,kind,gamma,n_eval,estimate,se
    std::string csv_row() const;
};

// Closed-form sharp bound on E[Y[a] | X = x] from conditional nuisances.
double sharp_capo(const NuisanceSet& nuis, const SensitivitySpec& spec, int a,
                  const Eigen::VectorXd& x, Side side);

// Per-row, per-arm coefficients W such that every estimator here is
// mean_r sum_a pi(a | x_r) W(r, a) — linear in the policy. Non-finite
// nuisance values abort with the offending row. For kinds ipw and dr the
// sensitivity level is ignored.
Eigen::MatrixXd value_coeffs(const Dataset& fold, const NuisanceTable& table,
                             const SensitivitySpec& spec, Side side, Estimator kind);

// Propensities and conditional means only — everything the level-free point
// estimators (ipw, dr) read. The trimming columns are zero-filled and never
// consulted, so the set's fitted trimming levels are irrelevant here.
NuisanceTable point_table(const NuisanceSet& nuis, const Dataset& fold);

// Mean over rows in fixed 1024-element chunks (bitwise reproducible and
// independent of any threading decisions elsewhere).
double chunked_mean(const Eigen::VectorXd& v);

BoundReport make_report(Eigen::VectorXd per_sample, Estimator kind, Side side, Objective objective,
                        double gamma);

// Sharp bound on the policy value (kinds: plugin or efficient; the one-step
// corrected estimator requires the fold to be disjoint from the data the
// nuisances were fitted on).
BoundReport value_bound(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold,
                        const SensitivitySpec& spec, Side side, Estimator kind);

// Unconfounded point estimates (baselines; no sensitivity level involved).
BoundReport ipw_value(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold);
BoundReport dr_value(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold,
                     const Eigen::MatrixXd* cmean_override = nullptr);

// Upper bound on V(pi) - V(pi0): upper coefficients on pi minus lower
// coefficients on pi0, combined per sample. For the point kinds (ipw, dr)
// both pieces use the same coefficients, giving a point regret estimate.
BoundReport regret_upper(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                         const Eigen::MatrixXd& pi0, const Dataset& fold,
                         const SensitivitySpec& spec, Estimator kind);

BoundReport efficient_regret_upper(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                                   const Eigen::MatrixXd& pi0, const Dataset& fold,
                                   const SensitivitySpec& spec);

// Finite-sample no-harm certificate. With outcomes bounded by C_y the
// estimator envelope is C_v = 2 C_y (1 + 1/gamma + gamma); the deviation
// slack is 2 C_v (R_n + (5/2) sqrt(log(2/delta) / (2n))) for a value bound
// and twice that for a regret bound. r_n < 0 selects the n^{-1/2} surrogate.
struct Certificate {
    double gamma = 1.0;
    double c_y = 1.0;
    double c_v = 0.0;
    double delta = 0.05;
    int n = 0;
    double r_n = 0.0;
    double slack = 0.0;
    Objective mode = Objective::value;

    std::string text() const;  // key=value lines
};

Certificate certificate(double gamma, double c_y, double delta, int n, double r_n, Objective mode);

struct CalibrationProbe {
    double gamma = 1.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct CalibrationResult {
    double gamma = 1.0;
    bool explained = false;
    std::vector<CalibrationProbe> trace;
    std::string message;
};

// Smallest sensitivity level at which [lower, upper] straddles zero, found by
// geometric bisection on [1, gamma_max] with multiplicative tolerance `tol`.
// The interval oracle is called once per probed level.
CalibrationResult calibrate_gamma(
    const std::function<std::pair<double, double>(double)>& interval_fn, double gamma_max,
    double tol);

}  // namespace robustpolicy
