#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "robustpolicy/bounds.hpp"
#include "robustpolicy/config.hpp"
#include "robustpolicy/dataset.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/policy.hpp"

namespace robustpolicy {

struct TrainTrace {
    std::vector<double> objective;  // recorded every iteration, before the step
    std::vector<double> grad_norm;
    double wall_seconds = 0.0;
    std::vector<std::pair<int, Eigen::VectorXd>> snapshots;

    std::string to_csv() const;  // header: iter,objective,grad_norm
};

// The training objective as a differentiable function of the policy. All
// nuisance evaluations over the estimation fold are cached in a per-row
// coefficient matrix W once; every estimator here is linear in the policy,
// so objective(pi) = mean_r sum_a pi(a|x_r) W(r,a) - baseline_offset.
class TrainingProblem {
public:
    TrainingProblem(Dataset fold, Eigen::MatrixXd coeffs, double baseline_offset);

    double objective(const SoftmaxPolicy& policy) const;
    Eigen::VectorXd gradient(const SoftmaxPolicy& policy) const;

    // Gradient from a row subset (seeded mini-batch mode). Scaled by the
    // subset size, not the fold size.
    Eigen::VectorXd batch_gradient(const SoftmaxPolicy& policy, const std::vector<int>& rows) const;

    const Dataset& fold() const { return fold_; }
    const Eigen::MatrixXd& coeffs() const { return coeffs_; }
    double baseline_offset() const { return offset_; }

private:
    Dataset fold_;
    Eigen::MatrixXd coeffs_;
    double offset_ = 0.0;
};

// Builds the cached problem: upper-side coefficients of the chosen estimator
// on the estimation fold; in regret mode the frozen baseline's lower-side
// estimate becomes a constant offset (so the gradient equals the value-mode
// gradient).
TrainingProblem prepare_training(const Dataset& fold, const NuisanceSet& nuis,
                                 const SensitivitySpec& spec, Estimator kind, Objective objective,
                                 const BaselinePolicy* baseline);

struct TrainResult {
    SoftmaxPolicy policy;
    TrainTrace trace;
    FitReport fit_report;
};

// Algorithm: split the data, fit nuisances on fold 1 (unless an already
// fitted set is supplied), cache coefficients on fold 2, then minimize the
// worst-case objective by plain gradient descent (full-batch by default;
// config.batch_size > 0 switches to seeded mini-batch epochs whose trace
// still records the full-batch objective).
TrainResult train(const RunConfig& config, const Dataset& data, Estimator kind,
                  const BaselinePolicy* baseline = nullptr,
                  std::shared_ptr<const NuisanceSet> override_nuisance = nullptr);

// Evaluation dispatch: value mode returns the side's bound (or the point
// estimate for ipw/dr); regret mode returns the upper regret report against
// the baseline (required there).
BoundReport evaluate_policy(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                            const Dataset& fold, const SensitivitySpec& spec, Estimator kind,
                            Objective objective, const BaselinePolicy* baseline = nullptr,
                            Side side = Side::upper);

struct NoHarmResult {
    bool certified = false;  // upper regret estimate + slack < 0
    BoundReport report;
    Certificate cert;
};

// Finite-sample no-harm check of `policy` against `baseline` on `fold`.
NoHarmResult no_harm_check(const NuisanceSet& nuis, const SoftmaxPolicy& policy,
                           const BaselinePolicy& baseline, const Dataset& fold,
                           const SensitivitySpec& spec, double c_y, double delta, double r_n);

}  // namespace robustpolicy
