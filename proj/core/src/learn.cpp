#include "robustpolicy/learn.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

std::string TrainTrace::to_csv() const {
    std::ostringstream out;
    out << "iter,objective,grad_norm\n";
    for (std::size_t k = 0; k < objective.size(); ++k)
        out << k << ',' << format_double(objective[k]) << ',' << format_double(grad_norm[k])
            << '\n';
    return out.str();
}

TrainingProblem::TrainingProblem(Dataset fold, Eigen::MatrixXd coeffs, double baseline_offset)
    : fold_(std::move(fold)), coeffs_(std::move(coeffs)), offset_(baseline_offset) {
    if (coeffs_.rows() != fold_.n() || coeffs_.cols() != fold_.d_a)
        throw DataError("coefficient matrix does not match the training fold");
}

double TrainingProblem::objective(const SoftmaxPolicy& policy) const {
    const Eigen::MatrixXd pi = policy.probs_batch(fold_.x);
    const Eigen::VectorXd per_sample = (pi.array() * coeffs_.array()).rowwise().sum().matrix();
    return chunked_mean(per_sample) - offset_;
}

namespace {

// Score-space gradient of mean_r sum_a pi(a|x_r) W(r,a) over the given rows:
// dS(r, b) = pi_b (W_rb - sum_a pi_a W_ra) / m.
Eigen::MatrixXd score_gradient(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& W) {
    const Eigen::ArrayXd rowdot = (pi.array() * W.array()).rowwise().sum();
    return ((pi.array() * (W.array().colwise() - rowdot)) / static_cast<double>(pi.rows()))
        .matrix();
}

}  // namespace

Eigen::VectorXd TrainingProblem::gradient(const SoftmaxPolicy& policy) const {
    const Eigen::MatrixXd pi = policy.probs_batch(fold_.x);
    return policy.grad_from_score_grad(fold_.x, score_gradient(pi, coeffs_));
}

Eigen::VectorXd TrainingProblem::batch_gradient(const SoftmaxPolicy& policy,
                                                const std::vector<int>& rows) const {
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd xb(m, fold_.d_x());
    Eigen::MatrixXd wb(m, fold_.d_a);
    for (int r = 0; r < m; ++r) {
        xb.row(r) = fold_.x.row(rows[r]);
        wb.row(r) = coeffs_.row(rows[r]);
    }
    const Eigen::MatrixXd pi = policy.probs_batch(xb);
    return policy.grad_from_score_grad(xb, score_gradient(pi, wb));
}

TrainingProblem prepare_training(const Dataset& fold, const NuisanceSet& nuis,
                                 const SensitivitySpec& spec, Estimator kind, Objective objective,
                                 const BaselinePolicy* baseline) {
    const bool is_bound = (kind == Estimator::plugin || kind == Estimator::efficient);
    const SensitivitySpec unit(1.0);
    const SensitivitySpec& eff_spec = is_bound ? spec : unit;

    // Point estimators never consult the trimming machinery, so they work
    // with nuisance sets fitted at any level.
    const NuisanceTable up =
        is_bound ? nuis.table(fold, eff_spec, Side::upper) : point_table(nuis, fold);
    Eigen::MatrixXd W = value_coeffs(fold, up, eff_spec, Side::upper, kind);

    double offset = 0.0;
    if (objective == Objective::regret) {
        if (baseline == nullptr)
            throw ConfigError("the regret objective needs a baseline policy");
        const Eigen::MatrixXd pi0 = baseline->probs_batch(fold.x);
        Eigen::MatrixXd W0;
        if (is_bound) {
            const NuisanceTable low = nuis.table(fold, eff_spec, Side::lower);
            W0 = value_coeffs(fold, low, eff_spec, Side::lower, kind);
        } else {
            W0 = W;
        }
        offset = chunked_mean((pi0.array() * W0.array()).rowwise().sum().matrix());
    }
    return TrainingProblem(fold, std::move(W), offset);
}

TrainResult train(const RunConfig& config, const Dataset& data, Estimator kind,
                  const BaselinePolicy* baseline,
                  std::shared_ptr<const NuisanceSet> override_nuisance) {
    config.validate();
    data.validate();
    if (data.n() < 4) throw DataError("training needs at least 4 samples");

    const auto t_start = std::chrono::steady_clock::now();
    const SensitivitySpec spec(config.gamma);

    const auto [fold1, fold2] = split(data, config.rho, derive_seed(config.seed, "split"));

    TrainResult result;
    std::shared_ptr<const NuisanceSet> nuis = override_nuisance;
    if (!nuis) {
        auto [fitted, report] =
            assemble(fold1, spec, config.nuisance, derive_seed(config.seed, "nuisance"));
        nuis = fitted;
        result.fit_report = std::move(report);
    }

    // Regret mode defaults to the uniform comparator.
    BaselinePolicy default_baseline = BaselinePolicy::uniform(data.d_a);
    const BaselinePolicy* base = baseline ? baseline : &default_baseline;
    const TrainingProblem problem = prepare_training(
        fold2, *nuis, spec, kind, config.objective,
        config.objective == Objective::regret ? base : nullptr);

    const std::uint64_t init_seed = derive_seed(config.seed, "policy-init");
    if (config.policy.mlp) {
        const double x_lo = fold2.x.minCoeff();
        const double x_hi = fold2.x.maxCoeff();
        result.policy = SoftmaxPolicy::mlp(data.d_x(), config.policy.hidden, data.d_a, init_seed,
                                           config.policy.init, x_lo, x_hi);
    } else {
        result.policy = SoftmaxPolicy::linear(data.d_x(), data.d_a, init_seed);
    }

    SoftmaxPolicy& policy = result.policy;
    TrainTrace& trace = result.trace;
    trace.objective.reserve(config.iters);
    trace.grad_norm.reserve(config.iters);

    if (config.batch_size == 0) {
        // Deterministic full-batch descent.
        for (int k = 0; k < config.iters; ++k) {
            const double obj = problem.objective(policy);
            if (!std::isfinite(obj))
                throw NumericError("objective became non-finite at iteration " + std::to_string(k));
            const Eigen::VectorXd grad = problem.gradient(policy);
            trace.objective.push_back(obj);
            trace.grad_norm.push_back(grad.norm());
            if (config.snapshot_every > 0 && k % config.snapshot_every == 0)
                trace.snapshots.emplace_back(k, policy.params());
            policy.set_params(policy.params() - config.lambda * grad);
        }
    } else {
        // Seeded mini-batch epochs; the trace still records the full-batch
        // objective once per epoch.
        RandomStream order(derive_seed(config.seed, "batches"));
        const int n2 = problem.fold().n();
        for (int k = 0; k < config.iters; ++k) {
            const double obj = problem.objective(policy);
            if (!std::isfinite(obj))
                throw NumericError("objective became non-finite at iteration " + std::to_string(k));
            trace.objective.push_back(obj);
            if (config.snapshot_every > 0 && k % config.snapshot_every == 0)
                trace.snapshots.emplace_back(k, policy.params());
            const std::vector<std::size_t> perm = order.permutation(static_cast<std::size_t>(n2));
            double norm_acc = 0.0;
            int batches = 0;
            for (int start = 0; start < n2; start += config.batch_size) {
                const int b = std::min(config.batch_size, n2 - start);
                std::vector<int> rows(b);
                for (int r = 0; r < b; ++r) rows[r] = static_cast<int>(perm[start + r]);
                const Eigen::VectorXd grad = problem.batch_gradient(policy, rows);
                norm_acc += grad.norm();
                ++batches;
                policy.set_params(policy.params() - config.lambda * grad);
            }
            trace.grad_norm.push_back(batches > 0 ? norm_acc / batches : 0.0);
        }
    }
    trace.snapshots.emplace_back(config.iters, policy.params());
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

BoundReport evaluate_policy(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                            const Dataset& fold, const SensitivitySpec& spec, Estimator kind,
                            Objective objective, const BaselinePolicy* baseline, Side side) {
    if (objective == Objective::regret) {
        if (baseline == nullptr)
            throw ConfigError("regret evaluation needs a baseline policy");
        return regret_upper(nuis, pi, baseline->probs_batch(fold.x), fold, spec, kind);
    }
    switch (kind) {
        case Estimator::plugin:
        case Estimator::efficient:
            return value_bound(nuis, pi, fold, spec, side, kind);
        case Estimator::ipw:
            return ipw_value(nuis, pi, fold);
        case Estimator::dr:
            return dr_value(nuis, pi, fold);
    }
    throw ConfigError("unknown estimator kind");
}

NoHarmResult no_harm_check(const NuisanceSet& nuis, const SoftmaxPolicy& policy,
                           const BaselinePolicy& baseline, const Dataset& fold,
                           const SensitivitySpec& spec, double c_y, double delta, double r_n) {
    NoHarmResult out;
    out.report = regret_upper(nuis, policy.probs_batch(fold.x), baseline.probs_batch(fold.x),
                              fold, spec, Estimator::efficient);
    out.cert = certificate(spec.gamma, c_y, delta, fold.n(), r_n, Objective::regret);
    out.certified = out.report.estimate + out.cert.slack < 0.0;
    return out;
}

}  // namespace robustpolicy
