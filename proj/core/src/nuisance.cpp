#include "robustpolicy/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robustpolicy/dgp.hpp"
#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

double NuisanceSet::conditional_mean(int a, const Eigen::VectorXd& x) const {
    return lower_trim(a, x, Side::upper) + upper_trim(a, x, Side::upper);
}

NuisanceTable NuisanceSet::table(const Dataset& fold, const SensitivitySpec& spec, Side side) const {
    const int n = fold.n();
    const int d = arms();
    const double level = spec.alpha(side);
    NuisanceTable t;
    t.e.resize(n, d);
    t.q.resize(n, d);
    t.mlo.resize(n, d);
    t.mhi.resize(n, d);
    t.cmean.resize(n, d);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = fold.x.row(i).transpose();
        const Eigen::VectorXd e = propensity(x);
        for (int a = 0; a < d; ++a) {
            t.e(i, a) = e(a);
            t.q(i, a) = quantile(a, x, level);
            t.mlo(i, a) = lower_trim(a, x, side);
            t.mhi(i, a) = upper_trim(a, x, side);
            t.cmean(i, a) = conditional_mean(a, x);
        }
    }
    return t;
}

void FitReport::add(const std::string& key, const std::string& value) {
    entries.push_back(FitEntry{key, value});
}

void FitReport::add(const std::string& key, double value) {
    entries.push_back(FitEntry{key, format_double(value)});
}

void FitReport::warn(const std::string& message) {
    warnings.push_back(message);
    entries.push_back(FitEntry{"warning", message});
}

std::string FitReport::to_text() const {
    std::ostringstream out;
    for (const FitEntry& e : entries) out << e.key << '=' << e.value << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Net training shared by every fitted nuisance.

namespace {

enum class LossKind { mse, pinball, cross_entropy };

struct FitOutcome {
    double final_loss = 0.0;
    int epochs = 0;
};

// Mini-batch gradient descent with seeded per-epoch shuffles and early
// stopping on the epoch-mean training loss.
FitOutcome fit_net(FeedForwardNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                   LossKind kind, double pinball_level, const LearnerConfig& cfg,
                   std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    const int out_dim = net.output_dim();
    RandomStream rng(seed);

    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    FitOutcome outcome;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n));
        double loss_sum = 0.0;
        for (int start = 0; start < n; start += cfg.batch) {
            const int b = std::min(cfg.batch, n - start);
            Eigen::MatrixXd xb(b, x.cols());
            Eigen::MatrixXd tb(b, target.cols());
            for (int r = 0; r < b; ++r) {
                xb.row(r) = x.row(perm[start + r]);
                tb.row(r) = target.row(perm[start + r]);
            }
            const FeedForwardNet::Cache cache = net.forward_cached(xb);
            const Eigen::MatrixXd& pred = cache.acts.back();
            Eigen::MatrixXd d_out(b, out_dim);
            switch (kind) {
                case LossKind::mse: {
                    const Eigen::MatrixXd resid = pred - tb;
                    loss_sum += resid.squaredNorm();
                    d_out = 2.0 * resid / b;
                    break;
                }
                case LossKind::pinball: {
                    for (int r = 0; r < b; ++r) {
                        const double diff = tb(r, 0) - pred(r, 0);
                        loss_sum += diff * (diff > 0.0 ? pinball_level : pinball_level - 1.0);
                        if (diff > 0.0)
                            d_out(r, 0) = -pinball_level;
                        else if (diff < 0.0)
                            d_out(r, 0) = 1.0 - pinball_level;
                        else
                            d_out(r, 0) = 0.0;
                    }
                    d_out /= b;
                    break;
                }
                case LossKind::cross_entropy: {
                    for (int r = 0; r < b; ++r) {
                        const Eigen::VectorXd z = pred.row(r).transpose();
                        const double zmax = z.maxCoeff();
                        const Eigen::VectorXd ez = (z.array() - zmax).exp();
                        const Eigen::VectorXd p = ez / ez.sum();
                        const int label = static_cast<int>(tb(r, 0));
                        loss_sum += -std::log(std::max(p(label), 1e-300));
                        d_out.row(r) = p.transpose();
                        d_out(r, label) -= 1.0;
                    }
                    d_out /= b;
                    break;
                }
            }
            net.step(cache, d_out, cfg.lr);
        }
        const double epoch_loss = loss_sum / n;
        outcome.final_loss = epoch_loss;
        outcome.epochs = epoch + 1;
        if (epoch_loss < best - 1e-12) {
            best = epoch_loss;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return outcome;
}

}  // namespace

// ---------------------------------------------------------------------------
// FittedNuisance

int FittedNuisance::find_level(double level) const {
    for (std::size_t k = 0; k < levels_.size(); ++k)
        if (std::abs(levels_[k].level - level) <= 1e-9) return static_cast<int>(k);
    throw NumericError("no nuisance models were fitted at quantile level " + format_double(level));
}

double FittedNuisance::level_for(Side side) const {
    return side == Side::upper ? alpha_plus_ : alpha_minus_;
}

Eigen::MatrixXd FittedNuisance::propensity_batch(const Eigen::MatrixXd& x) const {
    const Eigen::MatrixXd scores = prop_.forward(x);
    Eigen::MatrixXd p(scores.rows(), scores.cols());
    for (int i = 0; i < scores.rows(); ++i) {
        const Eigen::VectorXd z = scores.row(i).transpose();
        const double zmax = z.maxCoeff();
        Eigen::VectorXd ez = (z.array() - zmax).exp();
        ez /= ez.sum();
        // Clip and renormalize so extreme propensities cannot explode weights.
        for (int a = 0; a < ez.size(); ++a)
            ez(a) = std::clamp(ez(a), kPropensityClip, 1.0 - kPropensityClip);
        ez /= ez.sum();
        p.row(i) = ez.transpose();
    }
    return p;
}

Eigen::VectorXd FittedNuisance::propensity(const Eigen::VectorXd& x) const {
    return propensity_batch(x.transpose()).row(0).transpose();
}

double FittedNuisance::quantile(int a, const Eigen::VectorXd& x, double level) const {
    const LevelModels& lm = levels_[find_level(level)];
    return lm.quantile[a].forward(x.transpose())(0, 0);
}

double FittedNuisance::lower_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const LevelModels& lm = levels_[find_level(level_for(side))];
    return lm.mlo[a].forward(x.transpose())(0, 0);
}

double FittedNuisance::upper_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const LevelModels& lm = levels_[find_level(level_for(side))];
    return lm.mhi[a].forward(x.transpose())(0, 0);
}

NuisanceTable FittedNuisance::table(const Dataset& fold, const SensitivitySpec& spec,
                                    Side side) const {
    const int n = fold.n();
    const int d = d_a_;
    NuisanceTable t;
    t.e = propensity_batch(fold.x);
    t.q.resize(n, d);
    t.mlo.resize(n, d);
    t.mhi.resize(n, d);
    t.cmean.resize(n, d);
    const int k_side = find_level(spec.alpha(side));
    const int k_up = find_level(alpha_plus_);
    for (int a = 0; a < d; ++a) {
        t.q.col(a) = levels_[k_side].quantile[a].forward(fold.x).col(0);
        t.mlo.col(a) = levels_[k_side].mlo[a].forward(fold.x).col(0);
        t.mhi.col(a) = levels_[k_side].mhi[a].forward(fold.x).col(0);
        t.cmean.col(a) = levels_[k_up].mlo[a].forward(fold.x).col(0) +
                         levels_[k_up].mhi[a].forward(fold.x).col(0);
    }
    return t;
}

std::pair<std::shared_ptr<FittedNuisance>, FitReport> assemble(const Dataset& fold,
                                                               const SensitivitySpec& spec,
                                                               const LearnerConfig& config,
                                                               std::uint64_t seed,
                                                               const FeedForwardNet* reuse_propensity) {
    fold.validate();
    config.validate();
    const int n = fold.n();
    const int d_a = fold.d_a;
    const int d_x = fold.d_x();

    auto nuis = std::make_shared<FittedNuisance>();
    FitReport report;
    nuis->d_a_ = d_a;
    nuis->alpha_plus_ = spec.alpha_plus();
    nuis->alpha_minus_ = spec.alpha_minus();

    // Per-arm row indices; an unobserved arm cannot be fitted.
    std::vector<std::vector<int>> rows(d_a);
    for (int i = 0; i < n; ++i) rows[fold.a(i)].push_back(i);
    for (int a = 0; a < d_a; ++a) {
        if (rows[a].empty())
            throw DataError("arm " + std::to_string(a) + " has no samples in the nuisance fold");
        if (static_cast<int>(rows[a].size()) < 10)
            report.warn("arm " + std::to_string(a) + " has only " +
                        std::to_string(rows[a].size()) + " samples for quantile fitting");
    }

    // Propensity: one softmax-head net on all rows, labels are the arms.
    if (reuse_propensity != nullptr) {
        if (reuse_propensity->input_dim() != d_x || reuse_propensity->output_dim() != d_a)
            throw DataError("reused propensity net does not match the fold's shape");
        nuis->prop_ = *reuse_propensity;
        report.add("propensity_reused", 1.0);
    } else {
        nuis->prop_ = FeedForwardNet(d_x, config.hidden, d_a);
        nuis->prop_.init(InitScheme::FanInUniform, derive_seed(seed, "prop"));
        Eigen::MatrixXd labels(n, 1);
        for (int i = 0; i < n; ++i) labels(i, 0) = fold.a(i);
        const FitOutcome prop_fit = fit_net(nuis->prop_, fold.x, labels, LossKind::cross_entropy,
                                            0.0, config, derive_seed(seed, "prop-order"));
        report.add("propensity_loss", prop_fit.final_loss);
        report.add("propensity_epochs", static_cast<double>(prop_fit.epochs));
    }

    // Distinct trimming levels (a single shared family when gamma = 1).
    std::vector<double> levels{spec.alpha_plus()};
    if (std::abs(spec.alpha_minus() - spec.alpha_plus()) > 1e-9) levels.push_back(spec.alpha_minus());

    for (std::size_t k = 0; k < levels.size(); ++k) {
        FittedNuisance::LevelModels lm;
        lm.level = levels[k];
        lm.quantile.reserve(d_a);
        lm.mlo.reserve(d_a);
        lm.mhi.reserve(d_a);
        const std::string ltag = "level" + std::to_string(k);
        for (int a = 0; a < d_a; ++a) {
            const int na = static_cast<int>(rows[a].size());
            Eigen::MatrixXd xa(na, d_x);
            Eigen::MatrixXd ya(na, 1);
            for (int r = 0; r < na; ++r) {
                xa.row(r) = fold.x.row(rows[a][r]);
                ya(r, 0) = fold.y(rows[a][r]);
            }
            const std::string atag = ltag + "_arm" + std::to_string(a);

            FeedForwardNet qnet(d_x, config.hidden, 1);
            qnet.init(InitScheme::FanInUniform, derive_seed(seed, "quantile", k * 16 + a));
            const FitOutcome qf = fit_net(qnet, xa, ya, LossKind::pinball, levels[k], config,
                                          derive_seed(seed, "quantile-order", k * 16 + a));
            report.add("quantile_" + atag + "_loss", qf.final_loss);
            report.add("quantile_" + atag + "_epochs", static_cast<double>(qf.epochs));

            // Stage two: regress the trimmed pseudo-outcomes on x, plugging in
            // the fitted quantile. Ties at the quantile enter both pieces.
            const Eigen::MatrixXd qhat = qnet.forward(xa);
            Eigen::MatrixXd lo(na, 1), hi(na, 1);
            for (int r = 0; r < na; ++r) {
                const double y = ya(r, 0);
                const double q = qhat(r, 0);
                lo(r, 0) = (y <= q) ? y : 0.0;
                hi(r, 0) = (y >= q) ? y : 0.0;
            }
            FeedForwardNet lonet(d_x, config.hidden, 1);
            lonet.init(InitScheme::FanInUniform, derive_seed(seed, "trim-lo", k * 16 + a));
            const FitOutcome lof = fit_net(lonet, xa, lo, LossKind::mse, 0.0, config,
                                           derive_seed(seed, "trim-lo-order", k * 16 + a));
            report.add("trim_lo_" + atag + "_loss", lof.final_loss);
            report.add("trim_lo_" + atag + "_epochs", static_cast<double>(lof.epochs));

            FeedForwardNet hinet(d_x, config.hidden, 1);
            hinet.init(InitScheme::FanInUniform, derive_seed(seed, "trim-hi", k * 16 + a));
            const FitOutcome hif = fit_net(hinet, xa, hi, LossKind::mse, 0.0, config,
                                           derive_seed(seed, "trim-hi-order", k * 16 + a));
            report.add("trim_hi_" + atag + "_loss", hif.final_loss);
            report.add("trim_hi_" + atag + "_epochs", static_cast<double>(hif.epochs));

            lm.quantile.push_back(std::move(qnet));
            lm.mlo.push_back(std::move(lonet));
            lm.mhi.push_back(std::move(hinet));
        }
        nuis->levels_.push_back(std::move(lm));
    }

    // Quantile monotonicity audit: crossings q_{alpha-} > q_{alpha+} are
    // recorded, never repaired.
    if (nuis->levels_.size() == 2) {
        int crossings = 0;
        for (int a = 0; a < d_a; ++a) {
            const Eigen::MatrixXd q_hi = nuis->levels_[0].quantile[a].forward(fold.x);
            const Eigen::MatrixXd q_lo = nuis->levels_[1].quantile[a].forward(fold.x);
            for (int i = 0; i < n; ++i)
                if (q_lo(i, 0) > q_hi(i, 0)) ++crossings;
        }
        report.add("quantile_crossings", static_cast<double>(crossings));
        if (crossings > 0)
            report.warn("fitted quantiles cross on " + std::to_string(crossings) + " fold rows");
    } else {
        report.add("quantile_crossings", 0.0);
    }

    return {nuis, report};
}

// ---------------------------------------------------------------------------
// SyntheticOracleNuisance

SyntheticOracleNuisance::SyntheticOracleNuisance(double gamma_star, const SensitivitySpec& spec)
    : gamma_star_(gamma_star) {
    if (gamma_star < 1.0) throw ConfigError("gamma_star must be >= 1");
    bind(spec);
}

void SyntheticOracleNuisance::bind(const SensitivitySpec& spec) {
    alpha_plus_ = spec.alpha_plus();
    alpha_minus_ = spec.alpha_minus();
}

Eigen::VectorXd SyntheticOracleNuisance::propensity(const Eigen::VectorXd& x) const {
    const double e1 = synthetic::marginal_propensity(x(0), gamma_star_);
    Eigen::VectorXd e(2);
    e << 1.0 - e1, e1;
    return e;
}

double SyntheticOracleNuisance::quantile(int a, const Eigen::VectorXd& x, double level) const {
    return synthetic::mixture_quantile(synthetic::outcome_mixture(x(0), a, gamma_star_), level);
}

double SyntheticOracleNuisance::lower_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const synthetic::Mixture m = synthetic::outcome_mixture(x(0), a, gamma_star_);
    const double level = side == Side::upper ? alpha_plus_ : alpha_minus_;
    return synthetic::mixture_lower_partial(m, synthetic::mixture_quantile(m, level));
}

double SyntheticOracleNuisance::upper_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const synthetic::Mixture m = synthetic::outcome_mixture(x(0), a, gamma_star_);
    const double level = side == Side::upper ? alpha_plus_ : alpha_minus_;
    return synthetic::mixture_upper_partial(m, synthetic::mixture_quantile(m, level));
}

double SyntheticOracleNuisance::conditional_mean(int a, const Eigen::VectorXd& x) const {
    return synthetic::observed_conditional_mean(x(0), a, gamma_star_);
}

// ---------------------------------------------------------------------------
// DiscreteOracleNuisance

DiscreteOracleNuisance::DiscreteOracleNuisance(const DiscreteInstance& instance,
                                               const SensitivitySpec& spec)
    : instance_(instance), spec_(spec) {
    instance_.validate();
    // Sort each law's atoms ascending once so quantiles and trims are scans.
    for (DiscreteCell& cell : instance_.cells)
        for (OutcomeLaw& law : cell.laws)
            std::stable_sort(law.atoms.begin(), law.atoms.end(),
                             [](const Atom& u, const Atom& v) { return u.y < v.y; });
}

const DiscreteCell& DiscreteOracleNuisance::cell_at(const Eigen::VectorXd& x) const {
    for (const DiscreteCell& cell : instance_.cells)
        if (cell.x.size() == x.size() && (cell.x - x).cwiseAbs().maxCoeff() == 0.0) return cell;
    throw DataError("covariate does not match any cell of the discrete instance");
}

Eigen::VectorXd DiscreteOracleNuisance::propensity(const Eigen::VectorXd& x) const {
    const DiscreteCell& cell = cell_at(x);
    Eigen::VectorXd e(instance_.d_a);
    for (int a = 0; a < instance_.d_a; ++a) e(a) = cell.propensity[a];
    return e;
}

double DiscreteOracleNuisance::quantile(int a, const Eigen::VectorXd& x, double level) const {
    const OutcomeLaw& law = cell_at(x).laws[a];
    double cum = 0.0;
    for (const Atom& at : law.atoms) {
        cum += at.p;
        if (cum >= level) return at.y;  // left-continuous inverse
    }
    return law.atoms.back().y;
}

double DiscreteOracleNuisance::lower_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const OutcomeLaw& law = cell_at(x).laws[a];
    const double q = quantile(a, x, spec_.alpha(side));
    double s = 0.0;
    for (const Atom& at : law.atoms)
        if (at.y <= q) s += at.y * at.p;
    return s;
}

double DiscreteOracleNuisance::upper_trim(int a, const Eigen::VectorXd& x, Side side) const {
    const OutcomeLaw& law = cell_at(x).laws[a];
    const double q = quantile(a, x, spec_.alpha(side));
    double s = 0.0;
    for (const Atom& at : law.atoms)
        if (at.y >= q) s += at.y * at.p;
    return s;
}

}  // namespace robustpolicy
