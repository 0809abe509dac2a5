#include "robustpolicy/bounds.hpp"

#include <cmath>
#include <sstream>

#include "robustpolicy/errors.hpp"

namespace robustpolicy {

std::string BoundReport::csv_header() { return "objective,side,kind,gamma,n_eval,estimate,se"; }

std::string BoundReport::csv_row() const {
    std::ostringstream out;
    out << to_string(objective) << ',' << (side == Side::upper ? "upper" : "lower") << ','
        << to_string(kind) << ',' << format_double(gamma) << ',' << n_eval << ','
        << format_double(estimate) << ',' << format_double(se);
    return out.str();
}

double sharp_capo(const NuisanceSet& nuis, const SensitivitySpec& spec, int a,
                  const Eigen::VectorXd& x, Side side) {
    const double e = nuis.propensity(x)(a);
    const double mlo = nuis.lower_trim(a, x, side);
    const double mhi = nuis.upper_trim(a, x, side);
    if (side == Side::upper) return spec.c_minus(e) * mlo + spec.c_plus(e) * mhi;
    return spec.c_plus(e) * mlo + spec.c_minus(e) * mhi;
}

namespace {

void check_finite(const NuisanceTable& t, int row, int arm) {
    if (std::isfinite(t.e(row, arm)) && std::isfinite(t.q(row, arm)) &&
        std::isfinite(t.mlo(row, arm)) && std::isfinite(t.mhi(row, arm)) &&
        std::isfinite(t.cmean(row, arm)))
        return;
    throw NumericError("non-finite nuisance value at fold row " + std::to_string(row) + ", arm " +
                       std::to_string(arm));
}

}  // namespace

Eigen::MatrixXd value_coeffs(const Dataset& fold, const NuisanceTable& table,
                             const SensitivitySpec& spec, Side side, Estimator kind) {
    const int n = fold.n();
    const int d = fold.d_a;
    if (table.e.rows() != n || table.e.cols() != d)
        throw DataError("nuisance table shape does not match the fold");

    Eigen::MatrixXd W(n, d);
    const double alpha = spec.alpha(side);
    // Weight caps on the bottom/top of the conditional law for this side and
    // their derivatives in the propensity.
    const double b_lo = (side == Side::upper) ? spec.b_minus() : spec.b_plus();
    const double b_hi = (side == Side::upper) ? spec.b_plus() : spec.b_minus();

    for (int i = 0; i < n; ++i) {
        const int ai = fold.a(i);
        const double y = fold.y(i);
        for (int a = 0; a < d; ++a) {
            check_finite(table, i, a);
            const double e = table.e(i, a);
            switch (kind) {
                case Estimator::plugin: {
                    const double w_lo = (side == Side::upper) ? spec.c_minus(e) : spec.c_plus(e);
                    const double w_hi = (side == Side::upper) ? spec.c_plus(e) : spec.c_minus(e);
                    W(i, a) = w_lo * table.mlo(i, a) + w_hi * table.mhi(i, a);
                    break;
                }
                case Estimator::efficient: {
                    const double w_lo = (side == Side::upper) ? spec.c_minus(e) : spec.c_plus(e);
                    const double w_hi = (side == Side::upper) ? spec.c_plus(e) : spec.c_minus(e);
                    const double mlo = table.mlo(i, a);
                    const double mhi = table.mhi(i, a);
                    const double sharp = w_lo * mlo + w_hi * mhi;
                    const double g = b_lo * mlo + b_hi * mhi;
                    double w = sharp - e * g;
                    if (a == ai) {
                        const double q = table.q(i, a);
                        const double d_lo = (y <= q) ? 1.0 : 0.0;
                        const double d_hi = (y >= q) ? 1.0 : 0.0;
                        const double corr = (w_lo - w_hi) * q * (d_lo - alpha) +
                                            w_lo * (y * d_lo - mlo) + w_hi * (y * d_hi - mhi);
                        w += g + corr / e;
                    }
                    W(i, a) = w;
                    break;
                }
                case Estimator::ipw: {
                    W(i, a) = (a == ai) ? y / e : 0.0;
                    break;
                }
                case Estimator::dr: {
                    const double m = table.cmean(i, a);
                    W(i, a) = m + ((a == ai) ? (y - m) / e : 0.0);
                    break;
                }
            }
        }
    }
    return W;
}

double chunked_mean(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) return 0.0;
    constexpr Eigen::Index kChunk = 1024;
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
        const Eigen::Index len = std::min(kChunk, n - start);
        double part = 0.0;
        for (Eigen::Index i = 0; i < len; ++i) part += v(start + i);
        total += part;
    }
    return total / static_cast<double>(n);
}

BoundReport make_report(Eigen::VectorXd per_sample, Estimator kind, Side side, Objective objective,
                        double gamma) {
    BoundReport rep;
    rep.kind = kind;
    rep.side = side;
    rep.objective = objective;
    rep.gamma = gamma;
    rep.n_eval = static_cast<int>(per_sample.size());
    rep.estimate = chunked_mean(per_sample);
    if (rep.n_eval > 1) {
        Eigen::VectorXd centered = per_sample.array() - rep.estimate;
        const double var = centered.squaredNorm() / (rep.n_eval - 1);
        rep.se = std::sqrt(var / rep.n_eval);
    }
    rep.per_sample = std::move(per_sample);
    return rep;
}

namespace {

Eigen::VectorXd combine(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& W) {
    if (pi.rows() != W.rows() || pi.cols() != W.cols())
        throw DataError("policy probability matrix does not match the coefficient matrix");
    return (pi.array() * W.array()).rowwise().sum().matrix();
}

}  // namespace

BoundReport value_bound(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold,
                        const SensitivitySpec& spec, Side side, Estimator kind) {
    if (kind != Estimator::plugin && kind != Estimator::efficient)
        throw ConfigError("value_bound computes sharp bounds; use ipw_value or dr_value for point estimates");
    const NuisanceTable table = nuis.table(fold, spec, side);
    const Eigen::MatrixXd W = value_coeffs(fold, table, spec, side, kind);
    return make_report(combine(pi, W), kind, side, Objective::value, spec.gamma);
}

NuisanceTable point_table(const NuisanceSet& nuis, const Dataset& fold) {
    const int n = fold.n();
    const int d = fold.d_a;
    NuisanceTable t;
    t.e.resize(n, d);
    t.cmean.resize(n, d);
    t.q = Eigen::MatrixXd::Zero(n, d);
    t.mlo = Eigen::MatrixXd::Zero(n, d);
    t.mhi = Eigen::MatrixXd::Zero(n, d);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = fold.x.row(i).transpose();
        const Eigen::VectorXd e = nuis.propensity(x);
        for (int a = 0; a < d; ++a) {
            t.e(i, a) = e(a);
            t.cmean(i, a) = nuis.conditional_mean(a, x);
        }
    }
    return t;
}

BoundReport ipw_value(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold) {
    const SensitivitySpec unit(1.0);
    const NuisanceTable table = point_table(nuis, fold);
    const Eigen::MatrixXd W = value_coeffs(fold, table, unit, Side::upper, Estimator::ipw);
    return make_report(combine(pi, W), Estimator::ipw, Side::upper, Objective::value, 1.0);
}

BoundReport dr_value(const NuisanceSet& nuis, const Eigen::MatrixXd& pi, const Dataset& fold,
                     const Eigen::MatrixXd* cmean_override) {
    const SensitivitySpec unit(1.0);
    NuisanceTable table = point_table(nuis, fold);
    if (cmean_override != nullptr) {
        if (cmean_override->rows() != table.cmean.rows() ||
            cmean_override->cols() != table.cmean.cols())
            throw DataError("conditional-mean override shape does not match the fold");
        table.cmean = *cmean_override;
    }
    const Eigen::MatrixXd W = value_coeffs(fold, table, unit, Side::upper, Estimator::dr);
    return make_report(combine(pi, W), Estimator::dr, Side::upper, Objective::value, 1.0);
}

BoundReport regret_upper(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                         const Eigen::MatrixXd& pi0, const Dataset& fold,
                         const SensitivitySpec& spec, Estimator kind) {
    Eigen::VectorXd per_sample;
    if (kind == Estimator::plugin || kind == Estimator::efficient) {
        const NuisanceTable up = nuis.table(fold, spec, Side::upper);
        const NuisanceTable low = nuis.table(fold, spec, Side::lower);
        const Eigen::MatrixXd W_up = value_coeffs(fold, up, spec, Side::upper, kind);
        const Eigen::MatrixXd W_low = value_coeffs(fold, low, spec, Side::lower, kind);
        per_sample = combine(pi, W_up) - combine(pi0, W_low);
    } else {
        const SensitivitySpec unit(1.0);
        const NuisanceTable table = point_table(nuis, fold);
        const Eigen::MatrixXd W = value_coeffs(fold, table, unit, Side::upper, kind);
        per_sample = combine(pi, W) - combine(pi0, W);
    }
    return make_report(per_sample, kind, Side::upper, Objective::regret, spec.gamma);
}

BoundReport efficient_regret_upper(const NuisanceSet& nuis, const Eigen::MatrixXd& pi,
                                   const Eigen::MatrixXd& pi0, const Dataset& fold,
                                   const SensitivitySpec& spec) {
    return regret_upper(nuis, pi, pi0, fold, spec, Estimator::efficient);
}

std::string Certificate::text() const {
    std::ostringstream out;
    out << "mode=" << to_string(mode) << '\n'
        << "gamma=" << format_double(gamma) << '\n'
        << "c_y=" << format_double(c_y) << '\n'
        << "c_v=" << format_double(c_v) << '\n'
        << "delta=" << format_double(delta) << '\n'
        << "n=" << n << '\n'
        << "r_n=" << format_double(r_n) << '\n'
        << "slack=" << format_double(slack) << '\n';
    return out.str();
}

Certificate certificate(double gamma, double c_y, double delta, int n, double r_n,
                        Objective mode) {
    if (gamma < 1.0) throw ConfigError("gamma must be >= 1");
    if (!(c_y > 0.0)) throw ConfigError("the outcome envelope c_y must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (n < 1) throw ConfigError("n must be >= 1");
    Certificate cert;
    cert.gamma = gamma;
    cert.c_y = c_y;
    cert.c_v = 2.0 * c_y * (1.0 + 1.0 / gamma + gamma);
    cert.delta = delta;
    cert.n = n;
    cert.r_n = (r_n < 0.0) ? 1.0 / std::sqrt(static_cast<double>(n)) : r_n;
    cert.mode = mode;
    const double dev = std::sqrt(std::log(2.0 / delta) / (2.0 * n));
    cert.slack = 2.0 * cert.c_v * (cert.r_n + 2.5 * dev);
    if (mode == Objective::regret) cert.slack *= 2.0;
    return cert;
}

CalibrationResult calibrate_gamma(
    const std::function<std::pair<double, double>(double)>& interval_fn, double gamma_max,
    double tol) {
    if (gamma_max < 1.0) throw ConfigError("gamma_max must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");

    CalibrationResult res;
    auto probe = [&](double g) {
        const auto [lo, up] = interval_fn(g);
        res.trace.push_back(CalibrationProbe{g, lo, up});
        return lo <= 0.0 && 0.0 <= up;
    };

    if (probe(1.0)) {
        res.gamma = 1.0;
        res.explained = true;
        res.message = "the point interval already contains zero";
        return res;
    }
    if (gamma_max == 1.0 || !probe(gamma_max)) {
        res.gamma = gamma_max;
        res.explained = false;
        res.message = "not explained away below gamma_max";
        return res;
    }

    double lo = 1.0, hi = gamma_max;
    while (hi / lo > 1.0 + tol) {
        const double mid = std::sqrt(lo * hi);
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }
    res.gamma = hi;
    res.explained = true;
    res.message = "smallest level whose interval contains zero, to tolerance";
    return res;
}

}  // namespace robustpolicy
