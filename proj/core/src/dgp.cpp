#include "robustpolicy/dgp.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

namespace synthetic {

double mean_outcome(int a, double x) {
    const double s = 2.0 * a - 1.0;
    return s * x + s - 2.0 * std::sin(2.0 * s * x);
}

double design_propensity(double x) {
    return 1.0 / (1.0 + std::exp(-(0.75 * x + 0.5)));
}

namespace {

// rho(x; g) = 1 + (1/e_design - 1) * g; true propensity of arm 1 is
// 1/rho(x; 1/gamma_star) when u = 1 and 1/rho(x; gamma_star) when u = 0,
// placing every x exactly on the odds-ratio boundary of the model.
double rho(double x, double g) {
    const double e = design_propensity(x);
    return 1.0 + (1.0 / e - 1.0) * g;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// E[Z 1{Z<=t}] for Z ~ N(mu, 1): mu Phi(t-mu) - phi(t-mu).
double gaussian_lower_partial(double mu, double t) {
    const double z = t - mu;
    return mu * norm_cdf(z) - norm_pdf(z);
}

}  // namespace

double true_propensity(double x, int u, double gamma_star) {
    if (u == 1) return 1.0 / rho(x, 1.0 / gamma_star);
    return 1.0 / rho(x, gamma_star);
}

double marginal_propensity(double x, double gamma_star) {
    return 0.5 * (true_propensity(x, 0, gamma_star) + true_propensity(x, 1, gamma_star));
}

Mixture outcome_mixture(double x, int a, double gamma_star) {
    // P(U = u | X = x, A = a) by Bayes over the two equally likely confounder
    // states; the component means are the outcome model at fixed (x, u).
    double pa[2];
    for (int u = 0; u < 2; ++u) {
        const double e1 = true_propensity(x, u, gamma_star);
        pa[u] = (a == 1) ? e1 : 1.0 - e1;
    }
    const double denom = pa[0] + pa[1];
    const double s = 2.0 * a - 1.0;
    Mixture m;
    for (int u = 0; u < 2; ++u) {
        m.w[u] = pa[u] / denom;
        m.mu[u] = s * x + s - 2.0 * std::sin(2.0 * s * x) - 2.0 * (2.0 * u - 1.0) * (1.0 + 0.5 * x);
    }
    return m;
}

double mixture_cdf(const Mixture& m, double t) {
    return m.w[0] * norm_cdf(t - m.mu[0]) + m.w[1] * norm_cdf(t - m.mu[1]);
}

double mixture_quantile(const Mixture& m, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw NumericError("mixture quantile level must lie in (0,1)");
    double lo = std::min(m.mu[0], m.mu[1]) - 10.0;
    double hi = std::max(m.mu[0], m.mu[1]) + 10.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mixture_cdf(m, mid) < alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double mixture_lower_partial(const Mixture& m, double t) {
    return m.w[0] * gaussian_lower_partial(m.mu[0], t) + m.w[1] * gaussian_lower_partial(m.mu[1], t);
}

double mixture_upper_partial(const Mixture& m, double t) {
    // Continuous law: E[Y 1{Y>=t}] = E[Y] - E[Y 1{Y<=t}].
    const double mean = m.w[0] * m.mu[0] + m.w[1] * m.mu[1];
    return mean - mixture_lower_partial(m, t);
}

double observed_conditional_mean(double x, int a, double gamma_star) {
    const Mixture m = outcome_mixture(x, a, gamma_star);
    return m.w[0] * m.mu[0] + m.w[1] * m.mu[1];
}

double population_sharp_capo(double x, int a, const SensitivitySpec& spec, double gamma_star, Side side) {
    const Mixture m = outcome_mixture(x, a, gamma_star);
    // The weight envelope is anchored at the nominal propensity of the arm
    // being bounded, not at the arm-1 marginal.
    const double e1 = marginal_propensity(x, gamma_star);
    const double e = (a == 1) ? e1 : 1.0 - e1;
    const double q = mixture_quantile(m, spec.alpha(side));
    const double lower_trim = mixture_lower_partial(m, q);
    const double upper_trim = mixture_upper_partial(m, q);
    if (side == Side::upper) return spec.c_minus(e) * lower_trim + spec.c_plus(e) * upper_trim;
    return spec.c_plus(e) * lower_trim + spec.c_minus(e) * upper_trim;
}

}  // namespace synthetic

SyntheticData generate(const SyntheticSpec& spec) {
    if (spec.gamma_star < 1.0) throw ConfigError("gamma_star must be >= 1");
    if (spec.n < 1) throw ConfigError("n must be >= 1");
    const int n = spec.n;

    SyntheticData sd;
    sd.data.d_a = 2;
    sd.data.y.resize(n);
    sd.data.a.resize(n);
    sd.data.x.resize(n, 1);
    sd.u.resize(n);
    sd.y0.resize(n);
    sd.y1.resize(n);
    sd.e_true.resize(n);

    RandomStream rng(spec.seed);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(-2.0, 2.0);
        const int u = rng.bernoulli(0.5) ? 1 : 0;
        const double e1 = synthetic::true_propensity(x, u, spec.gamma_star);
        const int a = rng.bernoulli(e1) ? 1 : 0;
        const double eps = rng.normal();
        const double confound = -2.0 * (2.0 * u - 1.0) * (1.0 + 0.5 * x);
        const double y0 = synthetic::mean_outcome(0, x) + confound + eps;
        const double y1 = synthetic::mean_outcome(1, x) + confound + eps;

        sd.data.x(i, 0) = x;
        sd.data.a(i) = a;
        sd.data.y(i) = (a == 1) ? y1 : y0;
        sd.u(i) = u;
        sd.y0(i) = y0;
        sd.y1(i) = y1;
        sd.e_true(i) = e1;
    }
    return sd;
}

void save_debug_csv(const SyntheticData& sd, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    const int d_x = static_cast<int>(sd.data.x.cols());
    out << "y,a";
    for (int j = 0; j < d_x; ++j) out << ",x" << j;
    out << ",u,y0,y1\n";
    for (int i = 0; i < sd.data.n(); ++i) {
        out << format_double(sd.data.y(i)) << ',' << sd.data.a(i);
        for (int j = 0; j < d_x; ++j) out << ',' << format_double(sd.data.x(i, j));
        out << ',' << static_cast<int>(sd.u(i)) << ',' << format_double(sd.y0(i)) << ','
            << format_double(sd.y1(i)) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

namespace {

// Composite Simpson over [-2, 2] with an odd number of nodes.
double simpson_integral(const std::function<double(double)>& f, int points) {
    int m = std::max(points, 17);
    if (m % 2 == 0) ++m;
    const double a = -2.0, b = 2.0;
    const double h = (b - a) / (m - 1);
    double acc = f(a) + f(b);
    for (int i = 1; i + 1 < m; ++i) acc += f(a + h * i) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double value_integral(const std::function<Eigen::VectorXd(double)>& probs_at, int points) {
    auto integrand = [&](double x) {
        const Eigen::VectorXd p = probs_at(x);
        double v = 0.0;
        for (int a = 0; a < p.size(); ++a) v += p(a) * synthetic::mean_outcome(a, x);
        return v;
    };
    return 0.25 * simpson_integral(integrand, points);
}

}  // namespace

double true_value(const std::function<Eigen::VectorXd(double)>& probs_at, int quadrature_points) {
    return value_integral(probs_at, quadrature_points);
}

double true_value(const SoftmaxPolicy& policy, int quadrature_points) {
    return value_integral(
        [&](double x) {
            Eigen::VectorXd xv(1);
            xv << x;
            return policy.probs(xv);
        },
        quadrature_points);
}

double true_value(const BaselinePolicy& policy, int quadrature_points) {
    return value_integral(
        [&](double x) {
            Eigen::VectorXd xv(1);
            xv << x;
            return policy.probs(xv);
        },
        quadrature_points);
}

double true_regret(const SoftmaxPolicy& policy, const BaselinePolicy& baseline, int quadrature_points) {
    return true_value(policy, quadrature_points) - true_value(baseline, quadrature_points);
}

double population_value_bound(const std::function<Eigen::VectorXd(double)>& probs_at,
                              const SensitivitySpec& spec, double gamma_star, Side side,
                              int quadrature_points) {
    auto integrand = [&](double x) {
        const Eigen::VectorXd p = probs_at(x);
        double v = 0.0;
        for (int a = 0; a < p.size(); ++a)
            v += p(a) * synthetic::population_sharp_capo(x, a, spec, gamma_star, side);
        return v;
    };
    return 0.25 * simpson_integral(integrand, quadrature_points);
}

}  // namespace robustpolicy
