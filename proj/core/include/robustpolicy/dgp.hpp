#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "robustpolicy/dataset.hpp"
#include "robustpolicy/policy.hpp"
#include "robustpolicy/sensitivity.hpp"

namespace robustpolicy {

// Confounded synthetic benchmark. Scalar covariate X ~ U[-2,2], binary
// hidden confounder U ~ Ber(1/2), binary treatment, outcomes
//   Y[a] = (2a-1)X + (2a-1) - 2 sin(2(2a-1)X) - 2(2U-1)(1 + 0.5X) + eps,
// eps ~ N(0,1). Treatments are drawn from the true (confounded) propensity,
// which sits exactly on the odds-ratio boundary at gamma_star.
struct SyntheticSpec {
    double gamma_star = 1.0;
    int n = 8000;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Dataset data;             // observed (y, a, x); the confounder is withheld
    Eigen::VectorXd u;        // hidden trace, test use only
    Eigen::VectorXd y0, y1;   // potential outcomes
    Eigen::VectorXd e_true;   // true propensity of arm 1 at (x, u)
};

SyntheticData generate(const SyntheticSpec& spec);

// Debug export with extra columns u, y0, y1 appended after the covariates.
void save_debug_csv(const SyntheticData& sd, const std::string& path);

namespace synthetic {

// E[Y[a] | X=x]: the confounder and noise average out.
double mean_outcome(int a, double x);

// Nominal design score sigma(0.75 x + 0.5).
double design_propensity(double x);

// True propensity e(1, x, u) at confounding strength gamma_star.
double true_propensity(double x, int u, double gamma_star);

// Data-implied marginal p(A=1 | x) = E_U[e(1, x, U)].
double marginal_propensity(double x, double gamma_star);

// Conditional law of Y | X=x, A=a: a two-component unit-variance Gaussian
// mixture over the hidden confounder. weights/means are indexed by u.
struct Mixture {
    double w[2];
    double mu[2];
};
Mixture outcome_mixture(double x, int a, double gamma_star);

double mixture_cdf(const Mixture& m, double t);
double mixture_quantile(const Mixture& m, double alpha);          // bisection
double mixture_lower_partial(const Mixture& m, double t);         // E[Y 1{Y<=t}]
double mixture_upper_partial(const Mixture& m, double t);         // E[Y 1{Y>=t}]
double observed_conditional_mean(double x, int a, double gamma_star);  // E[Y | x, a]

// Population sharp bound on E[Y[a] | X=x] computed from the closed forms.
double population_sharp_capo(double x, int a, const SensitivitySpec& spec, double gamma_star, Side side);

}  // namespace synthetic

// V(pi) = (1/4) int_{-2}^{2} sum_a pi(a|x) m_a(x) dx by composite Simpson
// quadrature; points must be >= 16 (rounded up to an odd count).
double true_value(const std::function<Eigen::VectorXd(double)>& probs_at, int quadrature_points);
double true_value(const SoftmaxPolicy& policy, int quadrature_points = 2001);
double true_value(const BaselinePolicy& policy, int quadrature_points = 2001);

double true_regret(const SoftmaxPolicy& policy, const BaselinePolicy& baseline, int quadrature_points = 2001);

// Population value bound (1/4) int sum_a pi(a|x) Q^{side}(a,x) dx.
double population_value_bound(const std::function<Eigen::VectorXd(double)>& probs_at,
                              const SensitivitySpec& spec, double gamma_star, Side side,
                              int quadrature_points = 2001);

}  // namespace robustpolicy
