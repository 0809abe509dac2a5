#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "robustpolicy/dgp.hpp"
#include "robustpolicy/errors.hpp"
#include "robustpolicy/rng.hpp"

using namespace robustpolicy;
namespace syn = robustpolicy::synthetic;

namespace {

std::string scratch_path(const std::string& name) {
    static const std::filesystem::path dir = [] {
        std::filesystem::path p = std::filesystem::temp_directory_path() / "robustpolicy_test_dgp";
        std::filesystem::create_directories(p);
        return p;
    }();
    return (dir / name).string();
}

double odds(double p) { return p / (1.0 - p); }

Eigen::VectorXd uniform_probs(double) {
    Eigen::VectorXd p(2);
    p << 0.5, 0.5;
    return p;
}

// Numeric check of E[Y 1{Y <= t}] by direct quadrature of the mixture density.
double lower_partial_by_quadrature(const syn::Mixture& m, double t) {
    const double lo = std::min(m.mu[0], m.mu[1]) - 12.0;
    const int steps = 200001;
    const double h = (t - lo) / (steps - 1);
    auto f = [&](double y) {
        const double inv = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
        const double d0 = y - m.mu[0], d1 = y - m.mu[1];
        return y * (m.w[0] * inv * std::exp(-0.5 * d0 * d0) + m.w[1] * inv * std::exp(-0.5 * d1 * d1));
    };
    double acc = f(lo) + f(t);
    for (int i = 1; i + 1 < steps; ++i) acc += f(lo + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("marginal propensities match their closed forms") {
    // At gamma* = 1 the marginal equals the design score sigma(0.5) at x = 0.
    CHECK(std::abs(syn::marginal_propensity(0.0, 1.0) - 0.622459331202) <= 1e-9);
    CHECK(std::abs(syn::marginal_propensity(0.0, 1.0) - 1.0 / (1.0 + std::exp(-0.5))) <= 1e-15);
    CHECK(std::abs(syn::marginal_propensity(0.5, 7.0) - 0.599512701463) <= 1e-9);
    CHECK(std::abs(syn::marginal_propensity(-1.0, 5.0) - 0.465218454929) <= 1e-9);

    // The marginal averages the two confounder states.
    RandomStream rng(3);
    for (int t = 0; t < 200; ++t) {
        const double x = rng.uniform(-2.0, 2.0);
        const double g = rng.uniform(1.0, 12.0);
        const double avg =
            0.5 * (syn::true_propensity(x, 0, g) + syn::true_propensity(x, 1, g));
        CHECK(std::abs(avg - syn::marginal_propensity(x, g)) <= 1e-15);
    }
}

TEST_CASE("true propensities sit exactly on the odds-ratio boundary") {
    RandomStream rng(5);
    for (int t = 0; t < 1000; ++t) {
        const double x = rng.uniform(-2.0, 2.0);
        const double g = std::exp(rng.uniform(0.0, std::log(20.0)));
        const double e_design = syn::design_propensity(x);
        const double r1 = odds(syn::true_propensity(x, 1, g)) / odds(e_design);
        const double r0 = odds(syn::true_propensity(x, 0, g)) / odds(e_design);
        CHECK(std::abs(r1 - g) / g <= 1e-12);
        CHECK(std::abs(r0 - 1.0 / g) * g <= 1e-12);
    }
}

TEST_CASE("conditional outcome law is the advertised two-point mixture") {
    const syn::Mixture m = syn::outcome_mixture(0.3, 1, 5.0);
    CHECK(std::abs(m.w[0] - 0.2427504449) <= 1e-9);
    CHECK(std::abs(m.w[1] - 0.7572495551) <= 1e-9);
    CHECK(std::abs(m.mu[0] - 2.4707150532) <= 1e-9);
    CHECK(std::abs(m.mu[1] - (-2.1292849468)) <= 1e-9);
    CHECK(std::abs(m.w[0] + m.w[1] - 1.0) <= 1e-15);

    CHECK(std::abs(syn::mixture_quantile(m, 5.0 / 6.0) - 1.9847176342) <= 1e-9);

    // Quantile inverts the CDF.
    for (double alpha : {0.05, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.95}) {
        const double q = syn::mixture_quantile(m, alpha);
        CHECK(std::abs(syn::mixture_cdf(m, q) - alpha) <= 1e-10);
    }
    CHECK_THROWS_AS(syn::mixture_quantile(m, 0.0), NumericError);
    CHECK_THROWS_AS(syn::mixture_quantile(m, 1.0), NumericError);

    // At gamma* = 1 the treatment carries no information about the
    // confounder, so the mixture weights collapse to the prior.
    const syn::Mixture flat = syn::outcome_mixture(0.3, 1, 1.0);
    CHECK(std::abs(flat.w[0] - 0.5) <= 1e-15);
    CHECK(std::abs(flat.w[1] - 0.5) <= 1e-15);
}

TEST_CASE("partial means agree with direct quadrature") {
    const syn::Mixture m = syn::outcome_mixture(0.3, 1, 5.0);
    for (double t : {-1.0, 0.5, 2.0}) {
        CHECK(std::abs(syn::mixture_lower_partial(m, t) - lower_partial_by_quadrature(m, t)) <=
              1e-8);
    }
    // The two pieces reassemble the mean for this continuous law.
    const double mean = m.w[0] * m.mu[0] + m.w[1] * m.mu[1];
    for (double t : {-2.0, 0.0, 1.3}) {
        CHECK(std::abs(syn::mixture_lower_partial(m, t) + syn::mixture_upper_partial(m, t) -
                       mean) <= 1e-15);
    }
    CHECK(std::abs(syn::observed_conditional_mean(0.3, 1, 5.0) - mean) <= 1e-15);
}

TEST_CASE("population sharp bounds match frozen references") {
    CHECK(std::abs(syn::population_sharp_capo(0.3, 1, SensitivitySpec(5.0), 5.0, Side::upper) -
                   0.260941822357) <= 1e-9);
    CHECK(std::abs(syn::population_sharp_capo(0.3, 1, SensitivitySpec(5.0), 5.0, Side::lower) -
                   (-1.796675355031)) <= 1e-9);
    CHECK(std::abs(syn::population_sharp_capo(-1.2, 0, SensitivitySpec(2.0), 7.0, Side::upper) -
                   (-0.327848363974)) <= 1e-9);

    // Level one collapses both sides to the observed conditional mean.
    RandomStream rng(8);
    for (int t = 0; t < 50; ++t) {
        const double x = rng.uniform(-2.0, 2.0);
        const int a = rng.bernoulli(0.5) ? 1 : 0;
        const double g = rng.uniform(1.0, 9.0);
        const double mean = syn::observed_conditional_mean(x, a, g);
        for (Side side : {Side::upper, Side::lower}) {
            const double q = syn::population_sharp_capo(x, a, SensitivitySpec(1.0), g, side);
            CHECK(std::abs(q - mean) <= 1e-9);
        }
    }
    CHECK(std::abs(syn::population_sharp_capo(0.0, 1, SensitivitySpec(1.0), 1.0, Side::upper) -
                   1.0) <= 1e-9);

    // Monotone in the level, bracketing the mean.
    const double up2 = syn::population_sharp_capo(0.7, 1, SensitivitySpec(2.0), 4.0, Side::upper);
    const double up5 = syn::population_sharp_capo(0.7, 1, SensitivitySpec(5.0), 4.0, Side::upper);
    const double lo2 = syn::population_sharp_capo(0.7, 1, SensitivitySpec(2.0), 4.0, Side::lower);
    const double lo5 = syn::population_sharp_capo(0.7, 1, SensitivitySpec(5.0), 4.0, Side::lower);
    const double mean = syn::observed_conditional_mean(0.7, 1, 4.0);
    CHECK(lo5 < lo2);
    CHECK(lo2 < mean);
    CHECK(mean < up2);
    CHECK(up2 < up5);
}

TEST_CASE("true policy values integrate the mean outcomes") {
    CHECK(std::abs(true_value(uniform_probs, 2001)) <= 1e-10);

    auto always1 = [](double) {
        Eigen::VectorXd p(2);
        p << 0.0, 1.0;
        return p;
    };
    auto always0 = [](double) {
        Eigen::VectorXd p(2);
        p << 1.0, 0.0;
        return p;
    };
    CHECK(std::abs(true_value(always1, 2001) - 1.0) <= 1e-10);
    CHECK(std::abs(true_value(always0, 2001) - (-1.0)) <= 1e-10);

    // Pointwise best assignment: the attainable minimum of the true value.
    auto best = [](double x) {
        Eigen::VectorXd p(2);
        const double m1 = syn::mean_outcome(1, x);
        if (m1 < -m1)
            p << 0.0, 1.0;
        else
            p << 1.0, 0.0;
        return p;
    };
    CHECK(std::abs(true_value(best, 200001) - (-1.407982022049)) <= 1e-9);

    // Regret against the uniform comparator is the value itself.
    SoftmaxPolicy pol = SoftmaxPolicy::linear(1, 2, 77);
    const BaselinePolicy unif = BaselinePolicy::uniform(2);
    CHECK(std::abs(true_regret(pol, unif) - true_value(pol)) <= 1e-10);
}

TEST_CASE("population value bounds of the uniform policy match frozen references") {
    CHECK(std::abs(population_value_bound(uniform_probs, SensitivitySpec(2.0), 2.0, Side::lower,
                                          4001) -
                   (-0.369369)) <= 1e-5);
    CHECK(std::abs(population_value_bound(uniform_probs, SensitivitySpec(2.0), 2.0, Side::upper,
                                          4001) -
                   0.792069) <= 1e-5);
    CHECK(std::abs(population_value_bound(uniform_probs, SensitivitySpec(5.0), 5.0, Side::lower,
                                          4001) -
                   (-0.704378)) <= 1e-5);
    CHECK(std::abs(population_value_bound(uniform_probs, SensitivitySpec(5.0), 5.0, Side::upper,
                                          4001) -
                   1.296037) <= 1e-5);

    // At level one both sides collapse to the (zero) uniform value.
    CHECK(std::abs(population_value_bound(uniform_probs, SensitivitySpec(1.0), 2.0, Side::upper,
                                          2001) -
                   population_value_bound(uniform_probs, SensitivitySpec(1.0), 2.0, Side::lower,
                                          2001)) <= 1e-12);
}

TEST_CASE("generator draws are reproducible and self-consistent") {
    SyntheticSpec spec;
    spec.gamma_star = 5.0;
    spec.n = 4000;
    spec.seed = 123;
    const SyntheticData sd = generate(spec);
    REQUIRE(sd.data.n() == 4000);
    CHECK(sd.data.d_a == 2);
    CHECK(sd.data.d_x() == 1);
    CHECK_NOTHROW(sd.data.validate());

    const SyntheticData sd2 = generate(spec);
    CHECK(sd2.data.y == sd.data.y);
    CHECK(sd2.data.a == sd.data.a);
    CHECK(sd2.data.x == sd.data.x);

    SyntheticSpec other = spec;
    other.seed = 124;
    CHECK(generate(other).data.y != sd.data.y);

    int treated = 0;
    for (int i = 0; i < sd.data.n(); ++i) {
        const double x = sd.data.x(i, 0);
        const int u = static_cast<int>(sd.u(i));
        CHECK((u == 0 || u == 1));
        CHECK(x >= -2.0);
        CHECK(x <= 2.0);
        // Observed outcome is the potential outcome of the drawn arm.
        CHECK(sd.data.y(i) == (sd.data.a(i) == 1 ? sd.y1(i) : sd.y0(i)));
        // Arm effect is deterministic given x: confounder and noise cancel.
        CHECK(std::abs((sd.y1(i) - sd.y0(i)) -
                       (syn::mean_outcome(1, x) - syn::mean_outcome(0, x))) <= 1e-12);
        // Stored propensity is the true one used for the draw.
        CHECK(sd.e_true(i) == syn::true_propensity(x, u, spec.gamma_star));
        treated += sd.data.a(i);
    }
    CHECK(treated > 800);
    CHECK(treated < 3200);

    CHECK_THROWS_AS(generate(SyntheticSpec{0.5, 100, 1}), ConfigError);
    CHECK_THROWS_AS(generate(SyntheticSpec{2.0, 0, 1}), ConfigError);
}

TEST_CASE("debug export carries the hidden columns") {
    SyntheticSpec spec;
    spec.gamma_star = 2.0;
    spec.n = 25;
    spec.seed = 9;
    const SyntheticData sd = generate(spec);
    const std::string path = scratch_path("debug.csv");
    save_debug_csv(sd, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "y,a,x0,u,y0,y1");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 25);
}
