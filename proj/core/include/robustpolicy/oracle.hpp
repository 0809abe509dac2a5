#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robustpolicy/dataset.hpp"
#include "robustpolicy/sensitivity.hpp"

namespace robustpolicy {

// Finite-support ground truth used to certify the closed-form bounds against
// an independent linear-program solution.

struct Atom {
    double y = 0.0;
    double p = 0.0;
};

struct OutcomeLaw {
    std::vector<Atom> atoms;  // probabilities sum to one; any order
};

struct DiscreteCell {
    Eigen::VectorXd x;                // covariate value represented by the cell
    double prob = 0.0;                // P(X = x)
    std::vector<double> propensity;   // P(A = a | X = x), one entry per arm
    std::vector<OutcomeLaw> laws;     // law of Y | X = x, A = a, one per arm
};

struct DiscreteInstance {
    std::vector<DiscreteCell> cells;
    int d_a = 0;
    int d_x = 1;

    void validate() const;  // throws DataError on inconsistent masses/shapes
};

// Text format: one line per (cell, arm, atom):
//   cell_index cell_prob x arm propensity y p
// '#' starts a comment. Values repeated across lines (cell_prob, x, and the
// per-arm propensity) must agree to 1e-12.
DiscreteInstance load_discrete_instance(const std::string& path);
void save_discrete_instance(const DiscreteInstance& instance, const std::string& path);

struct LpSolution {
    double value = 0.0;
    Eigen::VectorXd weights;    // per-atom average weight, original atom order
    int fractional_index = -1;  // atom with weight strictly between the caps, -1 if none
};

// Sharp conditional bound as a finite LP: choose per-atom weights in
// [c_minus(e), c_plus(e)] with mean one to extremize E[w Y]. Solved in closed
// form by sorting; asserts at most one fractional atom and exact mean one.
LpSolution lp_sharp_capo(const OutcomeLaw& law, double e, const SensitivitySpec& spec, Side side);

struct VerifyReport {
    double max_abs_diff = 0.0;
    int comparisons = 0;
    bool pass = false;
};

// Compares the library closed form against the LP for every (cell, arm, side).
VerifyReport verify_closed_form(const DiscreteInstance& instance, const SensitivitySpec& spec,
                                double tol);

// Population bound on a discrete instance: sum over cells and arms of
// cell probability x policy probability x LP bound.
double population_value_bound(const DiscreteInstance& instance,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& probs_at,
                              const SensitivitySpec& spec, Side side);

// IID draws (x, a, y) from the instance's joint law.
Dataset sample_dataset(const DiscreteInstance& instance, int n, std::uint64_t seed);

// Randomized instance family on which the closed form and the LP agree to
// machine precision at the returned gamma: each outcome law places an atom at
// zero whose upper CDF edge lands exactly on the upper trimming level while
// the lower level cuts strictly inside that same zero-valued atom.
struct BoundaryAlignedCase {
    DiscreteInstance instance;
    double gamma = 1.0;
};
BoundaryAlignedCase make_boundary_aligned_instance(std::uint64_t seed);

// Midpoint discretization of Uniform(0,1) into n equally likely atoms.
OutcomeLaw discretize_uniform01(int n);

}  // namespace robustpolicy
