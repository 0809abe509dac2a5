#include "robustpolicy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "robustpolicy/bounds.hpp"
#include "robustpolicy/errors.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/rng.hpp"

namespace robustpolicy {

void DiscreteInstance::validate() const {
    if (cells.empty()) throw DataError("discrete instance has no cells");
    if (d_a < 2) throw DataError("discrete instance needs at least two arms");
    double total = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const DiscreteCell& cell = cells[c];
        const std::string where = "cell " + std::to_string(c);
        if (cell.x.size() != d_x) throw DataError(where + ": covariate size mismatch");
        if (!(cell.prob >= 0.0)) throw DataError(where + ": negative probability");
        total += cell.prob;
        if (static_cast<int>(cell.propensity.size()) != d_a)
            throw DataError(where + ": propensity arity mismatch");
        if (static_cast<int>(cell.laws.size()) != d_a)
            throw DataError(where + ": outcome-law arity mismatch");
        double psum = 0.0;
        for (int a = 0; a < d_a; ++a) {
            const double e = cell.propensity[a];
            if (!(e > 0.0 && e < 1.0))
                throw DataError(where + ", arm " + std::to_string(a) + ": propensity outside (0,1)");
            psum += e;
            const OutcomeLaw& law = cell.laws[a];
            if (law.atoms.empty())
                throw DataError(where + ", arm " + std::to_string(a) + ": empty outcome law");
            double msum = 0.0;
            for (const Atom& at : law.atoms) {
                if (!(at.p >= 0.0))
                    throw DataError(where + ", arm " + std::to_string(a) + ": negative atom mass");
                msum += at.p;
            }
            if (std::abs(msum - 1.0) > 1e-9)
                throw DataError(where + ", arm " + std::to_string(a) + ": atom masses do not sum to one");
        }
        if (std::abs(psum - 1.0) > 1e-9) throw DataError(where + ": propensities do not sum to one");
    }
    if (std::abs(total - 1.0) > 1e-9) throw DataError("cell probabilities do not sum to one");
}

DiscreteInstance load_discrete_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open discrete instance file: " + path);

    struct ArmAccum {
        bool has_propensity = false;
        double propensity = 0.0;
        std::vector<Atom> atoms;
    };
    struct CellAccum {
        bool has_meta = false;
        double prob = 0.0;
        double x = 0.0;
        std::map<int, ArmAccum> arms;
    };
    std::map<int, CellAccum> cells;

    std::string line;
    int lineno = 0;
    int max_arm = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        int cell_index = 0, arm = 0;
        double cell_prob = 0.0, x = 0.0, propensity = 0.0, y = 0.0, p = 0.0;
        if (!(ss >> cell_index)) continue;  // blank or comment-only line
        const std::string where = "line " + std::to_string(lineno);
        if (!(ss >> cell_prob >> x >> arm >> propensity >> y >> p))
            throw DataError(where + ": expected 'cell_index cell_prob x arm propensity y p'");
        std::string extra;
        if (ss >> extra) throw DataError(where + ": trailing token '" + extra + "'");
        if (cell_index < 0) throw DataError(where + ": negative cell index");
        if (arm < 0) throw DataError(where + ": negative arm index");

        CellAccum& cell = cells[cell_index];
        if (cell.has_meta) {
            if (std::abs(cell.prob - cell_prob) > 1e-12)
                throw DataError(where + ": cell probability disagrees with an earlier line");
            if (std::abs(cell.x - x) > 1e-12)
                throw DataError(where + ": cell covariate disagrees with an earlier line");
        } else {
            cell.has_meta = true;
            cell.prob = cell_prob;
            cell.x = x;
        }
        ArmAccum& am = cell.arms[arm];
        if (am.has_propensity) {
            if (std::abs(am.propensity - propensity) > 1e-12)
                throw DataError(where + ": propensity disagrees with an earlier line");
        } else {
            am.has_propensity = true;
            am.propensity = propensity;
        }
        am.atoms.push_back(Atom{y, p});
        max_arm = std::max(max_arm, arm);
    }
    if (cells.empty()) throw DataError("discrete instance file has no data lines: " + path);

    DiscreteInstance inst;
    inst.d_a = max_arm + 1;
    inst.d_x = 1;
    int expected = 0;
    for (const auto& [idx, acc] : cells) {
        if (idx != expected)
            throw DataError("cell indices must be contiguous from zero; missing cell " +
                            std::to_string(expected));
        ++expected;
        DiscreteCell cell;
        cell.x = Eigen::VectorXd::Constant(1, acc.x);
        cell.prob = acc.prob;
        cell.propensity.assign(inst.d_a, 0.0);
        cell.laws.resize(inst.d_a);
        for (const auto& [arm, am] : acc.arms) {
            cell.propensity[arm] = am.propensity;
            cell.laws[arm].atoms = am.atoms;
        }
        inst.cells.push_back(std::move(cell));
    }
    inst.validate();
    return inst;
}

void save_discrete_instance(const DiscreteInstance& instance, const std::string& path) {
    if (instance.d_x != 1)
        throw DataError("text format for discrete instances supports scalar covariates only");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "# cell_index cell_prob x arm propensity y p\n";
    for (std::size_t c = 0; c < instance.cells.size(); ++c) {
        const DiscreteCell& cell = instance.cells[c];
        for (int a = 0; a < instance.d_a; ++a) {
            for (const Atom& at : cell.laws[a].atoms) {
                out << c << ' ' << format_double(cell.prob) << ' ' << format_double(cell.x(0))
                    << ' ' << a << ' ' << format_double(cell.propensity[a]) << ' '
                    << format_double(at.y) << ' ' << format_double(at.p) << '\n';
            }
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

LpSolution lp_sharp_capo(const OutcomeLaw& law, double e, const SensitivitySpec& spec, Side side) {
    const int m = static_cast<int>(law.atoms.size());
    if (m == 0) throw DataError("outcome law has no atoms");
    const double w_bottom = (side == Side::upper) ? spec.c_minus(e) : spec.c_plus(e);
    const double w_top = (side == Side::upper) ? spec.c_plus(e) : spec.c_minus(e);
    const double alpha = spec.alpha(side);

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return law.atoms[i].y < law.atoms[j].y; });

    LpSolution sol;
    sol.weights.resize(m);
    double cum = 0.0;
    int fractional = 0;
    constexpr double kEdge = 1e-12;
    for (int k = 0; k < m; ++k) {
        const Atom& at = law.atoms[order[k]];
        if (at.p <= 0.0) {
            sol.weights(order[k]) = w_top;
            continue;
        }
        const double take = std::clamp(alpha - cum, 0.0, at.p);  // mass at the bottom weight
        sol.weights(order[k]) = (take * w_bottom + (at.p - take) * w_top) / at.p;
        if (take > kEdge && take < at.p - kEdge && w_bottom != w_top) {
            ++fractional;
            sol.fractional_index = order[k];
        }
        cum += at.p;
    }
    if (fractional > 1) throw NumericError("sharp-bound LP produced more than one fractional atom");

    double mean = 0.0, value = 0.0;
    for (int i = 0; i < m; ++i) {
        mean += sol.weights(i) * law.atoms[i].p;
        value += sol.weights(i) * law.atoms[i].p * law.atoms[i].y;
    }
    if (std::abs(mean - 1.0) > 1e-12)
        throw NumericError("sharp-bound LP weights do not average to one");
    sol.value = value;
    return sol;
}

VerifyReport verify_closed_form(const DiscreteInstance& instance, const SensitivitySpec& spec,
                                double tol) {
    instance.validate();
    DiscreteOracleNuisance nuis(instance, spec);
    VerifyReport rep;
    for (const DiscreteCell& cell : instance.cells) {
        for (int a = 0; a < instance.d_a; ++a) {
            for (const Side side : {Side::upper, Side::lower}) {
                const double closed = sharp_capo(nuis, spec, a, cell.x, side);
                const LpSolution lp = lp_sharp_capo(cell.laws[a], cell.propensity[a], spec, side);
                rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(closed - lp.value));
                ++rep.comparisons;
            }
        }
    }
    rep.pass = rep.max_abs_diff <= tol;
    return rep;
}

double population_value_bound(const DiscreteInstance& instance,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& probs_at,
                              const SensitivitySpec& spec, Side side) {
    double total = 0.0;
    for (const DiscreteCell& cell : instance.cells) {
        const Eigen::VectorXd pi = probs_at(cell.x);
        if (pi.size() != instance.d_a) throw DataError("policy arity does not match instance arms");
        for (int a = 0; a < instance.d_a; ++a)
            total += cell.prob * pi(a) * lp_sharp_capo(cell.laws[a], cell.propensity[a], spec, side).value;
    }
    return total;
}

namespace {

int draw_categorical(RandomStream& rng, const std::vector<double>& probs) {
    const double u = rng.uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

Dataset sample_dataset(const DiscreteInstance& instance, int n, std::uint64_t seed) {
    instance.validate();
    if (n < 1) throw ConfigError("n must be >= 1");
    Dataset data;
    data.d_a = instance.d_a;
    data.y.resize(n);
    data.a.resize(n);
    data.x.resize(n, instance.d_x);

    std::vector<double> cell_probs;
    cell_probs.reserve(instance.cells.size());
    for (const DiscreteCell& cell : instance.cells) cell_probs.push_back(cell.prob);

    RandomStream rng(seed);
    for (int i = 0; i < n; ++i) {
        const int c = draw_categorical(rng, cell_probs);
        const DiscreteCell& cell = instance.cells[c];
        const int a = draw_categorical(rng, cell.propensity);
        const OutcomeLaw& law = cell.laws[a];
        const double u = rng.uniform01();
        double cum = 0.0;
        int k = static_cast<int>(law.atoms.size()) - 1;
        for (std::size_t j = 0; j < law.atoms.size(); ++j) {
            cum += law.atoms[j].p;
            if (u < cum) {
                k = static_cast<int>(j);
                break;
            }
        }
        data.x.row(i) = cell.x.transpose();
        data.a(i) = a;
        data.y(i) = law.atoms[k].y;
    }
    return data;
}

namespace {

// Splits `total` into k positive parts that sum back to `total` exactly in
// floating point (the last part is the residual).
std::vector<double> split_mass(RandomStream& rng, double total, int k) {
    std::vector<double> u(k);
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
        u[i] = rng.uniform(0.2, 1.0);
        s += u[i];
    }
    std::vector<double> parts(k);
    double used = 0.0;
    for (int i = 0; i + 1 < k; ++i) {
        parts[i] = total * (u[i] / s);
        used += parts[i];
    }
    parts[k - 1] = total - used;
    return parts;
}

// One outcome law whose zero-valued atom straddles both trimming levels: the
// CDF enters the atom strictly below the lower level and leaves it strictly
// above the upper level, so the level-set quantiles are exactly zero and the
// trimmed means ignore the straddling atom entirely.
OutcomeLaw boundary_aligned_law(RandomStream& rng, const SensitivitySpec& spec) {
    const double a_lo = spec.alpha_minus();
    const double a_hi = spec.alpha_plus();

    const int k_neg = 1 + static_cast<int>(rng.below(4));
    const int k_pos = 1 + static_cast<int>(rng.below(4));
    const double neg_total = rng.uniform(0.1 * a_lo, 0.9 * a_lo);
    const std::vector<double> neg_parts = split_mass(rng, neg_total, k_neg);

    OutcomeLaw law;
    double placed = 0.0;
    for (int i = 0; i < k_neg; ++i) {
        law.atoms.push_back(Atom{rng.uniform(-3.0, -0.1), neg_parts[i]});
        placed += neg_parts[i];
    }
    // Zero atom: mass (a_hi - placed) plus a strictly positive overshoot so the
    // upper level cuts inside the atom with a margin far above rounding error.
    const double overshoot = rng.uniform(0.01, 0.05) * (1.0 - a_hi);
    const double zero_mass = (a_hi - placed) + overshoot;
    law.atoms.push_back(Atom{0.0, zero_mass});
    placed += zero_mass;

    const double pos_total = 1.0 - placed;
    const std::vector<double> pos_parts = split_mass(rng, pos_total, k_pos);
    for (int i = 0; i < k_pos; ++i) law.atoms.push_back(Atom{rng.uniform(0.1, 3.0), pos_parts[i]});
    return law;
}

}  // namespace

BoundaryAlignedCase make_boundary_aligned_instance(std::uint64_t seed) {
    RandomStream rng(derive_seed(seed, "boundary-aligned"));
    BoundaryAlignedCase out;
    out.gamma = rng.uniform(1.05, 10.0);
    const SensitivitySpec spec(out.gamma);

    const int n_cells = 1 + static_cast<int>(rng.below(3));
    DiscreteInstance& inst = out.instance;
    inst.d_a = 2;
    inst.d_x = 1;

    std::vector<double> raw(n_cells);
    double rsum = 0.0;
    for (int c = 0; c < n_cells; ++c) {
        raw[c] = rng.uniform(0.2, 1.0);
        rsum += raw[c];
    }
    double used = 0.0;
    for (int c = 0; c < n_cells; ++c) {
        DiscreteCell cell;
        cell.x = Eigen::VectorXd::Constant(1, rng.uniform(-2.0, 2.0) + 10.0 * c);
        cell.prob = (c + 1 < n_cells) ? raw[c] / rsum : 1.0 - used;
        used += cell.prob;
        const double e1 = rng.uniform(0.05, 0.95);
        cell.propensity = {1.0 - e1, e1};
        cell.laws.resize(2);
        for (int a = 0; a < 2; ++a) cell.laws[a] = boundary_aligned_law(rng, spec);
        inst.cells.push_back(std::move(cell));
    }
    inst.validate();
    return out;
}

OutcomeLaw discretize_uniform01(int n) {
    if (n < 1) throw ConfigError("discretization size must be >= 1");
    OutcomeLaw law;
    law.atoms.reserve(n);
    const double p = 1.0 / n;
    for (int i = 0; i < n; ++i) law.atoms.push_back(Atom{(i + 0.5) / n, p});
    return law;
}

}  // namespace robustpolicy
