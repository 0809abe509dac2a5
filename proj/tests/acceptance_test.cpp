// Acceptance gate for the shipped guarantees. Each criterion prints one
// PASS/FAIL line with its wall time; failures list their reasons indented
// underneath. The process exits nonzero if any criterion fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "robustpolicy/bounds.hpp"
#include "robustpolicy/dgp.hpp"
#include "robustpolicy/learn.hpp"
#include "robustpolicy/nuisance.hpp"
#include "robustpolicy/oracle.hpp"
#include "robustpolicy/policy.hpp"
#include "robustpolicy/rng.hpp"

namespace fs = std::filesystem;
using namespace robustpolicy;
namespace syn = robustpolicy::synthetic;

namespace {

using Notes = std::vector<std::string>;

bool expect(bool ok, const std::string& why, Notes& notes) {
    if (!ok) notes.push_back(why);
    return ok;
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        const fs::path p =
            fs::temp_directory_path() / ("robust_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

Dataset synthetic_fold(double gamma_star, int n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.gamma_star = gamma_star;
    spec.n = n;
    spec.seed = seed;
    return generate(spec).data;
}

Eigen::MatrixXd random_policy_matrix(int n, int d_a, std::uint64_t seed) {
    RandomStream rng(seed);
    Eigen::MatrixXd scores(n, d_a);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < d_a; ++a) scores(i, a) = rng.uniform(-1.0, 1.0);
    return softmax_rows(scores);
}

// ---------------------------------------------------------------------------
// criterion 1: the closed-form conditional bounds equal an independent LP on
// boundary-aligned instances, and discretizing a continuous law tightens the
// LP toward the continuous closed form.

double continuous_uniform_bound(double e, const SensitivitySpec& spec, Side side) {
    // For Y ~ U(0,1) the level-alpha quantile is alpha and the partial means
    // are q^2/2 and (1-q^2)/2.
    const double alpha = spec.alpha(side);
    const double lo_part = alpha * alpha / 2.0;
    const double hi_part = (1.0 - alpha * alpha) / 2.0;
    const double w_lo = side == Side::upper ? spec.c_minus(e) : spec.c_plus(e);
    const double w_hi = side == Side::upper ? spec.c_plus(e) : spec.c_minus(e);
    return w_lo * lo_part + w_hi * hi_part;
}

bool criterion_lp_certification(Notes& notes) {
    bool ok = true;

    // Reference binary instance: one cell, both arms share a two-atom law.
    DiscreteInstance binary;
    binary.d_a = 2;
    DiscreteCell cell;
    cell.x = Eigen::VectorXd::Zero(1);
    cell.prob = 1.0;
    cell.propensity = {0.5, 0.5};
    OutcomeLaw law;
    law.atoms = {Atom{0.0, 2.0 / 3.0}, Atom{1.0, 1.0 / 3.0}};
    cell.laws = {law, law};
    binary.cells.push_back(cell);
    binary.validate();
    const VerifyReport ref = verify_closed_form(binary, SensitivitySpec(2.0), 1e-9);
    ok &= expect(ref.pass, "reference binary instance disagrees with the LP by " +
                               fmt(ref.max_abs_diff),
                 notes);

    for (std::uint64_t seed = 1; seed < 50; ++seed) {
        const BoundaryAlignedCase bc = make_boundary_aligned_instance(seed);
        const VerifyReport rep =
            verify_closed_form(bc.instance, SensitivitySpec(bc.gamma), 1e-9);
        if (!rep.pass) {
            ok &= expect(false,
                         "seed " + std::to_string(seed) + ": closed form vs LP differs by " +
                             fmt(rep.max_abs_diff),
                         notes);
        }
    }

    // Discretization refinement: ten times the atoms must shrink the gap to
    // the continuous bound at least fivefold. The gap scales like
    // f(1-f)/(2 N^2) with f the fractional part of alpha*N, so the probed
    // levels keep alpha*N non-integral at both resolutions.
    const OutcomeLaw coarse = discretize_uniform01(100);
    const OutcomeLaw fine = discretize_uniform01(1000);
    for (const auto& [e, gamma] : std::vector<std::pair<double, double>>{{0.3, 3.7}, {0.7, 2.5}}) {
        const SensitivitySpec spec(gamma);
        for (Side side : {Side::upper, Side::lower}) {
            const double exact = continuous_uniform_bound(e, spec, side);
            const double d100 = std::abs(lp_sharp_capo(coarse, e, spec, side).value - exact);
            const double d1000 = std::abs(lp_sharp_capo(fine, e, spec, side).value - exact);
            ok &= expect(d100 > 0.0 && d1000 * 5.0 <= d100,
                         "discretization gap did not shrink 5x at e=" + fmt(e) +
                             " gamma=" + fmt(gamma) + ": " + fmt(d100) + " -> " + fmt(d1000),
                         notes);
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 2: weight-envelope identities across the parameter range.

bool criterion_identities(Notes& notes) {
    bool ok = true;
    RandomStream rng(2026);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
        // Log-uniform level keeps the ratio identity away from the
        // catastrophic cancellation at gamma -> 1.
        const double gamma = std::exp(rng.uniform(std::log(1.01), std::log(100.0)));
        const double e = rng.uniform(0.05, 0.95);
        const SensitivitySpec spec(gamma);
        const double cp = spec.c_plus(e);
        const double cm = spec.c_minus(e);
        bad += std::abs(spec.alpha_plus() + spec.alpha_minus() - 1.0) > 1e-12;
        bad += std::abs(gamma * cm + cp - (1.0 + gamma)) > 1e-12;
        bad += std::abs((cp - 1.0) / (cp - cm) - spec.alpha_plus()) > 1e-12;
        bad += !(cm <= 1.0 && 1.0 <= cp);
        bad += std::abs(spec.c_plus(0.0) - gamma) > 1e-12;
        bad += std::abs(spec.c_minus(0.0) - 1.0 / gamma) > 1e-12;
        bad += std::abs(spec.c_plus(1.0) - 1.0) > 1e-12;
        bad += std::abs(spec.c_minus(1.0) - 1.0) > 1e-12;
    }
    ok &= expect(bad == 0, std::to_string(bad) + " identity violations over 1000 draws", notes);
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 3: at level one the corrected estimator collapses onto the
// unconfounded doubly robust estimator, with shared fitted nuisances.

bool criterion_level_one_collapse(Notes& notes) {
    bool ok = true;
    LearnerConfig learner;
    learner.hidden = {8};
    learner.lr = 0.01;
    learner.epochs = 30;
    learner.patience = 5;
    learner.batch = 32;
    const SensitivitySpec one(1.0);

    for (std::uint64_t s = 0; s < 10; ++s) {
        const Dataset data = synthetic_fold(3.0, 600, derive_seed(s, "crit3"));
        const auto [fold1, fold2] = split(data, 0.5, derive_seed(s, "split"));
        auto [nuis, report] = assemble(fold1, one, learner, derive_seed(s, "nuisance"));

        const Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(fold2.n(), 2, 0.5);
        const double eff =
            value_bound(*nuis, pi, fold2, one, Side::upper, Estimator::efficient).estimate;
        const double dr = dr_value(*nuis, pi, fold2).estimate;
        if (std::abs(eff - dr) > 1e-9)
            ok &= expect(false,
                         "seed " + std::to_string(s) + ": |efficient - dr| = " +
                             fmt(std::abs(eff - dr)),
                         notes);

        const NuisanceTable table = nuis->table(fold2, one, Side::upper);
        const Eigen::MatrixXd w_eff =
            value_coeffs(fold2, table, one, Side::upper, Estimator::efficient);
        const Eigen::MatrixXd w_dr = value_coeffs(fold2, table, one, Side::upper, Estimator::dr);
        const double row_diff = (w_eff - w_dr).cwiseAbs().maxCoeff();
        if (row_diff > 1e-9)
            ok &= expect(false,
                         "seed " + std::to_string(s) + ": per-row coefficient gap " +
                             fmt(row_diff),
                         notes);
    }
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 4: sign-flip antisymmetry and linearity in the policy, for all
// four estimators.

bool criterion_symmetries(Notes& notes) {
    bool ok = true;
    const Dataset fold = synthetic_fold(4.0, 2000, 404);
    Dataset neg_fold = fold;
    neg_fold.y = -neg_fold.y;
    const SensitivitySpec spec(3.0);
    auto base = std::make_shared<SyntheticOracleNuisance>(4.0, spec);
    auto neg = std::make_shared<NegatedNuisance>(base);
    const Eigen::MatrixXd pi = random_policy_matrix(fold.n(), 2, 405);

    // Antisymmetry: the lower bound of Y equals minus the upper bound of -Y.
    for (Estimator kind : {Estimator::efficient, Estimator::plugin}) {
        const BoundReport lower = value_bound(*base, pi, fold, spec, Side::lower, kind);
        const BoundReport upper = value_bound(*neg, pi, neg_fold, spec, Side::upper, kind);
        const double worst =
            (lower.per_sample + upper.per_sample).cwiseAbs().maxCoeff();
        ok &= expect(worst <= 1e-9,
                     "antisymmetry gap " + fmt(worst) + " for " + to_string(kind), notes);
    }
    {
        const BoundReport a = ipw_value(*base, pi, fold);
        const BoundReport b = ipw_value(*neg, pi, neg_fold);
        const double worst = (a.per_sample + b.per_sample).cwiseAbs().maxCoeff();
        ok &= expect(worst <= 1e-9, "antisymmetry gap " + fmt(worst) + " for ipw", notes);
    }
    {
        const BoundReport a = dr_value(*base, pi, fold);
        const BoundReport b = dr_value(*neg, pi, neg_fold);
        const double worst = (a.per_sample + b.per_sample).cwiseAbs().maxCoeff();
        ok &= expect(worst <= 1e-9, "antisymmetry gap " + fmt(worst) + " for dr", notes);
    }

    // Linearity: a mixture of policies gives the mixture of estimates.
    const Eigen::MatrixXd p2 = random_policy_matrix(fold.n(), 2, 406);
    const double lam = 0.37;
    const Eigen::MatrixXd mix = lam * pi + (1.0 - lam) * p2;
    for (Estimator kind :
         {Estimator::efficient, Estimator::plugin, Estimator::ipw, Estimator::dr}) {
        auto eval = [&](const Eigen::MatrixXd& p) {
            if (kind == Estimator::ipw) return ipw_value(*base, p, fold).estimate;
            if (kind == Estimator::dr) return dr_value(*base, p, fold).estimate;
            return value_bound(*base, p, fold, spec, Side::upper, kind).estimate;
        };
        const double gap = std::abs(eval(mix) - (lam * eval(pi) + (1.0 - lam) * eval(p2)));
        ok &= expect(gap <= 1e-10, "linearity gap " + fmt(gap) + " for " + to_string(kind),
                     notes);
    }
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 5: analytic policy gradients match central finite differences at
// random checkpoints.

bool criterion_gradient_check(Notes& notes) {
    bool ok = true;
    const Dataset fold = synthetic_fold(2.0, 300, 505);
    const SensitivitySpec spec(2.0);
    SyntheticOracleNuisance nuis(2.0, spec);
    const TrainingProblem problem =
        prepare_training(fold, nuis, spec, Estimator::efficient, Objective::value, nullptr);

    const double h = 1e-5;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SoftmaxPolicy policy = SoftmaxPolicy::mlp(1, {8}, 2, seed, InitScheme::FanInUniform);
        const Eigen::VectorXd grad = problem.gradient(policy);
        const Eigen::VectorXd theta = policy.params();
        double worst = 0.0;
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            Eigen::VectorXd t = theta;
            t(j) = theta(j) + h;
            policy.set_params(t);
            const double up = problem.objective(policy);
            t(j) = theta(j) - h;
            policy.set_params(t);
            const double down = problem.objective(policy);
            worst = std::max(worst, std::abs((up - down) / (2.0 * h) - grad(j)));
        }
        const double rel = worst / std::max(1.0, grad.cwiseAbs().maxCoeff());
        if (rel > 1e-4)
            ok &= expect(false,
                         "checkpoint " + std::to_string(seed) + ": gradient error " + fmt(rel),
                         notes);
    }
    return ok;
}

// ---------------------------------------------------------------------------
// sweep plumbing for criteria 6-8: run the CLI, parse summary.csv.

struct SummaryRow {
    double gamma_star = 0.0;
    double gamma = 0.0;
    int n = 0;
    std::string estimator;
    double mean_estimate = 0.0;
    double mean_true_value = 0.0;
    double mean_true_regret = 0.0;
};

// Training configuration shared by the benchmark sweeps (criteria 6-8). The
// worst-case objective needs enough policy capacity to represent the sign
// structure of the optimal rule and plain full-batch descent to stay
// deterministic.
const char* kSweepFlags =
    " --objective regret --baseline uniform --rho 0.5"
    " --policy-mlp --policy-hidden 32 --policy-init kink-grid --lambda 0.1 --iters 2000"
    " --nuisance-hidden 16 --nuisance-epochs 150 --nuisance-lr 0.01 --nuisance-batch 64"
    " --nuisance-patience 10";

bool run_sweep(const std::string& grid_args, const fs::path& dir,
               std::vector<SummaryRow>& rows, Notes& notes) {
    fs::create_directories(dir);
    const std::string cmd = std::string(ROBUST_POLICY_CLI_PATH) + " sweep " + grid_args +
                            kSweepFlags + " --out-dir " + dir.string() + " > " +
                            (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (!expect(code == 0, "sweep exited with code " + std::to_string(code), notes)) return false;

    std::ifstream fail_in(dir / "failures.csv");
    std::string line;
    std::getline(fail_in, line);  // header
    while (std::getline(fail_in, line))
        if (!line.empty()) expect(false, "sweep failure row: " + line, notes);

    std::ifstream in(dir / "summary.csv");
    if (!expect(in.good(), "summary.csv missing", notes)) return false;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() < 13) {
            expect(false, "short summary row: " + line, notes);
            continue;
        }
        SummaryRow row;
        row.gamma_star = std::stod(f[1]);
        row.gamma = std::stod(f[2]);
        row.n = std::stoi(f[3]);
        row.estimator = f[4];
        row.mean_estimate = std::stod(f[7]);
        row.mean_true_value = std::stod(f[9]);
        row.mean_true_regret = std::stod(f[11]);
        rows.push_back(row);
    }
    return true;
}

const SummaryRow* find_row(const std::vector<SummaryRow>& rows, double gs, double g, int n,
                           const std::string& est) {
    for (const SummaryRow& r : rows)
        if (std::abs(r.gamma_star - gs) < 1e-9 && std::abs(r.gamma - g) < 1e-9 && r.n == n &&
            r.estimator == est)
            return &r;
    return nullptr;
}

const std::string kSeedList = "0 1 2 3 4 5 6 7 8 9";

// criterion 6: trained-policy quality bands when the assumed level matches
// the true confounding strength.

bool criterion_matched_level_bands(Notes& notes) {
    std::vector<SummaryRow> rows;
    if (!run_sweep("--experiment c6 --gamma-star 1 5 7 10 --n 8000 --seeds " + kSeedList +
                       " --estimators efficient dr",
                   scratch_dir() / "c6", rows, notes))
        return false;

    bool ok = true;
    auto value_of = [&](double gs, const std::string& est) -> double {
        const SummaryRow* r = find_row(rows, gs, gs, 8000, est);
        if (r == nullptr) {
            ok &= expect(false, "missing summary row gs=" + fmt(gs) + " " + est, notes);
            return 1e18;
        }
        notes.push_back("measured: gamma*=" + fmt(gs) + " " + est +
                        " mean_true_value=" + fmt(r->mean_true_value));
        return r->mean_true_value;
    };

    const double eff1 = value_of(1.0, "efficient");
    const double dr1 = value_of(1.0, "dr");
    ok &= expect(eff1 <= -1.0, "gamma*=1 efficient band: " + fmt(eff1) + " > -1.0", notes);
    ok &= expect(dr1 <= -1.0, "gamma*=1 dr band: " + fmt(dr1) + " > -1.0", notes);

    const double eff5 = value_of(5.0, "efficient");
    const double dr5 = value_of(5.0, "dr");
    ok &= expect(eff5 <= -0.6, "gamma*=5 efficient band: " + fmt(eff5) + " > -0.6", notes);
    ok &= expect(dr5 >= -0.55, "gamma*=5 dr band: " + fmt(dr5) + " < -0.55", notes);

    const double eff7 = value_of(7.0, "efficient");
    const double dr7 = value_of(7.0, "dr");
    ok &= expect(eff7 <= -0.5, "gamma*=7 efficient band: " + fmt(eff7) + " > -0.5", notes);
    ok &= expect(dr7 >= -0.35, "gamma*=7 dr band: " + fmt(dr7) + " < -0.35", notes);

    const double eff10 = value_of(10.0, "efficient");
    const double dr10 = value_of(10.0, "dr");
    ok &= expect(eff5 < dr5, "ordering at gamma*=5", notes);
    ok &= expect(eff7 < dr7, "ordering at gamma*=7", notes);
    ok &= expect(eff10 < dr10, "ordering at gamma*=10", notes);
    return ok;
}

// criterion 7: robustness across misspecified levels at strong confounding.

bool criterion_misspecified_levels(Notes& notes) {
    std::vector<SummaryRow> rows;
    if (!run_sweep("--experiment c7 --gamma-star 7 --gamma 2 7 20 100 --n 8000 --seeds " +
                       kSeedList + " --estimators efficient dr",
                   scratch_dir() / "c7", rows, notes))
        return false;

    bool ok = true;
    for (const double g : {2.0, 7.0, 20.0, 100.0}) {
        const SummaryRow* eff = find_row(rows, 7.0, g, 8000, "efficient");
        const SummaryRow* dr = find_row(rows, 7.0, g, 8000, "dr");
        if (eff == nullptr || dr == nullptr) {
            ok &= expect(false, "missing summary rows at gamma=" + fmt(g), notes);
            continue;
        }
        notes.push_back("measured: gamma=" + fmt(g) +
                        " efficient=" + fmt(eff->mean_true_value) +
                        " dr=" + fmt(dr->mean_true_value));
        ok &= expect(eff->mean_true_value <= -0.3,
                     "efficient band at gamma=" + fmt(g) + ": " + fmt(eff->mean_true_value),
                     notes);
        ok &= expect(eff->mean_true_value < dr->mean_true_value,
                     "efficient not better than dr at gamma=" + fmt(g), notes);
    }
    return ok;
}

// criterion 8: the corrected estimator dominates the uncorrected plugin
// across sample sizes, in mean true regret.

bool criterion_sample_size_dominance(Notes& notes) {
    std::vector<SummaryRow> rows;
    if (!run_sweep("--experiment c8 --gamma-star 5 --n 500 2000 8000 --seeds " + kSeedList +
                       " --estimators efficient plugin",
                   scratch_dir() / "c8", rows, notes))
        return false;

    bool ok = true;
    for (const int n : {500, 2000, 8000}) {
        const SummaryRow* eff = find_row(rows, 5.0, 5.0, n, "efficient");
        const SummaryRow* plug = find_row(rows, 5.0, 5.0, n, "plugin");
        if (eff == nullptr || plug == nullptr) {
            ok &= expect(false, "missing summary rows at n=" + std::to_string(n), notes);
            continue;
        }
        notes.push_back("measured: n=" + std::to_string(n) +
                        " efficient_regret=" + fmt(eff->mean_true_regret) +
                        " plugin_regret=" + fmt(plug->mean_true_regret));
        ok &= expect(eff->mean_true_regret <= plug->mean_true_regret,
                     "corrected regret above plugin at n=" + std::to_string(n), notes);
    }
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 9: certificate envelope arithmetic.

bool criterion_certificate(Notes& notes) {
    bool ok = true;
    const Certificate value = certificate(2.0, 1.0, 0.05, 8000, -1.0, Objective::value);
    const Certificate regret = certificate(2.0, 1.0, 0.05, 8000, -1.0, Objective::regret);
    const Certificate value4 = certificate(2.0, 1.0, 0.05, 32000, -1.0, Objective::value);

    ok &= expect(std::abs(value.c_v - 7.0) <= 1e-12,
                 "C_v(c_y=1, gamma=2) = " + fmt(value.c_v) + ", expected 7", notes);
    ok &= expect(std::abs(regret.slack - 2.0 * value.slack) <= 1e-12,
                 "regret slack is not twice the value slack", notes);
    ok &= expect(std::abs(value4.slack - 0.5 * value.slack) <= 1e-12,
                 "slack did not halve when n grew fourfold", notes);
    return ok;
}

// ---------------------------------------------------------------------------
// criterion 10: synthetic process diagnostics.

bool criterion_process_diagnostics(Notes& notes) {
    bool ok = true;

    // The two arms' mean outcomes are exact negatives, so the uniform policy
    // has true value zero.
    const double uniform_value = true_value(BaselinePolicy::uniform(2));
    ok &= expect(std::abs(uniform_value) <= 1e-10,
                 "uniform-policy value " + fmt(uniform_value), notes);

    // The hidden propensity sits exactly on the odds-ratio boundary.
    RandomStream rng(1010);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(-2.0, 2.0);
        const double gs = std::exp(rng.uniform(0.0, std::log(20.0)));
        const double design = syn::design_propensity(x);
        const double odds_design = design / (1.0 - design);
        const double e1 = syn::true_propensity(x, 1, gs);
        const double e0 = syn::true_propensity(x, 0, gs);
        worst = std::max(worst, std::abs((e1 / (1.0 - e1)) / odds_design - gs) / gs);
        worst = std::max(worst, std::abs((e0 / (1.0 - e0)) / odds_design - 1.0 / gs) * gs);
    }
    ok &= expect(worst <= 1e-12, "odds-ratio boundary violated by " + fmt(worst), notes);

    // Empirical treatment frequencies track the marginal propensity within
    // three standard deviations in every covariate bucket.
    const SyntheticData sd = [&] {
        SyntheticSpec spec;
        spec.gamma_star = 5.0;
        spec.n = 100000;
        spec.seed = 77;
        return generate(spec);
    }();
    constexpr int kBuckets = 20;
    std::vector<double> sum_a(kBuckets, 0.0), sum_m(kBuckets, 0.0), sum_var(kBuckets, 0.0);
    for (int i = 0; i < sd.data.n(); ++i) {
        const double x = sd.data.x(i, 0);
        int b = static_cast<int>((x + 2.0) / 4.0 * kBuckets);
        b = std::min(std::max(b, 0), kBuckets - 1);
        const double m = syn::marginal_propensity(x, 5.0);
        sum_a[b] += sd.data.a(i);
        sum_m[b] += m;
        sum_var[b] += m * (1.0 - m);
    }
    for (int b = 0; b < kBuckets; ++b) {
        const double dev = std::abs(sum_a[b] - sum_m[b]);
        const double limit = 3.0 * std::sqrt(sum_var[b]);
        if (dev > limit)
            ok &= expect(false,
                         "bucket " + std::to_string(b) + ": |" + fmt(dev) + "| > " + fmt(limit),
                         notes);
    }
    return ok;
}

}  // namespace

int main() {
    struct Criterion {
        std::string label;
        double budget_seconds;
        std::function<bool(Notes&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"closed form equals the LP oracle", 5.0, criterion_lp_certification},
        {"weight-envelope identities", 1.0, criterion_identities},
        {"level-one collapse onto dr", 30.0, criterion_level_one_collapse},
        {"sign-flip antisymmetry and linearity", 30.0, criterion_symmetries},
        {"policy gradients vs finite differences", 60.0, criterion_gradient_check},
        {"matched-level training bands", 1200.0, criterion_matched_level_bands},
        {"misspecified-level robustness", 1200.0, criterion_misspecified_levels},
        {"corrected vs plugin across sample sizes", 1800.0, criterion_sample_size_dominance},
        {"certificate scaling", 1.0, criterion_certificate},
        {"synthetic process diagnostics", 60.0, criterion_process_diagnostics},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Notes notes;
        bool ok = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ok = criteria[i].run(notes);
        } catch (const std::exception& e) {
            notes.push_back(std::string("exception: ") + e.what());
            ok = false;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > criteria[i].budget_seconds) {
            notes.push_back("over time budget: " + fmt(secs) + "s > " +
                            fmt(criteria[i].budget_seconds) + "s");
            ok = false;
        }
        failures += !ok;
        std::cout << "criterion " << std::setw(2) << std::setfill('0') << (i + 1)
                  << std::setfill(' ') << " [" << criteria[i].label << "] "
                  << (ok ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2) << secs
                  << "s)" << std::endl;
        std::cout.unsetf(std::ios::fixed);
        for (const std::string& n : notes) std::cout << "    " << n << '\n';
    }
    if (failures == 0)
        std::cout << "all criteria passed" << std::endl;
    else
        std::cout << "criteria failed: " << failures << std::endl;
    return failures == 0 ? 0 : 1;
}
