#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "robustpolicy/config.hpp"
#include "robustpolicy/dataset.hpp"
#include "robustpolicy/net.hpp"
#include "robustpolicy/oracle.hpp"
#include "robustpolicy/sensitivity.hpp"

namespace robustpolicy {

enum class Provenance { fitted, oracle };

// Per-row nuisance evaluations for one side of the bound, shaped n x d_a.
struct NuisanceTable {
    Eigen::MatrixXd e;      // propensity of each arm at x_i
    Eigen::MatrixXd q;      // conditional quantile at the side's trimming level
    Eigen::MatrixXd mlo;    // E[Y 1{Y <= q} | x_i, a]
    Eigen::MatrixXd mhi;    // E[Y 1{Y >= q} | x_i, a]
    Eigen::MatrixXd cmean;  // E[Y | x_i, a]
};

// Estimated (or exact) conditional functionals of the observed-data law.
// A set is bound to one sensitivity level: trimming levels are alpha_plus
// for the upper side and alpha_minus for the lower side.
class NuisanceSet {
public:
    virtual ~NuisanceSet() = default;

    virtual int arms() const = 0;
    virtual Provenance provenance() const = 0;

    virtual Eigen::VectorXd propensity(const Eigen::VectorXd& x) const = 0;
    virtual double quantile(int a, const Eigen::VectorXd& x, double level) const = 0;
    virtual double lower_trim(int a, const Eigen::VectorXd& x, Side side) const = 0;
    virtual double upper_trim(int a, const Eigen::VectorXd& x, Side side) const = 0;

    // E[Y | x, a]. Default: sum of the upper-side trimmed means, which is a
    // valid conditional-mean estimate whenever the law is atomless at the
    // quantile (the two indicator events then partition the outcome space).
    virtual double conditional_mean(int a, const Eigen::VectorXd& x) const;

    // Batched evaluation over a fold; the default loops rows through the
    // pointwise interface. Implementations may override with batched passes.
    virtual NuisanceTable table(const Dataset& fold, const SensitivitySpec& spec, Side side) const;
};

struct FitEntry {
    std::string key;
    std::string value;
};

struct FitReport {
    std::vector<FitEntry> entries;  // key=value lines: losses, epochs, warnings
    std::vector<std::string> warnings;

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void warn(const std::string& message);
    std::string to_text() const;  // one key=value per line
};

// Nuisances fitted with small feed-forward nets on a training fold:
//  - propensity: softmax head, cross-entropy, probabilities clipped to
//    [eps_clip, 1-eps_clip] and renormalized at evaluation time;
//  - quantiles: pinball loss, one net per (arm, level);
//  - trimmed means: two-stage least squares on the pseudo-outcomes
//    y 1{y <= qhat(x)} and y 1{y >= qhat(x)} (ties enter both), one net per
//    (arm, level, piece).
class FittedNuisance : public NuisanceSet {
public:
    int arms() const override { return d_a_; }
    Provenance provenance() const override { return Provenance::fitted; }

    Eigen::VectorXd propensity(const Eigen::VectorXd& x) const override;
    double quantile(int a, const Eigen::VectorXd& x, double level) const override;
    double lower_trim(int a, const Eigen::VectorXd& x, Side side) const override;
    double upper_trim(int a, const Eigen::VectorXd& x, Side side) const override;
    NuisanceTable table(const Dataset& fold, const SensitivitySpec& spec, Side side) const override;

    double level_for(Side side) const;
    const FeedForwardNet& propensity_net() const { return prop_; }
    static constexpr double kPropensityClip = 0.01;

private:
    friend std::pair<std::shared_ptr<FittedNuisance>, FitReport> assemble(
        const Dataset&, const SensitivitySpec&, const LearnerConfig&, std::uint64_t,
        const FeedForwardNet*);

    struct LevelModels {
        double level = 0.0;
        std::vector<FeedForwardNet> quantile;  // per arm
        std::vector<FeedForwardNet> mlo;       // per arm
        std::vector<FeedForwardNet> mhi;       // per arm
    };

    int find_level(double level) const;  // tolerance 1e-9, throws if absent
    Eigen::MatrixXd propensity_batch(const Eigen::MatrixXd& x) const;

    int d_a_ = 0;
    FeedForwardNet prop_;
    std::vector<LevelModels> levels_;
    double alpha_plus_ = 0.0;
    double alpha_minus_ = 0.0;
};

// Fits the full set on `fold` for the given sensitivity level. At gamma = 1
// the two trimming levels coincide and a single family is fitted and shared.
// Model seeds derive from (seed, role labels) only. Throws DataError if an
// arm has no samples; arms with < 10 samples produce a warning in the report.
// A pre-fitted propensity net may be supplied (sensitivity calibration refits
// only the level-dependent models across probes); it is copied, not refit.
std::pair<std::shared_ptr<FittedNuisance>, FitReport> assemble(
    const Dataset& fold, const SensitivitySpec& spec, const LearnerConfig& config,
    std::uint64_t seed, const FeedForwardNet* reuse_propensity = nullptr);

// Exact nuisances of the confounded synthetic benchmark (mixture closed forms).
class SyntheticOracleNuisance : public NuisanceSet {
public:
    SyntheticOracleNuisance(double gamma_star, const SensitivitySpec& spec);

    int arms() const override { return 2; }
    Provenance provenance() const override { return Provenance::oracle; }

    Eigen::VectorXd propensity(const Eigen::VectorXd& x) const override;
    double quantile(int a, const Eigen::VectorXd& x, double level) const override;
    double lower_trim(int a, const Eigen::VectorXd& x, Side side) const override;
    double upper_trim(int a, const Eigen::VectorXd& x, Side side) const override;
    double conditional_mean(int a, const Eigen::VectorXd& x) const override;

    void bind(const SensitivitySpec& spec);  // sets the trimming levels

private:
    double gamma_star_;
    double alpha_plus_ = 0.5;
    double alpha_minus_ = 0.5;
};

// Exact nuisances of a discrete instance; covariates must match a cell
// exactly. Quantiles use the left-continuous inverse; trimmed means count
// ties on both sides.
class DiscreteOracleNuisance : public NuisanceSet {
public:
    DiscreteOracleNuisance(const DiscreteInstance& instance, const SensitivitySpec& spec);

    int arms() const override { return instance_.d_a; }
    Provenance provenance() const override { return Provenance::oracle; }

    Eigen::VectorXd propensity(const Eigen::VectorXd& x) const override;
    double quantile(int a, const Eigen::VectorXd& x, double level) const override;
    double lower_trim(int a, const Eigen::VectorXd& x, Side side) const override;
    double upper_trim(int a, const Eigen::VectorXd& x, Side side) const override;

private:
    const DiscreteCell& cell_at(const Eigen::VectorXd& x) const;

    DiscreteInstance instance_;
    SensitivitySpec spec_;
};

// Sign-flip wrapper: nuisances of -Y in terms of the base set. Used by the
// antisymmetry property tests.
class NegatedNuisance : public NuisanceSet {
public:
    explicit NegatedNuisance(std::shared_ptr<const NuisanceSet> base) : base_(std::move(base)) {}

    int arms() const override { return base_->arms(); }
    Provenance provenance() const override { return base_->provenance(); }

    Eigen::VectorXd propensity(const Eigen::VectorXd& x) const override {
        return base_->propensity(x);
    }
    double quantile(int a, const Eigen::VectorXd& x, double level) const override {
        return -base_->quantile(a, x, 1.0 - level);
    }
    double lower_trim(int a, const Eigen::VectorXd& x, Side side) const override {
        return -base_->upper_trim(a, x, opposite(side));
    }
    double upper_trim(int a, const Eigen::VectorXd& x, Side side) const override {
        return -base_->lower_trim(a, x, opposite(side));
    }
    double conditional_mean(int a, const Eigen::VectorXd& x) const override {
        return -base_->conditional_mean(a, x);
    }

private:
    static Side opposite(Side s) { return s == Side::upper ? Side::lower : Side::upper; }
    std::shared_ptr<const NuisanceSet> base_;
};

}  // namespace robustpolicy
