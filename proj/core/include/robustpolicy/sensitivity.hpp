#pragma once

#include "robustpolicy/errors.hpp"

namespace robustpolicy {

enum class Side { upper, lower };

// Odds-ratio sensitivity parameter Gamma >= 1 and its derived constants.
// Invariants: alpha+ + alpha- = 1; b+ <= 0 <= b-; Gamma = 1 collapses
// everything (b = 0, alpha = 1/2, c = 1).
struct SensitivitySpec {
    double gamma = 1.0;

    explicit SensitivitySpec(double g) : gamma(g) {
        if (!(g >= 1.0)) throw ConfigError("sensitivity parameter must be >= 1");
    }

    double alpha_plus() const { return gamma / (1.0 + gamma); }
    double alpha_minus() const { return 1.0 / (1.0 + gamma); }
    double alpha(Side side) const { return side == Side::upper ? alpha_plus() : alpha_minus(); }

    double b_plus() const { return 1.0 - gamma; }
    double b_minus() const { return 1.0 - 1.0 / gamma; }

    // Weight-box endpoints as functions of the nominal propensity:
    // c-(e) <= 1 <= c+(e) for any e in (0,1).
    double c_plus(double e) const { return b_plus() * e + gamma; }
    double c_minus(double e) const { return b_minus() * e + 1.0 / gamma; }
};

}  // namespace robustpolicy
