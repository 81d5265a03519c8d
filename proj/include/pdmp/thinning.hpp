// Inversion of affine rate bounds for Poisson thinning.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdmp/core.hpp"

namespace pdmp {

// Smallest t with \int_0^t (a + b s)^+ ds = exp_draw, or +infinity when the
// total mass of the bound is below exp_draw (a = b = 0, or b < 0 with mass
// a^2 / (-2b) < exp_draw). This is the proposal-time draw of Poisson
// thinning: exp_draw is a unit exponential variate.
inline double invert_affine_bound(const AffineRateBound& bound, double exp_draw) {
    const double a = bound.intercept;
    const double b = bound.slope;
    if (std::isnan(a) || std::isnan(b) || std::isnan(exp_draw))
        throw std::invalid_argument("invert_affine_bound: NaN input");
    if (a < 0.0)
        throw std::invalid_argument("invert_affine_bound: negative intercept");
    if (!(exp_draw > 0.0))
        throw std::invalid_argument("invert_affine_bound: exp_draw must be positive");

    constexpr double inf = std::numeric_limits<double>::infinity();
    if (a == 0.0 && b <= 0.0) return inf;
    if (b < 0.0) {
        // Finite total mass a^2 / (-2b); no event beyond it.
        const double mass = a * a / (-2.0 * b);
        if (exp_draw > mass) return inf;
    }
    if (b == 0.0) return exp_draw / a;
    // Root of b t^2 / 2 + a t - E = 0, written to stay stable for a >> bE.
    const double disc = a * a + 2.0 * b * exp_draw;
    return 2.0 * exp_draw / (a + std::sqrt(disc));
}

} // namespace pdmp
