// Unconstrained PDMP samplers over the generic simulation loop: the
// Zig-Zag sampler (coordinate flips at rate (v_i dU_i)^+), the Bouncy
// Particle sampler (gradient reflections plus velocity refreshment), and
// Zig-Zag with exact subsampling through control-variate rate estimates.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "pdmp/core.hpp"
#include "pdmp/simulate.hpp"

namespace pdmp {

using Vec = std::vector<double>;
using GradientFn = std::function<void(const Vec& x, Vec& g)>;

class ZeroGradientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// lp norm for p in {1, 2, infinity}.
double p_norm(const Vec& v, double p);

// ---------------------------------------------------------------------------
// Zig-Zag
// ---------------------------------------------------------------------------

struct ZigZagSpec {
    std::size_t dimension = 0;
    GradientFn gradient;
    double lipschitz = 0.0; // global gradient-Lipschitz constant of U
};

// Per-coordinate switching rates (v_i g_i)^+ for gradient g at the state's
// position; throws on NaN gradient entries.
Vec zz_rates(const Vec& gradient_at_x, const Vec& velocity);
double zz_total_rate(const Vec& gradient_at_x, const Vec& velocity);

// Coordinate reflection: negates velocity component i (0-based).
PhaseState zz_flip(const PhaseState& state, std::size_t i);

// Affine dominating bounds, one per coordinate clock: intercept
// (v_i g_i)^+, slope L ||v||_2.
std::vector<AffineRateBound> zz_bounds(const ZigZagSpec& spec, const PhaseState& state);

// Zig-Zag model over the generic loop; initial velocities must be +-1.
std::unique_ptr<PdmpModel> make_zigzag_model(ZigZagSpec spec);
Skeleton run_zzs(const ZigZagSpec& spec, const PhaseState& initial, Budget budget,
                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bouncy Particle
// ---------------------------------------------------------------------------

enum class RefreshDist { UnitSphere, StandardGaussian };

struct BouncySpec {
    std::size_t dimension = 0;
    GradientFn gradient;
    double lipschitz = 0.0;
    double refresh_rate = 1.0; // gamma > 0
    RefreshDist refresh_dist = RefreshDist::UnitSphere;
};

// Reflection of v in the gradient contour:
//   R v = v - 2 (v.g / ||g||^2) g.
// Norm-preserving involution; throws ZeroGradientError when ||g|| <= 1e-14
// (the caller must refresh instead).
Vec bps_reflect(const Vec& gradient_at_x, const Vec& v);

// Two clocks: a thinned reflection clock with bound intercept
// (v.grad U)^+ + gamma and slope L ||v||^2, and an exact Exp(gamma)
// refreshment clock that redraws the velocity from refresh_dist.
std::unique_ptr<PdmpModel> make_bouncy_model(BouncySpec spec);
Skeleton run_bps(const BouncySpec& spec, const PhaseState& initial, Budget budget,
                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Subsampled Zig-Zag
// ---------------------------------------------------------------------------

// Control-variate gradient estimator over K terms with dU = (1/K) sum_j
// dU^j: the estimate anchored at reference point r is
//   E_i^j(x) = dU_i(r) + dU_i^j(x) - dU_i^j(r),
// unbiased over j at every x and exact at x = r. The reference gradients
// are precomputed once.
struct SubsampledGradient {
    std::size_t dimension = 0;
    int num_terms = 0; // K
    std::function<void(int j, const Vec& x, Vec& g)> term_gradient;
    Vec reference_point;
    Vec reference_gradient;
    std::vector<Vec> reference_term_gradients;
    double lipschitz = 0.0;  // L_p: every dU^j is L_p-Lipschitz in the p-norm
    double norm_order = 2.0; // p in {1, 2, infinity}
};

// Builds the estimator, precomputing per-term and averaged gradients at the
// reference point.
SubsampledGradient make_subsampled_gradient(
    std::size_t dimension, int num_terms,
    std::function<void(int j, const Vec& x, Vec& g)> term_gradient, Vec reference_point,
    double lipschitz, double norm_order);

// E_i^j(x) for term j (0-based) and coordinate i.
double ss_gradient_estimate(const SubsampledGradient& sg, int j, const Vec& x, std::size_t i);

// Estimated switching rate (v_i E_i^j(x))^+.
double ss_estimated_rate(const SubsampledGradient& sg, const PhaseState& state, std::size_t i,
                         int j);

// Zig-Zag with subsampling: identical to run_zzs except each acceptance
// test draws a uniform term index and uses the estimated rate against the
// reference-anchored bound
//   (v_i dU_i(r))^+ + L_p ||x - r||_p + L_p ||v||_p s.
// Every proposal costs 1/K gradient evaluations.
std::unique_ptr<PdmpModel> make_subsampled_zigzag_model(SubsampledGradient sg);
Skeleton run_zzss(const SubsampledGradient& sg, const PhaseState& initial, Budget budget,
                  std::uint64_t seed);

} // namespace pdmp
