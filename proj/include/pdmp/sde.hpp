// Discrete-time SDE baselines: the unadjusted Langevin step, its projected
// and Moreau-Yosida regularised constrained variants, the mirror Langevin
// discretizations with additive and multiplicative noise, and their
// subsampled versions. All steps are pure functions of explicit state and
// supplied randomness.

#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pdmp/barrier.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

// In-place Euclidean projection onto the closure of the domain.
using ProjectionFn = std::function<void(Vec& x)>;

ProjectionFn box_projection(Vec lower, Vec upper);
ProjectionFn orthant_projection();
// Euclidean projection onto the probability simplex (sort-and-threshold).
ProjectionFn simplex_projection();

// x' = x - dt grad U(x) + sqrt(2 dt) xi.
Vec ula_step(const GradientFn& gradient, const Vec& x, double dt, const Vec& xi);

// Langevin step followed by projection back onto the domain; iterates stay
// in the closed domain (boundary included).
Vec plmc_step(const GradientFn& gradient, const ProjectionFn& projection, const Vec& x, double dt,
              const Vec& xi);

// Moreau-Yosida regularised step: the constraint enters as the penalty
// drift (dt/eps)(P(x) - x) and no projection is applied, so iterates may
// leave the domain. Warns once when dt > eps (stability limit).
Vec myula_step(const GradientFn& gradient, const ProjectionFn& projection, const Vec& x, double dt,
               double eps, const Vec& xi);

// Mirror Langevin with additive dual noise:
//   zeta' = zeta - dt grad V(zeta) + sqrt(2 dt) xi,  x' = grad psi*(zeta').
// Returns (zeta', x'); x' is always strictly inside the domain.
std::pair<Vec, Vec> mlaa_step(const BarrierMap& barrier, const GradientFn& dual_gradient,
                              const Vec& zeta, double dt, const Vec& xi);

// Mirror Langevin with multiplicative noise: the drift half-step
//   zeta_half = grad psi(x) - dt grad U(x)
// is followed by the driftless dual diffusion dZ = sqrt(2) [Hess
// psi*(Z)]^(-1/2) dW over duration dt, discretized with inner_steps
// Euler-Maruyama substeps, and x' = grad psi*(Z_dt).
Vec mlam_step(const BarrierMap& barrier, const GradientFn& primal_gradient, const Vec& x,
              double dt, int inner_steps, RngStream& rng);

// Same step with injectable substep noise (fills xi with the standard
// normals of substep k); zero noise reduces the step to mirror descent.
using NoiseFn = std::function<void(int substep, Vec& xi)>;
Vec mlam_step_with_noise(const BarrierMap& barrier, const GradientFn& primal_gradient,
                         const Vec& x, double dt, int inner_steps, const NoiseFn& noise);

// Full-vector control-variate gradient estimate E^j(x) for term j.
void ss_gradient_estimate_into(const SubsampledGradient& sg, int j, const Vec& x, Vec& g);

// ---------------------------------------------------------------------------
// Chain runners (one sample per step, fixed evaluation cost per step)
// ---------------------------------------------------------------------------

struct ChainResult {
    std::vector<Vec> samples;     // one state per step, in order
    double evals_per_step = 1.0;  // gradient evaluations consumed per step
};

ChainResult run_ula_chain(const GradientFn& gradient, const Vec& x0, double dt,
                          std::int64_t steps, std::uint64_t seed);
ChainResult run_plmc_chain(const GradientFn& gradient, const ProjectionFn& projection,
                           const Vec& x0, double dt, std::int64_t steps, std::uint64_t seed);
ChainResult run_myula_chain(const GradientFn& gradient, const ProjectionFn& projection,
                            const Vec& x0, double dt, double eps, std::int64_t steps,
                            std::uint64_t seed);
// Mirror chains take a primal start and emit primal samples (simplex
// barriers append the reconstructed last coordinate).
ChainResult run_mlaa_chain(const BarrierMap& barrier, const Target& target, const Vec& x0,
                           double dt, std::int64_t steps, std::uint64_t seed);
ChainResult run_mlam_chain(const BarrierMap& barrier, const Target& target, const Vec& x0,
                           double dt, int inner_steps, std::int64_t steps, std::uint64_t seed);
// Subsampled mirror chains: the dual (resp. primal) gradient is replaced by
// the control-variate estimate of a uniformly drawn term; each step costs
// 1/K evaluations.
ChainResult run_smlaa_chain(const BarrierMap& barrier, const SubsampledGradient& dual_sg,
                            const Vec& x0, double dt, std::int64_t steps, std::uint64_t seed);
ChainResult run_smlam_chain(const BarrierMap& barrier, const SubsampledGradient& primal_sg,
                            const Vec& x0, double dt, int inner_steps, std::int64_t steps,
                            std::uint64_t seed);

} // namespace pdmp
