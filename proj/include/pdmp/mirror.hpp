// Mirror PDMP samplers. A barrier map sends the constrained set into R^d;
// running an unconstrained PDMP against the push-forward potential
//
//   V(zeta) = U(grad psi*(zeta)) - log det Hess psi*(zeta)
//
// and mapping dual samples back through grad psi* yields samples of the
// constrained target that never touch the boundary, with no projections.

#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "pdmp/barrier.hpp"
#include "pdmp/samplers.hpp"
#include "pdmp/targets.hpp"

namespace pdmp {

// The dual potential and its gradient, with the chain rule
//   grad V(zeta) = Hess psi*(zeta) grad U(x) - grad log det Hess psi*(zeta),
// using the barrier's analytic log-det gradient. Holds scratch buffers, so
// one instance serves one sampler.
class DualPotential {
public:
    DualPotential(const BarrierMap& barrier, const Target& target);

    std::size_t dimension() const { return barrier_->dimension(); }
    double value(const Vec& zeta) const;
    void gradient_into(const Vec& zeta, Vec& g) const;
    Vec gradient(const Vec& zeta) const {
        Vec g(dimension());
        gradient_into(zeta, g);
        return g;
    }

private:
    const BarrierMap* barrier_;
    const Target* target_;
    mutable Vec x_, grad_u_, chain_, logdet_grad_;
};

// One-shot (V, grad V) evaluation at a dual point.
std::pair<double, Vec> pushforward_potential(const BarrierMap& barrier, const Target& target,
                                             const Vec& zeta);

// Dual-space Zig-Zag targeting V, started from zeta_0 = forward(initial_x).
// dual_lipschitz must dominate the curvature of V (a violated bound aborts,
// signalling a wrong constant). The default initial velocity is uniform on
// {-1, +1}^d from an auxiliary stream of `seed`.
Skeleton run_mzzs(const BarrierMap& barrier, const Target& target, double dual_lipschitz,
                  const Vec& initial_x, Budget budget, std::uint64_t seed,
                  const Vec* initial_velocity = nullptr);

// Dual-space Bouncy Particle analogue; default initial velocity uniform on
// the unit sphere.
Skeleton run_mbps(const BarrierMap& barrier, const Target& target, double dual_lipschitz,
                  double refresh_rate, const Vec& initial_x, Budget budget, std::uint64_t seed,
                  RefreshDist refresh_dist = RefreshDist::UnitSphere,
                  const Vec* initial_velocity = nullptr);

// Dual-space Zig-Zag with subsampling; `dual_sg` decomposes grad V over
// data batches with a control variate anchored at the dual mode.
Skeleton run_mzzss(const BarrierMap& barrier, const SubsampledGradient& dual_sg,
                   const Vec& initial_x, Budget budget, std::uint64_t seed,
                   const Vec* initial_velocity = nullptr);

// Primal samples from a dual skeleton: the dual path is piecewise linear,
// so positions at equally spaced times are interpolated in the dual space
// and then mapped through grad psi*. For simplex barriers the reconstructed
// last coordinate 1 - sum x_i is appended.
std::vector<Vec> extract_primal_samples(const Skeleton& dual_skeleton, const BarrierMap& barrier,
                                        std::int64_t n);

// Subsampled dual gradient of a Dirichlet posterior, anchored at the dual
// mode where the full gradient vanishes (sup-norm Lipschitz bound).
SubsampledGradient subsampled_dual_gradient(const DirichletDualPieces& pieces);

} // namespace pdmp
