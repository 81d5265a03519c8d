#include "pdmp/mirror.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmp {

DualPotential::DualPotential(const BarrierMap& barrier, const Target& target)
    : barrier_(&barrier), target_(&target) {
    if (barrier.dimension() != target.dimension())
        throw std::invalid_argument("dual potential: barrier/target dimension mismatch");
}

double DualPotential::value(const Vec& zeta) const {
    barrier_->inverse_into(zeta, x_);
    return target_->potential(x_) - barrier_->log_det_conjugate_hessian(zeta);
}

void DualPotential::gradient_into(const Vec& zeta, Vec& g) const {
    barrier_->inverse_into(zeta, x_);
    target_->gradient_into(x_, grad_u_);
    barrier_->conjugate_hessian_apply(zeta, grad_u_, chain_);
    barrier_->grad_log_det_conjugate_hessian_into(zeta, logdet_grad_);
    g.resize(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) g[i] = chain_[i] - logdet_grad_[i];
}

std::pair<double, Vec> pushforward_potential(const BarrierMap& barrier, const Target& target,
                                             const Vec& zeta) {
    DualPotential v(barrier, target);
    return {v.value(zeta), v.gradient(zeta)};
}

namespace {

Vec dual_start(const BarrierMap& barrier, const Vec& initial_x) {
    if (!barrier.contains(initial_x))
        throw DomainViolationError("mirror sampler: initial point not strictly inside the domain");
    return barrier.forward(initial_x);
}

GradientFn dual_gradient_fn(const BarrierMap& barrier, const Target& target) {
    auto potential = std::make_shared<DualPotential>(barrier, target);
    return [potential](const Vec& zeta, Vec& g) { potential->gradient_into(zeta, g); };
}

} // namespace

Skeleton run_mzzs(const BarrierMap& barrier, const Target& target, double dual_lipschitz,
                  const Vec& initial_x, Budget budget, std::uint64_t seed,
                  const Vec* initial_velocity) {
    PhaseState init;
    init.position = dual_start(barrier, initial_x);
    init.space = Space::Dual;
    init.velocity = initial_velocity ? *initial_velocity
                                     : aux_stream(seed).rademacher_vector(barrier.dimension());
    ZigZagSpec spec{barrier.dimension(), dual_gradient_fn(barrier, target), dual_lipschitz};
    return run_zzs(spec, init, budget, seed);
}

Skeleton run_mbps(const BarrierMap& barrier, const Target& target, double dual_lipschitz,
                  double refresh_rate, const Vec& initial_x, Budget budget, std::uint64_t seed,
                  RefreshDist refresh_dist, const Vec* initial_velocity) {
    PhaseState init;
    init.position = dual_start(barrier, initial_x);
    init.space = Space::Dual;
    init.velocity = initial_velocity ? *initial_velocity
                                     : aux_stream(seed).unit_sphere(barrier.dimension());
    BouncySpec spec{barrier.dimension(), dual_gradient_fn(barrier, target), dual_lipschitz,
                    refresh_rate, refresh_dist};
    return run_bps(spec, init, budget, seed);
}

Skeleton run_mzzss(const BarrierMap& barrier, const SubsampledGradient& dual_sg,
                   const Vec& initial_x, Budget budget, std::uint64_t seed,
                   const Vec* initial_velocity) {
    if (dual_sg.dimension != barrier.dimension())
        throw std::invalid_argument("run_mzzss: dimension mismatch");
    PhaseState init;
    init.position = dual_start(barrier, initial_x);
    init.space = Space::Dual;
    init.velocity = initial_velocity ? *initial_velocity
                                     : aux_stream(seed).rademacher_vector(barrier.dimension());
    return run_zzss(dual_sg, init, budget, seed);
}

std::vector<Vec> extract_primal_samples(const Skeleton& dual_skeleton, const BarrierMap& barrier,
                                        std::int64_t n) {
    const auto dual_points = extract_samples(dual_skeleton, n);
    const bool simplex = dynamic_cast<const SimplexEntropyBarrier*>(&barrier) != nullptr;
    std::vector<Vec> out;
    out.reserve(dual_points.size());
    Vec x;
    for (const auto& zeta : dual_points) {
        barrier.inverse_into(zeta, x);
        if (simplex) {
            Vec full(x.size() + 1);
            double rest = 1.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                full[i] = x[i];
                rest -= x[i];
            }
            full[x.size()] = rest;
            out.push_back(std::move(full));
        } else {
            out.push_back(x);
        }
    }
    return out;
}

SubsampledGradient subsampled_dual_gradient(const DirichletDualPieces& pieces) {
    return make_subsampled_gradient(
        pieces.dimension, pieces.num_terms,
        [pieces](int j, const Vec& zeta, Vec& g) { pieces.term_gradient_into(j, zeta, g); },
        pieces.dual_mode, pieces.sup_norm_lipschitz,
        std::numeric_limits<double>::infinity());
}

} // namespace pdmp
