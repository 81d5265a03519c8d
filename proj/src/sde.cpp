#include "pdmp/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "pdmp/mirror.hpp"

namespace pdmp {

namespace {

void check_size(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

void check_finite(const Vec& x, const char* what) {
    for (double v : x)
        if (std::isnan(v)) throw std::runtime_error(std::string(what) + ": NaN state");
}

// Simplex barriers simulate the first d-1 coordinates; reattach the last.
Vec with_simplex_tail(const BarrierMap& barrier, Vec x) {
    if (dynamic_cast<const SimplexEntropyBarrier*>(&barrier)) {
        double rest = 1.0;
        for (double xi : x) rest -= xi;
        x.push_back(rest);
    }
    return x;
}

Vec primal_of(const BarrierMap& barrier, const Vec& zeta) {
    return with_simplex_tail(barrier, barrier.inverse(zeta));
}

} // namespace

ProjectionFn box_projection(Vec lower, Vec upper) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("box_projection: bound size mismatch");
    return [lo = std::move(lower), hi = std::move(upper)](Vec& x) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
}

ProjectionFn orthant_projection() {
    return [](Vec& x) {
        for (auto& v : x) v = std::max(v, 0.0);
    };
}

ProjectionFn simplex_projection() {
    return [](Vec& x) {
        // Sort-and-threshold: find the largest k with sorted u_k - (sum_{j<=k}
        // u_j - 1)/k > 0 and shift by that threshold.
        Vec u = x;
        std::sort(u.begin(), u.end(), std::greater<double>());
        double cum = 0.0, theta = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            cum += u[k];
            const double candidate = (cum - 1.0) / static_cast<double>(k + 1);
            if (u[k] - candidate > 0.0) theta = candidate;
        }
        for (auto& v : x) v = std::max(v - theta, 0.0);
    };
}

Vec ula_step(const GradientFn& gradient, const Vec& x, double dt, const Vec& xi) {
    check_size(x, xi, "ula_step");
    Vec g(x.size());
    gradient(x, g);
    check_finite(g, "ula_step");
    Vec out(x.size());
    const double noise = std::sqrt(2.0 * dt);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - dt * g[i] + noise * xi[i];
    return out;
}

Vec plmc_step(const GradientFn& gradient, const ProjectionFn& projection, const Vec& x, double dt,
              const Vec& xi) {
    Vec out = ula_step(gradient, x, dt, xi);
    projection(out);
    return out;
}

Vec myula_step(const GradientFn& gradient, const ProjectionFn& projection, const Vec& x, double dt,
               double eps, const Vec& xi) {
    if (!(eps > 0.0)) throw std::invalid_argument("myula_step: eps must be positive");
    static std::atomic<bool> warned{false};
    if (dt > eps && !warned.exchange(true))
        std::cerr << "myula_step: dt > eps exceeds the stability range of the "
                     "Moreau-Yosida penalty\n";
    check_size(x, xi, "myula_step");
    Vec g(x.size());
    gradient(x, g);
    check_finite(g, "myula_step");
    Vec proj = x;
    projection(proj);
    Vec out(x.size());
    const double noise = std::sqrt(2.0 * dt);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] - dt * g[i] + (dt / eps) * (proj[i] - x[i]) + noise * xi[i];
    return out;
}

std::pair<Vec, Vec> mlaa_step(const BarrierMap& barrier, const GradientFn& dual_gradient,
                              const Vec& zeta, double dt, const Vec& xi) {
    check_size(zeta, xi, "mlaa_step");
    Vec g(zeta.size());
    dual_gradient(zeta, g);
    check_finite(g, "mlaa_step");
    Vec znext(zeta.size());
    const double noise = std::sqrt(2.0 * dt);
    for (std::size_t i = 0; i < zeta.size(); ++i)
        znext[i] = zeta[i] - dt * g[i] + noise * xi[i];
    return {znext, barrier.inverse(znext)};
}

Vec mlam_step_with_noise(const BarrierMap& barrier, const GradientFn& primal_gradient,
                         const Vec& x, double dt, int inner_steps, const NoiseFn& noise) {
    if (inner_steps < 1) throw std::invalid_argument("mlam_step: inner_steps must be >= 1");
    const std::size_t d = barrier.dimension();
    Vec g(d);
    primal_gradient(x, g);
    check_finite(g, "mlam_step");

    Vec z = barrier.forward(x);
    for (std::size_t i = 0; i < d; ++i) z[i] -= dt * g[i];

    const double h = dt / static_cast<double>(inner_steps);
    const double scale = std::sqrt(2.0 * h);
    Vec xi(d), shaped(d);
    for (int k = 0; k < inner_steps; ++k) {
        noise(k, xi);
        barrier.conjugate_hessian_inv_sqrt_apply(z, xi, shaped);
        for (std::size_t i = 0; i < d; ++i) z[i] += scale * shaped[i];
    }
    return barrier.inverse(z);
}

Vec mlam_step(const BarrierMap& barrier, const GradientFn& primal_gradient, const Vec& x,
              double dt, int inner_steps, RngStream& rng) {
    return mlam_step_with_noise(barrier, primal_gradient, x, dt, inner_steps,
                                [&rng, &barrier](int, Vec& xi) {
                                    xi.resize(barrier.dimension());
                                    for (auto& v : xi) v = rng.normal();
                                });
}

void ss_gradient_estimate_into(const SubsampledGradient& sg, int j, const Vec& x, Vec& g) {
    if (j < 0 || j >= sg.num_terms)
        throw std::out_of_range("ss_gradient_estimate_into: term index out of range");
    g.resize(sg.dimension);
    Vec term(sg.dimension);
    sg.term_gradient(j, x, term);
    const auto& ref_term = sg.reference_term_gradients[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < sg.dimension; ++i)
        g[i] = sg.reference_gradient[i] + term[i] - ref_term[i];
}

// ---------------------------------------------------------------------------
// Chain runners
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kChainStream = 0x400000000ull;

} // namespace

ChainResult run_ula_chain(const GradientFn& gradient, const Vec& x0, double dt,
                          std::int64_t steps, std::uint64_t seed) {
    RngStream rng(seed, kChainStream);
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec x = x0, xi(x0.size());
    for (std::int64_t k = 0; k < steps; ++k) {
        for (auto& v : xi) v = rng.normal();
        x = ula_step(gradient, x, dt, xi);
        out.samples.push_back(x);
    }
    return out;
}

ChainResult run_plmc_chain(const GradientFn& gradient, const ProjectionFn& projection,
                           const Vec& x0, double dt, std::int64_t steps, std::uint64_t seed) {
    RngStream rng(seed, kChainStream);
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec x = x0, xi(x0.size());
    for (std::int64_t k = 0; k < steps; ++k) {
        for (auto& v : xi) v = rng.normal();
        x = plmc_step(gradient, projection, x, dt, xi);
        out.samples.push_back(x);
    }
    return out;
}

ChainResult run_myula_chain(const GradientFn& gradient, const ProjectionFn& projection,
                            const Vec& x0, double dt, double eps, std::int64_t steps,
                            std::uint64_t seed) {
    RngStream rng(seed, kChainStream);
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec x = x0, xi(x0.size());
    for (std::int64_t k = 0; k < steps; ++k) {
        for (auto& v : xi) v = rng.normal();
        x = myula_step(gradient, projection, x, dt, eps, xi);
        out.samples.push_back(x);
    }
    return out;
}

ChainResult run_mlaa_chain(const BarrierMap& barrier, const Target& target, const Vec& x0,
                           double dt, std::int64_t steps, std::uint64_t seed) {
    RngStream rng(seed, kChainStream);
    DualPotential potential(barrier, target);
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec zeta = barrier.forward(x0);
    Vec g(barrier.dimension());
    const double noise = std::sqrt(2.0 * dt);
    for (std::int64_t k = 0; k < steps; ++k) {
        potential.gradient_into(zeta, g);
        check_finite(g, "run_mlaa_chain");
        for (std::size_t i = 0; i < zeta.size(); ++i)
            zeta[i] += -dt * g[i] + noise * rng.normal();
        out.samples.push_back(primal_of(barrier, zeta));
    }
    return out;
}

ChainResult run_mlam_chain(const BarrierMap& barrier, const Target& target, const Vec& x0,
                           double dt, int inner_steps, std::int64_t steps, std::uint64_t seed) {
    RngStream rng(seed, kChainStream);
    GradientFn grad = [&target](const Vec& x, Vec& g) { target.gradient_into(x, g); };
    ChainResult out;
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec x = x0;
    for (std::int64_t k = 0; k < steps; ++k) {
        x = mlam_step(barrier, grad, x, dt, inner_steps, rng);
        out.samples.push_back(with_simplex_tail(barrier, x));
    }
    return out;
}

ChainResult run_smlaa_chain(const BarrierMap& barrier, const SubsampledGradient& dual_sg,
                            const Vec& x0, double dt, std::int64_t steps, std::uint64_t seed) {
    if (dual_sg.dimension != barrier.dimension())
        throw std::invalid_argument("run_smlaa_chain: dimension mismatch");
    RngStream rng(seed, kChainStream);
    ChainResult out;
    out.evals_per_step = 1.0 / static_cast<double>(dual_sg.num_terms);
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec zeta = barrier.forward(x0);
    Vec g(barrier.dimension());
    const double noise = std::sqrt(2.0 * dt);
    for (std::int64_t k = 0; k < steps; ++k) {
        const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(dual_sg.num_terms)));
        ss_gradient_estimate_into(dual_sg, j, zeta, g);
        for (std::size_t i = 0; i < zeta.size(); ++i)
            zeta[i] += -dt * g[i] + noise * rng.normal();
        out.samples.push_back(primal_of(barrier, zeta));
    }
    return out;
}

ChainResult run_smlam_chain(const BarrierMap& barrier, const SubsampledGradient& primal_sg,
                            const Vec& x0, double dt, int inner_steps, std::int64_t steps,
                            std::uint64_t seed) {
    if (primal_sg.dimension != barrier.dimension())
        throw std::invalid_argument("run_smlam_chain: dimension mismatch");
    RngStream rng(seed, kChainStream);
    ChainResult out;
    out.evals_per_step = 1.0 / static_cast<double>(primal_sg.num_terms);
    out.samples.reserve(static_cast<std::size_t>(steps));
    Vec x = x0, g(barrier.dimension());
    for (std::int64_t k = 0; k < steps; ++k) {
        const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(primal_sg.num_terms)));
        GradientFn grad = [&](const Vec& xx, Vec& gg) { ss_gradient_estimate_into(primal_sg, j, xx, gg); };
        x = mlam_step(barrier, grad, x, dt, inner_steps, rng);
        out.samples.push_back(with_simplex_tail(barrier, x));
    }
    return out;
}

} // namespace pdmp
