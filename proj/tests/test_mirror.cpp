#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdmp/mirror.hpp"

using namespace pdmp;

namespace {

linalg::Matrix identity_sigma(std::size_t d) {
    return linalg::Matrix::identity(d);
}

bool skeletons_match(const Skeleton& a, const Skeleton& b, double tol) {
    if (a.events.size() != b.events.size()) return false;
    for (std::size_t k = 0; k < a.events.size(); ++k) {
        if (std::abs(a.events[k].time - b.events[k].time) > tol) return false;
        for (std::size_t i = 0; i < a.events[k].state.position.size(); ++i) {
            if (std::abs(a.events[k].state.position[i] - b.events[k].state.position[i]) > tol)
                return false;
            if (a.events[k].state.velocity[i] != b.events[k].state.velocity[i]) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("push-forward through the identity barrier is the target itself") {
    TruncatedGaussian target(identity_sigma(2));
    IdentityBarrier barrier(2);
    RngStream rng(1, 0);
    for (int k = 0; k < 50; ++k) {
        const Vec zeta{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const auto [v, g] = pushforward_potential(barrier, target, zeta);
        CHECK(v == target.potential(zeta));
        const Vec gu = target.gradient(zeta);
        CHECK(g[0] == gu[0]);
        CHECK(g[1] == gu[1]);
    }
}

TEST_CASE("dual potential of the gamma target at zero") {
    GammaProduct target({3.0}, {10.0});
    EntropicQuadraticBarrier barrier(1);
    const auto [v, g] = pushforward_potential(barrier, target, {0.0});
    // Inverse map sends 0 to 1; the hand value is 10 + log 2.
    CHECK(v == doctest::Approx(10.0 + std::log(2.0)).epsilon(1e-12));
    (void)g;
}

TEST_CASE("dual gradients match finite differences for every pair in scope") {
    struct Pair {
        std::unique_ptr<BarrierMap> barrier;
        std::unique_ptr<Target> target;
    };
    std::vector<Pair> pairs;
    pairs.push_back({make_identity_barrier(2),
                     std::make_unique<TruncatedGaussian>(identity_sigma(2))});
    pairs.push_back({make_entropic_quadratic_barrier(1),
                     std::make_unique<GammaProduct>(Vec{3.0}, Vec{10.0})});
    {
        linalg::Matrix sigma(3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                sigma(i, j) = 1.0 / (1.0 + std::abs(double(i) - double(j)));
        pairs.push_back({make_box_barrier({0.0, 0.0, 0.0}, {5.0, 0.5, 0.5}),
                         std::make_unique<TruncatedGaussian>(sigma, Vec{0.0, 0.0, 0.0},
                                                             Vec{5.0, 0.5, 0.5})});
    }
    {
        linalg::Matrix sigma(2);
        sigma(0, 0) = 1.0;
        sigma(1, 1) = 0.01;
        pairs.push_back({make_preconditioned_hypercube_barrier({1.0, 10.0}),
                         std::make_unique<TruncatedGaussian>(sigma, Vec{-1.0, -1.0},
                                                             Vec{1.0, 1.0})});
    }
    pairs.push_back({make_simplex_entropy_barrier(5),
                     std::make_unique<DirichletPosterior>(
                         Vec{2401.0, 2669.0, 374.0, 2692.0, 1864.0}, Vec(5, 0.1),
                         std::vector<Vec>{})});

    for (auto& p : pairs) {
        CAPTURE(p.barrier->name());
        DualPotential dual(*p.barrier, *p.target);
        RngStream rng(21, 0);
        for (int k = 0; k < 100; ++k) {
            Vec zeta(p.barrier->dimension());
            for (auto& z : zeta) z = rng.uniform(-2.5, 2.5);
            const Vec g = dual.gradient(zeta);
            const double h = 1e-6;
            for (std::size_t i = 0; i < zeta.size(); ++i) {
                Vec zp = zeta, zm = zeta;
                zp[i] += h;
                zm[i] -= h;
                const double fd = (dual.value(zp) - dual.value(zm)) / (2.0 * h);
                CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
            }
        }
    }
}

TEST_CASE("closed-form dirichlet dual matches the generic push-forward") {
    const Vec p{0.2401, 0.2669, 0.0374, 0.2692, 0.1864};
    const auto post = sample_multinomial_dataset(p, 10000, 50, Vec(5, 0.1), 19);
    SimplexEntropyBarrier barrier(5);
    const auto pieces = dirichlet_dual_pieces(post, barrier);
    DualPotential generic(barrier, post);

    RngStream rng(23, 0);
    Vec zeta0(4, 0.25);
    const double shift = pieces.value(zeta0) - generic.value(zeta0);
    for (int k = 0; k < 100; ++k) {
        Vec zeta(4);
        for (auto& z : zeta) z = rng.uniform(-2.0, 2.0);
        // Gradients agree to 1e-8; values agree up to one constant shift.
        Vec g_closed(4), g_generic(4);
        pieces.gradient_into(zeta, g_closed);
        generic.gradient_into(zeta, g_generic);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(g_closed[i] ==
                  doctest::Approx(g_generic[i]).epsilon(1e-8).scale(pieces.scale));
        CHECK(pieces.value(zeta) - generic.value(zeta) ==
              doctest::Approx(shift).epsilon(1e-8).scale(std::abs(shift) + 1.0));
    }
}

TEST_CASE("identity barrier reduces the mirror zig-zag to plain zig-zag") {
    TruncatedGaussian target(identity_sigma(1));
    IdentityBarrier barrier(1);
    const Vec x0{0.4};
    const Vec v0{1.0};

    PhaseState init;
    init.position = x0;
    init.velocity = v0;
    ZigZagSpec spec{1, [&](const Vec& x, Vec& g) { target.gradient_into(x, g); }, 1.0};

    const auto plain = run_zzs(spec, init, Budget::events(5000), 2711);
    const auto mirror = run_mzzs(barrier, target, 1.0, x0, Budget::events(5000), 2711, &v0);
    CHECK(skeletons_match(plain, mirror, 1e-12));
}

TEST_CASE("identity barrier reduces the mirror bouncy sampler to plain bps") {
    TruncatedGaussian target(identity_sigma(2));
    IdentityBarrier barrier(2);
    const Vec x0{0.3, -0.2};
    const Vec v0{0.6, 0.8};

    PhaseState init;
    init.position = x0;
    init.velocity = v0;
    BouncySpec spec{2, [&](const Vec& x, Vec& g) { target.gradient_into(x, g); }, 1.0, 1.0,
                    RefreshDist::UnitSphere};

    const auto plain = run_bps(spec, init, Budget::events(5000), 912);
    const auto mirror =
        run_mbps(barrier, target, 1.0, 1.0, x0, Budget::events(5000), 912,
                 RefreshDist::UnitSphere, &v0);
    CHECK(skeletons_match(plain, mirror, 1e-12));
}

TEST_CASE("mirror zig-zag keeps gamma samples strictly positive") {
    GammaProduct target({3.0}, {10.0});
    EntropicQuadraticBarrier barrier(1);
    const auto c = derived_constants(target, barrier);
    const auto skel =
        run_mzzs(barrier, target, c.dual_lipschitz, {0.3}, Budget::events(50000), 4001);
    const auto samples = extract_primal_samples(skel, barrier, 20000);
    for (const auto& s : samples) CHECK(s[0] > 0.0);
}

TEST_CASE("mirror zig-zag keeps 2d truncated-gaussian samples inside the square") {
    linalg::Matrix sigma(2);
    sigma(0, 0) = 1.0;
    sigma(1, 1) = 0.01;
    TruncatedGaussian target(sigma, {-1.0, -1.0}, {1.0, 1.0});
    // Preconditioning weights diag(Sigma^{-1/2}).
    auto barrier = make_preconditioned_hypercube_barrier({1.0, 10.0});
    const auto c = derived_constants(target, dynamic_cast<const PreconditionedHypercubeBarrier&>(*barrier));
    const auto skel = run_mzzs(*barrier, target, c.dual_lipschitz, {0.0, 0.0},
                               Budget::gradient_evaluations(20000), 4002);
    const auto samples = extract_primal_samples(skel, *barrier, 5000);
    for (const auto& s : samples) {
        CHECK(std::abs(s[0]) < 1.0);
        CHECK(std::abs(s[1]) < 1.0);
    }
}

TEST_CASE("mirror bouncy sampler respects a 3d box") {
    linalg::Matrix sigma(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            sigma(i, j) = 1.0 / (1.0 + std::abs(double(i) - double(j)));
    const Vec lo{0.0, 0.0, 0.0}, hi{5.0, 0.5, 0.5};
    TruncatedGaussian target(sigma, lo, hi);
    auto barrier = make_box_barrier(lo, hi);
    const auto c = derived_constants(target, dynamic_cast<const BoxBarrier&>(*barrier));
    const auto skel = run_mbps(*barrier, target, c.dual_lipschitz, 1.0, {2.5, 0.25, 0.25},
                               Budget::events(20000), 4003);
    const auto samples = extract_primal_samples(skel, *barrier, 5000);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(s[i] > lo[i]);
            CHECK(s[i] < hi[i]);
        }
}

TEST_CASE("subsampled mirror zig-zag stays on the simplex and tracks moments") {
    const Vec p{0.2401, 0.2669, 0.0374, 0.2692, 0.1864};
    const auto post = sample_multinomial_dataset(p, 10000, 50, Vec(5, 0.1), 47);
    auto barrier = make_simplex_entropy_barrier(5);
    const auto pieces =
        dirichlet_dual_pieces(post, dynamic_cast<const SimplexEntropyBarrier&>(*barrier));
    const auto sg = subsampled_dual_gradient(pieces);

    const Vec center(4, 0.2);
    const auto skel =
        run_mzzss(*barrier, sg, center, Budget::gradient_evaluations(2000), 4004);
    CHECK(skel.stats.gradient_evaluations <= 2000.0 + 1e-9);
    const auto samples = extract_primal_samples(skel, *barrier, 4000);
    for (const auto& s : samples) {
        REQUIRE(s.size() == 5); // reconstructed last coordinate included
        double sum = 0.0;
        for (double v : s) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Posterior mean of the first coordinate at loose Monte Carlo tolerance.
    double m = 0.0;
    for (const auto& s : samples) m += s[0];
    m /= static_cast<double>(samples.size());
    CHECK(m == doctest::Approx(post.marginal_mean(0)).epsilon(0.15));
}

TEST_CASE("subsampled mirror zig-zag with one term matches plain mirror zig-zag in law") {
    // K = 1 keeps the estimator exact; only the looser anchored bound differs.
    GammaProduct target({3.0}, {10.0});
    EntropicQuadraticBarrier barrier(1);
    DualPotential dual(barrier, target);
    auto term = [&dual](int, const Vec& zeta, Vec& g) { dual.gradient_into(zeta, g); };

    Vec mode_x{0.3};
    // Dual mode of the gamma target: solve grad V = 0 by bisection over the
    // one-dimensional dual coordinate.
    double lo = -20.0, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        Vec g(1);
        dual.gradient_into({mid}, g);
        (g[0] > 0.0 ? hi : lo) = mid;
    }
    const Vec dual_mode{0.5 * (lo + hi)};
    const auto c = derived_constants(target, barrier);
    const auto sg = make_subsampled_gradient(1, 1, term, dual_mode, c.dual_lipschitz, 2.0);

    const auto skel = run_mzzss(barrier, sg, mode_x, Budget::events(100000), 4005);
    const auto samples = extract_primal_samples(skel, barrier, 50000);
    std::vector<double> xs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) xs[i] = samples[i][0];
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    CHECK(mean == doctest::Approx(0.3).epsilon(0.05));
    for (double x : xs) CHECK(x > 0.0);
}
