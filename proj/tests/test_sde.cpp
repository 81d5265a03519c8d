#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdmp/metrics.hpp"
#include "pdmp/mirror.hpp"
#include "pdmp/sde.hpp"

using namespace pdmp;

namespace {

GradientFn quadratic_gradient() {
    return [](const Vec& x, Vec& g) { g = x; };
}

GradientFn zero_gradient() {
    return [](const Vec& x, Vec& g) { g.assign(x.size(), 0.0); };
}

} // namespace

TEST_CASE("langevin step arithmetic") {
    SUBCASE("no drift, no noise") {
        const Vec x{0.7, -0.3};
        const auto out = ula_step(zero_gradient(), x, 0.1, {0.0, 0.0});
        CHECK(out == x);
    }
    SUBCASE("hand value on the quadratic potential") {
        const auto out = ula_step(quadratic_gradient(), {1.0}, 0.1, {0.0});
        CHECK(out[0] == doctest::Approx(0.9));
    }
    SUBCASE("noise scale is sqrt(2 dt) per coordinate") {
        const auto out = ula_step(zero_gradient(), {0.0}, 0.18, {1.0});
        CHECK(out[0] == doctest::Approx(std::sqrt(0.36)));
        // Sample variance over repeated unit steps matches 2 dt.
        RngStream rng(3, 0);
        std::vector<double> xs(20000);
        for (auto& v : xs) v = ula_step(zero_gradient(), {0.0}, 0.18, {rng.normal()})[0];
        CHECK(metrics::variance(xs) == doctest::Approx(0.36).epsilon(0.05));
    }
}

TEST_CASE("projected langevin clamps to the box") {
    const auto proj = box_projection({-1.0, -1.0}, {1.0, 1.0});
    SUBCASE("interior step equals the plain step") {
        const auto plain = ula_step(quadratic_gradient(), {0.2, 0.1}, 0.01, {0.3, -0.2});
        const auto projected =
            plmc_step(quadratic_gradient(), proj, {0.2, 0.1}, 0.01, {0.3, -0.2});
        CHECK(plain == projected);
    }
    SUBCASE("componentwise clamp") {
        Vec x{-0.3, 2.1};
        proj(x);
        CHECK(x[0] == doctest::Approx(-0.3));
        CHECK(x[1] == doctest::Approx(1.0));
        Vec y{1.7};
        const auto clamp1 = box_projection({-1.0}, {1.0});
        clamp1(y);
        CHECK(y[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("moreau-yosida step leaves the domain reachable but penalized") {
    const auto proj = box_projection({-1.0}, {1.0});
    SUBCASE("inside the box the penalty vanishes") {
        const auto a = myula_step(quadratic_gradient(), proj, {0.5}, 0.01, 0.01, {0.4});
        const auto b = ula_step(quadratic_gradient(), {0.5}, 0.01, {0.4});
        CHECK(a[0] == doctest::Approx(b[0]));
    }
    SUBCASE("outside the box the penalty pulls back by (dt/eps) distance") {
        // With dt = eps and zero potential gradient the pull is exactly
        // P(x) - x = -0.5.
        const auto out = myula_step(zero_gradient(), proj, {1.5}, 0.01, 0.01, {0.0});
        CHECK(out[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("simplex projection sort-and-threshold") {
    const auto proj = simplex_projection();
    SUBCASE("already on the simplex") {
        Vec x{0.5, 0.5};
        proj(x);
        CHECK(x[0] == doctest::Approx(0.5));
        CHECK(x[1] == doctest::Approx(0.5));
    }
    SUBCASE("hand value") {
        Vec x{0.6, 0.1, -0.2};
        proj(x);
        CHECK(x[0] == doctest::Approx(0.75));
        CHECK(x[1] == doctest::Approx(0.25));
        CHECK(x[2] == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("projection lands on the simplex and is idempotent") {
        RngStream rng(5, 0);
        for (int k = 0; k < 200; ++k) {
            Vec x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            proj(x);
            double s = 0.0;
            for (double v : x) {
                CHECK(v >= 0.0);
                s += v;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            Vec y = x;
            proj(y);
            for (std::size_t i = 0; i < x.size(); ++i)
                CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("additive-noise mirror step through the identity barrier is a langevin step") {
    IdentityBarrier barrier(2);
    TruncatedGaussian target(linalg::Matrix::identity(2));
    GradientFn dual_grad = [&](const Vec& z, Vec& g) { target.gradient_into(z, g); };
    const Vec zeta{0.4, -0.8};
    const Vec xi{0.3, 1.1};
    const auto [znext, xnext] = mlaa_step(barrier, dual_grad, zeta, 0.05, xi);
    const auto plain = ula_step(quadratic_gradient(), zeta, 0.05, xi);
    CHECK(znext == plain);
    CHECK(xnext == plain); // identity inverse map
}

TEST_CASE("additive-noise mirror step stays strictly inside the domain") {
    EntropicQuadraticBarrier barrier(1);
    GammaProduct target({3.0}, {10.0});
    DualPotential dual(barrier, target);
    GradientFn dual_grad = [&](const Vec& z, Vec& g) { dual.gradient_into(z, g); };

    RngStream rng(9, 0);
    Vec zeta = barrier.forward({0.3});
    for (int k = 0; k < 2000; ++k) {
        const auto [znext, xnext] = mlaa_step(barrier, dual_grad, zeta, 1.0 / 3.05,
                                              {rng.normal()});
        zeta = znext;
        CHECK(xnext[0] > 0.0);
    }
}

TEST_CASE("multiplicative-noise mirror step") {
    SUBCASE("identity barrier: drift equals the langevin drift, diffusion is additive") {
        IdentityBarrier barrier(1);
        GradientFn grad = quadratic_gradient();
        // Noise off: the half step is plain mirror descent.
        const auto drift = mlam_step_with_noise(barrier, grad, {1.0}, 0.1, 10,
                                                [](int, Vec& xi) { xi.assign(1, 0.0); });
        CHECK(drift[0] == doctest::Approx(0.9));

        // With noise, mean and variance match the langevin step in law.
        RngStream rng(11, 0);
        std::vector<double> xs(40000);
        for (auto& v : xs) v = mlam_step(barrier, grad, {1.0}, 0.1, 10, rng)[0];
        CHECK(metrics::mean(xs) == doctest::Approx(0.9).epsilon(0.01));
        CHECK(metrics::variance(xs) == doctest::Approx(0.2).epsilon(0.05));
    }
    SUBCASE("noise off reduces to mirror descent on any barrier") {
        EntropicQuadraticBarrier barrier(1);
        GammaProduct target({3.0}, {10.0});
        GradientFn grad = [&](const Vec& x, Vec& g) { target.gradient_into(x, g); };
        const Vec x{0.5};
        const double dt = 0.02;
        const auto stepped = mlam_step_with_noise(barrier, grad, x, dt, 10,
                                                  [](int, Vec& xi) { xi.assign(1, 0.0); });
        Vec zeta = barrier.forward(x);
        zeta[0] -= dt * target.gradient(x)[0];
        CHECK(stepped[0] == doctest::Approx(barrier.inverse(zeta)[0]).epsilon(1e-12));
    }
    SUBCASE("samples stay strictly inside the domain") {
        EntropicQuadraticBarrier barrier(1);
        GammaProduct target({3.0}, {10.0});
        GradientFn grad = [&](const Vec& x, Vec& g) { target.gradient_into(x, g); };
        RngStream rng(13, 0);
        Vec x{0.3};
        for (int k = 0; k < 1000; ++k) {
            x = mlam_step(barrier, grad, x, 1.0 / 22.0, 10, rng);
            CHECK(x[0] > 0.0);
        }
    }
    SUBCASE("inner step count is validated") {
        IdentityBarrier barrier(1);
        RngStream rng(1, 1);
        CHECK_THROWS_AS(mlam_step(barrier, quadratic_gradient(), {0.0}, 0.1, 0, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("subsampled langevin steps") {
    // Gaussian location model: term gradients x - y_j.
    const int K = 10;
    std::vector<double> ys(K);
    double ybar = 0.0;
    RngStream data_rng(15, 0);
    for (auto& y : ys) {
        y = data_rng.normal();
        ybar += y / K;
    }
    auto term = [ys](int j, const Vec& x, Vec& g) { g = {x[0] - ys[static_cast<std::size_t>(j)]}; };
    const auto sg = make_subsampled_gradient(1, K, term, {ybar}, 1.0, 2.0);

    SUBCASE("averaged estimates equal the full drift at any point") {
        Vec g(1);
        for (double x : {-1.3, 0.0, 2.4}) {
            double avg = 0.0;
            for (int j = 0; j < K; ++j) {
                ss_gradient_estimate_into(sg, j, {x}, g);
                avg += g[0];
            }
            avg /= K;
            CHECK(avg == doctest::Approx(x - ybar).epsilon(1e-12));
        }
    }
    SUBCASE("one term degenerates to the full gradient step") {
        auto term1 = [ys](int, const Vec& x, Vec& g) { g = {x[0]}; };
        const auto sg1 = make_subsampled_gradient(1, 1, term1, {0.0}, 1.0, 2.0);
        Vec g(1);
        ss_gradient_estimate_into(sg1, 0, {0.7}, g);
        CHECK(g[0] == doctest::Approx(0.7));
    }
}

TEST_CASE("subsampled mirror chains run at 1/K cost per step") {
    const Vec p{0.2401, 0.2669, 0.0374, 0.2692, 0.1864};
    const auto post = sample_multinomial_dataset(p, 1000, 10, Vec(5, 0.1), 21);
    auto barrier = make_simplex_entropy_barrier(5);
    const auto pieces =
        dirichlet_dual_pieces(post, dynamic_cast<const SimplexEntropyBarrier&>(*barrier));
    const auto sg = subsampled_dual_gradient(pieces);

    const Vec x0(4, 0.2);
    const auto chain = run_smlaa_chain(*barrier, sg, x0, 1.0 / pieces.scale, 500, 33);
    CHECK(chain.evals_per_step == doctest::Approx(0.1));
    REQUIRE(chain.samples.size() == 500);
    for (const auto& s : chain.samples) {
        REQUIRE(s.size() == 5);
        double sum = 0.0;
        for (double v : s) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}
