#include <doctest.h>

#include <cmath>
#include <vector>

#include "pdmp/metrics.hpp"
#include "pdmp/targets.hpp"

using namespace pdmp;
using Vec = std::vector<double>;

namespace {

linalg::Matrix diag2(double a, double b) {
    linalg::Matrix m(2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

linalg::Matrix toeplitz_sigma(std::size_t d) {
    linalg::Matrix m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m(i, j) = 1.0 / (1.0 + std::abs(static_cast<double>(i) - static_cast<double>(j)));
    return m;
}

void check_gradient_fd(const Target& t, const Vec& x, double rel_tol = 1e-6) {
    const Vec g = t.gradient(x);
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (t.potential(xp) - t.potential(xm)) / (2.0 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(rel_tol).scale(1.0));
    }
}

} // namespace

TEST_CASE("gamma product potential and gradient") {
    GammaProduct g({3.0}, {10.0});
    CHECK(g.potential({1.0}) == doctest::Approx(10.0));
    CHECK(g.gradient({1.0})[0] == doctest::Approx(8.0));
    CHECK(g.in_domain({0.5}));
    CHECK_FALSE(g.in_domain({0.0}));

    RngStream rng(1, 0);
    for (int k = 0; k < 100; ++k) check_gradient_fd(g, {rng.uniform(0.05, 2.0)});
}

TEST_CASE("truncated gaussian potential and gradient") {
    TruncatedGaussian t(diag2(1.0, 0.01), {-1.0, -1.0}, {1.0, 1.0});
    CHECK(t.potential({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(t.gradient({0.0, 0.0})[0] == doctest::Approx(0.0));
    CHECK(t.gradient({0.0, 0.0})[1] == doctest::Approx(0.0));
    CHECK(t.gradient({0.5, 0.1})[0] == doctest::Approx(0.5));
    CHECK(t.gradient({0.5, 0.1})[1] == doctest::Approx(10.0));

    TruncatedGaussian big(toeplitz_sigma(5));
    RngStream rng(2, 0);
    for (int k = 0; k < 100; ++k) {
        Vec x(5);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        check_gradient_fd(big, x);
    }
}

TEST_CASE("dirichlet posterior potential and gradient") {
    DirichletPosterior post({10.0, 5.0, 5.0}, {0.5, 0.5, 0.5}, {});
    // Uniform counts put the mode at the simplex center, where the reduced
    // gradient vanishes by symmetry.
    DirichletPosterior sym({7.0, 7.0, 7.0}, {1.0, 1.0, 1.0}, {});
    const Vec center{1.0 / 3.0, 1.0 / 3.0};
    for (double gi : sym.gradient(center)) CHECK(gi == doctest::Approx(0.0).scale(1.0));

    RngStream rng(3, 0);
    for (int k = 0; k < 100; ++k) {
        Vec x(2);
        x[0] = rng.uniform(0.05, 0.6);
        x[1] = rng.uniform(0.05, 0.9 - x[0]);
        check_gradient_fd(post, x);
    }
}

TEST_CASE("derived constants match the closed forms") {
    SUBCASE("gamma") {
        GammaProduct g({3.0}, {10.0});
        EntropicQuadraticBarrier b(1);
        const auto c = derived_constants(g, b);
        CHECK(c.dual_lipschitz == doctest::Approx(3.05));
        CHECK(c.self_concordance == doctest::Approx(1.0));
        CHECK(c.relative_gradient_bound == doctest::Approx(10.0)); // sqrt(max{100, 4})
        CHECK(c.relative_smoothness == doctest::Approx(2.0));
        CHECK(c.mlaa_step == doctest::Approx(1.0 / 3.05));
        CHECK(c.mlam_step == doctest::Approx(1.0 / 22.0));
    }
    SUBCASE("dirichlet") {
        DirichletPosterior post({4000.0, 3000.0, 2000.0, 900.0, 100.0},
                                {0.1, 0.1, 0.1, 0.1, 0.1}, {});
        SimplexEntropyBarrier b(5);
        const auto c = derived_constants(post, b);
        CHECK(c.dual_lipschitz == doctest::Approx(10000.5));
        CHECK(c.mlaa_step == doctest::Approx(1.0 / 10000.5));
    }
    SUBCASE("unsupported pair throws") {
        GammaProduct g({3.0}, {10.0});
        HypercubeBarrier b(1);
        CHECK_THROWS_AS(derived_constants(static_cast<const Target&>(g),
                                          static_cast<const BarrierMap&>(b)),
                        std::invalid_argument);
    }
}

TEST_CASE("gamma dual curvature stays below its lipschitz constant") {
    GammaProduct g({3.0}, {10.0});
    EntropicQuadraticBarrier b(1);
    const auto c = derived_constants(g, b);
    // Sampled second differences of the dual potential never exceed L_V.
    RngStream rng(4, 0);
    for (int k = 0; k < 1000; ++k) {
        const double z = rng.uniform(-30.0, 10.0);
        const double h = 1e-5;
        auto dual_grad = [&](double zeta) {
            const double x = b.piece_invert(0, zeta);
            const double d2 = b.piece_d2(0, x);
            return g.gradient({x})[0] / d2 + b.piece_d3(0, x) / (d2 * d2);
        };
        const double curv = (dual_grad(z + h) - dual_grad(z - h)) / (2.0 * h);
        CHECK(std::abs(curv) <= c.dual_lipschitz * (1.0 + 1e-6));
    }
}

TEST_CASE("gamma exact sampler reproduces textbook moments") {
    GammaProduct g({3.0}, {10.0});
    const auto samples = g.exact_samples(100000, 77);
    std::vector<double> xs(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) xs[i] = samples[i][0];
    const double m = metrics::mean(xs);
    const double v = metrics::variance(xs);
    // mean alpha/beta = 0.3, variance alpha/beta^2 = 0.03
    CHECK(std::abs(m - 0.3) < 3.0 * std::sqrt(0.03 / 100000.0));
    double mu4 = 0.0;
    for (double x : xs) mu4 += std::pow(x - m, 4);
    mu4 /= static_cast<double>(xs.size());
    const double se_var = std::sqrt((mu4 - v * v) / static_cast<double>(xs.size()));
    CHECK(std::abs(v - 0.03) < 3.0 * se_var);
}

TEST_CASE("dirichlet exact sampler matches closed-form marginal moments") {
    DirichletPosterior post({5.0, 3.0, 2.0}, {0.5, 0.5, 0.5}, {});
    const auto samples = post.exact_samples(200000, 99);
    std::vector<double> x0(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) x0[i] = samples[i][0];
    const double m = metrics::mean(x0);
    const double v = metrics::variance(x0);
    CHECK(std::abs(m - post.marginal_mean(0)) <
          3.0 * post.marginal_std(0) / std::sqrt(200000.0));
    double mu4 = 0.0;
    for (double x : x0) mu4 += std::pow(x - m, 4);
    mu4 /= static_cast<double>(x0.size());
    const double se_var = std::sqrt((mu4 - v * v) / static_cast<double>(x0.size()));
    CHECK(std::abs(v - post.marginal_std(0) * post.marginal_std(0)) < 3.0 * se_var);
}

TEST_CASE("truncated gaussian rejection sampler stays inside the box") {
    TruncatedGaussian t(diag2(1.0, 0.01), {-1.0, -1.0}, {1.0, 1.0});
    const auto samples = t.exact_samples(20000, 5);
    REQUIRE(samples.size() == 20000);
    for (const auto& s : samples) {
        CHECK(s[0] > -1.0);
        CHECK(s[0] < 1.0);
        CHECK(s[1] > -1.0);
        CHECK(s[1] < 1.0);
    }
    // Symmetric box: both means vanish.
    std::vector<double> x0(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) x0[i] = samples[i][0];
    CHECK(std::abs(metrics::mean(x0)) < 3.0 * 1.0 / std::sqrt(20000.0));
}

TEST_CASE("truncated gaussian sampler is deterministic per thread count") {
    TruncatedGaussian t(diag2(1.0, 0.01), {-1.0, -1.0}, {1.0, 1.0});
    const auto a = t.exact_samples(5000, 42, 2);
    const auto b = t.exact_samples(5000, 42, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("multinomial dataset partitions counts into equal batches") {
    const Vec p{0.2401, 0.2669, 0.0374, 0.2692, 0.1864};
    const auto post = sample_multinomial_dataset(p, 10000, 50, Vec(5, 0.1), 2024);
    CHECK(post.batch_count() == 50);
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (const auto& b : post.batches()) s += b[i];
        CHECK(s == doctest::Approx(post.counts()[i]));
        total += post.counts()[i];
    }
    CHECK(total == doctest::Approx(10000.0));
    for (const auto& b : post.batches()) {
        double bs = 0.0;
        for (double v : b) bs += v;
        CHECK(bs == doctest::Approx(200.0));
    }
    // Multinomial mean n p_1 = 2401 within 3 standard deviations.
    CHECK(std::abs(post.counts()[0] - 2401.0) <
          3.0 * std::sqrt(10000.0 * 0.2401 * (1.0 - 0.2401)));

    SUBCASE("single batch equals the counts") {
        const auto one = sample_multinomial_dataset(p, 1000, 1, Vec(5, 0.1), 7);
        REQUIRE(one.batch_count() == 1);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(one.batches()[0][i] == doctest::Approx(one.counts()[i]));
    }
    SUBCASE("indivisible batch count is rejected") {
        CHECK_THROWS_AS(sample_multinomial_dataset(p, 1000, 3, Vec(5, 0.1), 7),
                        std::invalid_argument);
    }
}

TEST_CASE("dirichlet dual pieces average to the full dual gradient") {
    const Vec p{0.2401, 0.2669, 0.0374, 0.2692, 0.1864};
    const auto post = sample_multinomial_dataset(p, 10000, 50, Vec(5, 0.1), 31);
    SimplexEntropyBarrier barrier(5);
    const auto pieces = dirichlet_dual_pieces(post, barrier);
    CHECK(pieces.scale == doctest::Approx(10000.5));

    RngStream rng(8, 0);
    for (int k = 0; k < 100; ++k) {
        Vec zeta(4);
        for (auto& z : zeta) z = rng.uniform(-2.0, 2.0);
        Vec avg(4, 0.0), g(4);
        for (int j = 0; j < pieces.num_terms; ++j) {
            pieces.term_gradient_into(j, zeta, g);
            for (std::size_t i = 0; i < 4; ++i) avg[i] += g[i];
        }
        for (auto& v : avg) v /= static_cast<double>(pieces.num_terms);
        Vec full(4);
        pieces.gradient_into(zeta, full);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(avg[i] - full[i]) < 1e-10 * std::max(1.0, std::abs(full[i])));
    }

    // The dual mode is a stationary point of V.
    Vec g(4);
    pieces.gradient_into(pieces.dual_mode, g);
    for (double gi : g) CHECK(std::abs(gi) < 1e-8);

    SUBCASE("uniform counts center the dual mode at zero") {
        DirichletPosterior sym({100.0, 100.0, 100.0}, {1.0, 1.0, 1.0},
                               {{50.0, 50.0, 50.0}, {50.0, 50.0, 50.0}});
        SimplexEntropyBarrier b3(3);
        const auto ps = dirichlet_dual_pieces(sym, b3);
        for (double z : ps.dual_mode) CHECK(z == doctest::Approx(0.0).scale(1.0));
    }
}
