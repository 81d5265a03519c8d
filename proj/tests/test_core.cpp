#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <limits>

#include "pdmp/metrics.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/skeleton_io.hpp"
#include "pdmp/thinning.hpp"

using namespace pdmp;

namespace {

// Forward integral of the clipped affine rate, computed geometrically from
// trapezoid areas per linear piece. Independent of the root-finding path in
// invert_affine_bound.
double integrate_bound(const AffineRateBound& b, double t) {
    auto trapezoid = [&](double s0, double s1) {
        return 0.5 * (b.value(s0) + b.value(s1)) * (s1 - s0);
    };
    if (b.slope == 0.0) return trapezoid(0.0, t);
    const double crossing = -b.intercept / b.slope;
    if (crossing <= 0.0 || crossing >= t) return trapezoid(0.0, t);
    return trapezoid(0.0, crossing) + trapezoid(crossing, t);
}

// Single-clock model with constant true rate, thinned under a configurable
// bound.
class ConstantRateModel final : public PdmpModel {
public:
    ConstantRateModel(double rate, AffineRateBound bound, int dim = 1)
        : rate_(rate), bound_(bound), dim_(dim) {}

    int dimension() const override { return dim_; }
    int clock_count() const override { return 1; }
    AffineRateBound clock_bound(int, const PhaseState&) override { return bound_; }
    double rate_at_proposal(int, const PhaseState&, RngStream&) override { return rate_; }
    void apply_jump(int, PhaseState&, RngStream&) override {}

private:
    double rate_;
    AffineRateBound bound_;
    int dim_;
};

// True rate grows faster than its declared bound: must abort.
class ViolatingModel final : public PdmpModel {
public:
    int dimension() const override { return 1; }
    int clock_count() const override { return 1; }
    AffineRateBound clock_bound(int, const PhaseState&) override { return {1.0, 0.0}; }
    double rate_at_proposal(int, const PhaseState& advanced, RngStream&) override {
        return 1.0 + 5.0 * std::abs(advanced.position[0]);
    }
    void apply_jump(int, PhaseState&, RngStream&) override {}
};

PhaseState unit_state() {
    PhaseState s;
    s.position = {0.0};
    s.velocity = {1.0};
    return s;
}

std::vector<double> inter_event_times(const Skeleton& skel) {
    std::vector<double> out;
    for (std::size_t k = 1; k < skel.events.size(); ++k)
        out.push_back(skel.events[k].time - skel.events[k - 1].time);
    return out;
}

} // namespace

TEST_CASE("invert_affine_bound closed forms") {
    CHECK(invert_affine_bound({1.0, 0.0}, 2.0) == doctest::Approx(2.0));
    // Root of t^2 + t - 4 = 0: hand value (-1 + sqrt(17)) / 2.
    CHECK(invert_affine_bound({1.0, 2.0}, 4.0) ==
          doctest::Approx((-1.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-12));
    CHECK(std::isinf(invert_affine_bound({0.0, 0.0}, 1.0)));
    // Decaying bound with total mass 1/2 below the draw.
    CHECK(std::isinf(invert_affine_bound({1.0, -1.0}, 0.6)));
    CHECK(invert_affine_bound({1.0, -1.0}, 0.4) ==
          doctest::Approx(1.0 - std::sqrt(0.2)).epsilon(1e-12));
}

TEST_CASE("invert_affine_bound rejects bad input") {
    CHECK_THROWS_AS(invert_affine_bound({1.0, 0.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_affine_bound({1.0, 0.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_affine_bound({-1.0, 0.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_affine_bound({std::nan(""), 0.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(invert_affine_bound({1.0, 0.0}, std::nan("")), std::invalid_argument);
}

TEST_CASE("invert_affine_bound inverts the forward integral") {
    RngStream rng(7, 0);
    int finite = 0;
    for (int k = 0; k < 10000; ++k) {
        const AffineRateBound b{rng.uniform(0.0, 10.0), rng.uniform(-2.0, 10.0)};
        const double e = rng.uniform(0.0, 20.0);
        const double t = invert_affine_bound(b, e);
        if (std::isinf(t)) {
            // Only possible when the total mass is finite and below the draw.
            REQUIRE(b.slope < 0.0);
            CHECK(b.intercept * b.intercept / (-2.0 * b.slope) < e);
            continue;
        }
        ++finite;
        CHECK(integrate_bound(b, t) == doctest::Approx(e).epsilon(1e-10));
    }
    CHECK(finite > 9000);
}

TEST_CASE("constant-rate clock with exact bound gives Exp(c) inter-event times") {
    ConstantRateModel model(2.0, {2.0, 0.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(100000), 11);
    REQUIRE(skel.events.size() == 100001);
    CHECK(skel.stats.acceptances == skel.stats.proposals); // acceptance ratio is one

    const auto gaps = inter_event_times(skel);
    const double m = metrics::mean(gaps);
    CHECK(std::abs(m - 0.5) < 3.0 * 0.5 / std::sqrt(100000.0));

    const double d = metrics::ks_statistic(
        gaps, [](double t) { return 1.0 - std::exp(-2.0 * t); });
    CHECK(std::sqrt(100000.0) * d < metrics::ks_critical_value(0.01));
}

TEST_CASE("thinned constant-rate clock is statistically exact") {
    // Loose bound (2, 1): rejections occur, the law must not change.
    ConstantRateModel model(2.0, {2.0, 1.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(100000), 23);
    CHECK(skel.stats.acceptances < skel.stats.proposals);

    const auto gaps = inter_event_times(skel);
    const double m = metrics::mean(gaps);
    CHECK(std::abs(m - 0.5) < 3.0 * 0.5 / std::sqrt(100000.0));

    const double d = metrics::ks_statistic(
        gaps, [](double t) { return 1.0 - std::exp(-2.0 * t); });
    CHECK(std::sqrt(100000.0) * d < metrics::ks_critical_value(0.01));
}

TEST_CASE("zero rate produces no events") {
    ConstantRateModel model(0.0, {0.0, 0.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(5), 3);
    CHECK(skel.events.size() == 1);
    CHECK(skel.final_time == 0.0);
}

TEST_CASE("simulation is deterministic in the seed") {
    ConstantRateModel a(2.0, {2.0, 1.0}), b(2.0, {2.0, 1.0});
    const auto s1 = simulate_skeleton(a, unit_state(), Budget::events(500), 99);
    const auto s2 = simulate_skeleton(b, unit_state(), Budget::events(500), 99);
    REQUIRE(s1.events.size() == s2.events.size());
    for (std::size_t k = 0; k < s1.events.size(); ++k) {
        CHECK(s1.events[k].time == s2.events[k].time);
        CHECK(s1.events[k].state.position == s2.events[k].state.position);
    }
    CHECK(s1.stats.proposals == s2.stats.proposals);
}

TEST_CASE("skeleton path consistency under the linear flow") {
    ConstantRateModel model(2.0, {2.0, 1.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(2000), 5);
    for (std::size_t k = 1; k < skel.events.size(); ++k) {
        const auto& prev = skel.events[k - 1];
        const auto& cur = skel.events[k];
        const double dt = cur.time - prev.time;
        CHECK(cur.state.position[0] ==
              doctest::Approx(prev.state.position[0] + dt * prev.state.velocity[0])
                  .epsilon(1e-10));
    }
}

TEST_CASE("bound violations abort instead of clipping") {
    ViolatingModel model;
    CHECK_THROWS_AS(simulate_skeleton(model, unit_state(), Budget::events(1000), 17),
                    BoundViolationError);
}

TEST_CASE("single event budget yields initial state plus one jump") {
    ConstantRateModel model(1.0, {1.0, 0.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(1), 2);
    CHECK(skel.events.size() == 2);
}

TEST_CASE("extract_samples walks the piecewise-linear path") {
    Skeleton skel;
    PhaseState s0 = unit_state();
    skel.events.push_back({0.0, s0});
    skel.final_time = 1.0;

    SUBCASE("single segment") {
        const auto xs = extract_samples(skel, 2);
        REQUIRE(xs.size() == 2);
        CHECK(xs[0][0] == doctest::Approx(0.5));
        CHECK(xs[1][0] == doctest::Approx(1.0));
    }
    SUBCASE("single sample lands at the final time") {
        const auto xs = extract_samples(skel, 1);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0][0] == doctest::Approx(1.0));
    }
    SUBCASE("velocity flip midway") {
        PhaseState s1;
        s1.position = {0.5};
        s1.velocity = {-1.0};
        skel.events.push_back({0.5, s1});
        const auto xs = extract_samples(skel, 2);
        CHECK(xs[0][0] == doctest::Approx(0.5));
        CHECK(xs[1][0] == doctest::Approx(0.0));
    }
    SUBCASE("rejects n = 0") { CHECK_THROWS_AS(extract_samples(skel, 0), std::invalid_argument); }
    SUBCASE("rejects empty skeletons") {
        Skeleton empty;
        empty.final_time = 1.0;
        CHECK_THROWS_AS(extract_samples(empty, 1), std::invalid_argument);
    }
}

TEST_CASE("rng streams are reproducible and well-behaved") {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differs = false;
    for (int i = 0; i < 100; ++i) differs |= (b.next_u64() != c.next_u64());
    CHECK(differs);

    RngStream r(1, 0);
    double mean_exp = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform01();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        mean_exp += r.exponential(2.0);
    }
    CHECK(mean_exp / 20000.0 == doctest::Approx(0.5).epsilon(0.05));

    const auto v = r.unit_sphere(7);
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normal variates pass a distributional test") {
    RngStream r(12345, 0);
    const std::size_t n = 200000;
    std::vector<double> xs(n);
    double mean = 0.0, m2 = 0.0;
    std::size_t tail = 0;
    for (auto& x : xs) {
        x = r.normal();
        mean += x;
        m2 += x * x;
        if (std::abs(x) > 3.6541528853610088) ++tail; // beyond the ziggurat base strip
    }
    mean /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(m2 - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
    // Tail mass beyond r is about 2.6e-4; require the sampler reaches it.
    CHECK(tail > 10);

    const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    const double d = metrics::ks_statistic(xs, cdf);
    CHECK(std::sqrt(static_cast<double>(n)) * d < metrics::ks_critical_value(0.01));
}

TEST_CASE("skeleton csv round-trips at full precision") {
    ConstantRateModel model(2.0, {2.0, 1.0});
    const auto skel = simulate_skeleton(model, unit_state(), Budget::events(50), 31);

    const auto path = std::filesystem::temp_directory_path() / "pdmp_skel_test.csv";
    write_skeleton_csv(skel, path.string());
    const auto back = read_skeleton_csv(path.string());
    REQUIRE(back.events.size() == skel.events.size());
    for (std::size_t k = 0; k < skel.events.size(); ++k) {
        CHECK(back.events[k].time == skel.events[k].time);
        CHECK(back.events[k].state.position == skel.events[k].state.position);
        CHECK(back.events[k].state.velocity == skel.events[k].state.velocity);
    }
    std::filesystem::remove(path);

    const auto stats_path = std::filesystem::temp_directory_path() / "pdmp_stats_test.json";
    write_stats_json(skel.stats, stats_path.string());
    std::ifstream sf(stats_path);
    std::string text((std::istreambuf_iterator<char>(sf)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"proposals\"") != std::string::npos);
    CHECK(text.find("\"acceptances\"") != std::string::npos);
    CHECK(text.find("\"clock_draws\"") != std::string::npos);
    CHECK(text.find("\"gradient_evaluations\"") != std::string::npos);
    std::filesystem::remove(stats_path);
}

TEST_CASE("dirichlet dataset json round-trips") {
    const std::vector<double> p{0.2, 0.3, 0.5};
    DirichletPosterior post({10.0, 20.0, 30.0}, {0.5, 0.5, 0.5},
                            {{5.0, 10.0, 15.0}, {5.0, 10.0, 15.0}});
    const auto path = std::filesystem::temp_directory_path() / "pdmp_dataset_test.json";
    write_dirichlet_dataset_json(post, p, path.string());
    std::vector<double> p_back;
    const auto back = read_dirichlet_dataset_json(path.string(), &p_back);
    CHECK(p_back == p);
    CHECK(back.counts() == post.counts());
    CHECK(back.prior() == post.prior());
    CHECK(back.batches() == post.batches());
    std::filesystem::remove(path);
}
