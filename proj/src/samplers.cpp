#include "pdmp/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmp {

namespace {

constexpr double kZeroGradientTol = 1e-14;

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void check_unit_velocity(const PhaseState& state) {
    for (double v : state.velocity)
        if (v != 1.0 && v != -1.0)
            throw std::invalid_argument("zig-zag: velocities must be +1 or -1");
}

} // namespace

double p_norm(const Vec& v, double p) {
    if (p == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    if (std::isinf(p)) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    }
    throw std::invalid_argument("p_norm: p must be 1, 2 or infinity");
}

// ---------------------------------------------------------------------------
// Zig-Zag
// ---------------------------------------------------------------------------

Vec zz_rates(const Vec& gradient_at_x, const Vec& velocity) {
    if (gradient_at_x.size() != velocity.size())
        throw std::invalid_argument("zz_rates: size mismatch");
    Vec rates(velocity.size());
    for (std::size_t i = 0; i < velocity.size(); ++i) {
        if (std::isnan(gradient_at_x[i])) throw std::runtime_error("zz_rates: NaN gradient");
        rates[i] = positive_part(velocity[i] * gradient_at_x[i]);
    }
    return rates;
}

double zz_total_rate(const Vec& gradient_at_x, const Vec& velocity) {
    const auto rates = zz_rates(gradient_at_x, velocity);
    double s = 0.0;
    for (double r : rates) s += r;
    return s;
}

PhaseState zz_flip(const PhaseState& state, std::size_t i) {
    if (i >= state.velocity.size()) throw std::out_of_range("zz_flip: coordinate out of range");
    PhaseState out = state;
    out.velocity[i] = -out.velocity[i];
    return out;
}

std::vector<AffineRateBound> zz_bounds(const ZigZagSpec& spec, const PhaseState& state) {
    Vec grad(spec.dimension);
    spec.gradient(state.position, grad);
    const double slope = spec.lipschitz * p_norm(state.velocity, 2.0);
    const auto rates = zz_rates(grad, state.velocity);
    std::vector<AffineRateBound> bounds(spec.dimension);
    for (std::size_t i = 0; i < spec.dimension; ++i) bounds[i] = {rates[i], slope};
    return bounds;
}

namespace {

class ZigZagModel final : public PdmpModel {
public:
    explicit ZigZagModel(ZigZagSpec spec) : spec_(std::move(spec)) {
        if (spec_.dimension == 0 || !spec_.gradient)
            throw std::invalid_argument("zig-zag: malformed spec");
        if (!(spec_.lipschitz >= 0.0))
            throw std::invalid_argument("zig-zag: lipschitz must be nonnegative");
        grad_.resize(spec_.dimension);
    }

    int dimension() const override { return static_cast<int>(spec_.dimension); }
    int clock_count() const override { return static_cast<int>(spec_.dimension); }

    void anchor(const PhaseState& state) override {
        if (!grad_valid_ || state.position != grad_position_) refresh_gradient(state.position);
    }

    AffineRateBound clock_bound(int clock, const PhaseState& state) override {
        const auto i = static_cast<std::size_t>(clock);
        const double rate = positive_part(state.velocity[i] * grad_[i]);
        return {rate, spec_.lipschitz * p_norm(state.velocity, 2.0)};
    }

    double rate_at_proposal(int clock, const PhaseState& advanced, RngStream&) override {
        refresh_gradient(advanced.position);
        const auto i = static_cast<std::size_t>(clock);
        if (std::isnan(grad_[i])) throw std::runtime_error("zig-zag: NaN gradient");
        return positive_part(advanced.velocity[i] * grad_[i]);
    }

    void apply_jump(int clock, PhaseState& state, RngStream&) override {
        state.velocity[static_cast<std::size_t>(clock)] *= -1.0;
    }

private:
    void refresh_gradient(const Vec& position) {
        spec_.gradient(position, grad_);
        grad_position_ = position;
        grad_valid_ = true;
    }

    ZigZagSpec spec_;
    Vec grad_, grad_position_;
    bool grad_valid_ = false;
};

} // namespace

std::unique_ptr<PdmpModel> make_zigzag_model(ZigZagSpec spec) {
    return std::make_unique<ZigZagModel>(std::move(spec));
}

Skeleton run_zzs(const ZigZagSpec& spec, const PhaseState& initial, Budget budget,
                 std::uint64_t seed) {
    check_unit_velocity(initial);
    auto model = make_zigzag_model(spec);
    return simulate_skeleton(*model, initial, budget, seed);
}

// ---------------------------------------------------------------------------
// Bouncy Particle
// ---------------------------------------------------------------------------

Vec bps_reflect(const Vec& gradient_at_x, const Vec& v) {
    if (gradient_at_x.size() != v.size()) throw std::invalid_argument("bps_reflect: size mismatch");
    double g2 = 0.0, vg = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        g2 += gradient_at_x[i] * gradient_at_x[i];
        vg += v[i] * gradient_at_x[i];
    }
    if (std::sqrt(g2) <= kZeroGradientTol)
        throw ZeroGradientError("bps_reflect: gradient norm too small to reflect");
    Vec out(v.size());
    const double c = 2.0 * vg / g2;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - c * gradient_at_x[i];
    return out;
}

namespace {

class BouncyModel final : public PdmpModel {
public:
    explicit BouncyModel(BouncySpec spec) : spec_(std::move(spec)) {
        if (spec_.dimension == 0 || !spec_.gradient)
            throw std::invalid_argument("bouncy: malformed spec");
        if (!(spec_.refresh_rate > 0.0))
            throw std::invalid_argument("bouncy: refresh rate must be positive");
        grad_.resize(spec_.dimension);
    }

    int dimension() const override { return static_cast<int>(spec_.dimension); }
    int clock_count() const override { return 2; } // 0 = reflection, 1 = refreshment

    void anchor(const PhaseState& state) override {
        if (!grad_valid_ || state.position != grad_position_) refresh_gradient(state.position);
    }

    AffineRateBound clock_bound(int clock, const PhaseState& state) override {
        if (clock == kRefresh) return {spec_.refresh_rate, 0.0};
        const double vnorm = p_norm(state.velocity, 2.0);
        const double intercept = positive_part(dot(state.velocity, grad_)) + spec_.refresh_rate;
        return {intercept, spec_.lipschitz * vnorm * vnorm};
    }

    bool clock_is_exact(int clock) const override { return clock == kRefresh; }

    double rate_at_proposal(int clock, const PhaseState& advanced, RngStream&) override {
        if (clock == kRefresh) return spec_.refresh_rate;
        refresh_gradient(advanced.position);
        return positive_part(dot(advanced.velocity, grad_));
    }

    void apply_jump(int clock, PhaseState& state, RngStream& rng) override {
        if (clock == kReflect) {
            anchor(state);
            try {
                state.velocity = bps_reflect(grad_, state.velocity);
                return;
            } catch (const ZeroGradientError&) {
                // Reflection undefined at a critical point; refresh instead.
            }
        }
        state.velocity = spec_.refresh_dist == RefreshDist::UnitSphere
                             ? rng.unit_sphere(spec_.dimension)
                             : rng.normal_vector(spec_.dimension);
    }

private:
    static constexpr int kReflect = 0;
    static constexpr int kRefresh = 1;

    static double dot(const Vec& a, const Vec& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }

    void refresh_gradient(const Vec& position) {
        spec_.gradient(position, grad_);
        grad_position_ = position;
        grad_valid_ = true;
    }

    BouncySpec spec_;
    Vec grad_, grad_position_;
    bool grad_valid_ = false;
};

} // namespace

std::unique_ptr<PdmpModel> make_bouncy_model(BouncySpec spec) {
    return std::make_unique<BouncyModel>(std::move(spec));
}

Skeleton run_bps(const BouncySpec& spec, const PhaseState& initial, Budget budget,
                 std::uint64_t seed) {
    auto model = make_bouncy_model(spec);
    return simulate_skeleton(*model, initial, budget, seed);
}

// ---------------------------------------------------------------------------
// Subsampled Zig-Zag
// ---------------------------------------------------------------------------

SubsampledGradient make_subsampled_gradient(
    std::size_t dimension, int num_terms,
    std::function<void(int j, const Vec& x, Vec& g)> term_gradient, Vec reference_point,
    double lipschitz, double norm_order) {
    if (dimension == 0 || num_terms < 1 || !term_gradient)
        throw std::invalid_argument("subsampled gradient: malformed parameters");
    if (reference_point.size() != dimension)
        throw std::invalid_argument("subsampled gradient: reference point size mismatch");

    SubsampledGradient sg;
    sg.dimension = dimension;
    sg.num_terms = num_terms;
    sg.term_gradient = std::move(term_gradient);
    sg.reference_point = std::move(reference_point);
    sg.lipschitz = lipschitz;
    sg.norm_order = norm_order;

    sg.reference_term_gradients.resize(static_cast<std::size_t>(num_terms));
    sg.reference_gradient.assign(dimension, 0.0);
    Vec g(dimension);
    for (int j = 0; j < num_terms; ++j) {
        sg.term_gradient(j, sg.reference_point, g);
        sg.reference_term_gradients[static_cast<std::size_t>(j)] = g;
        for (std::size_t i = 0; i < dimension; ++i) sg.reference_gradient[i] += g[i];
    }
    for (auto& v : sg.reference_gradient) v /= static_cast<double>(num_terms);
    return sg;
}

double ss_gradient_estimate(const SubsampledGradient& sg, int j, const Vec& x, std::size_t i) {
    if (j < 0 || j >= sg.num_terms)
        throw std::out_of_range("ss_gradient_estimate: term index out of range");
    if (i >= sg.dimension)
        throw std::out_of_range("ss_gradient_estimate: coordinate out of range");
    Vec g(sg.dimension);
    sg.term_gradient(j, x, g);
    return sg.reference_gradient[i] + g[i] -
           sg.reference_term_gradients[static_cast<std::size_t>(j)][i];
}

double ss_estimated_rate(const SubsampledGradient& sg, const PhaseState& state, std::size_t i,
                         int j) {
    return positive_part(state.velocity[i] * ss_gradient_estimate(sg, j, state.position, i));
}

namespace {

class SubsampledZigZagModel final : public PdmpModel {
public:
    explicit SubsampledZigZagModel(SubsampledGradient sg) : sg_(std::move(sg)) {
        term_grad_.resize(sg_.dimension);
    }

    int dimension() const override { return static_cast<int>(sg_.dimension); }
    int clock_count() const override { return static_cast<int>(sg_.dimension); }
    std::int64_t gradient_cost_denominator() const override { return sg_.num_terms; }

    AffineRateBound clock_bound(int clock, const PhaseState& state) override {
        const auto i = static_cast<std::size_t>(clock);
        Vec diff(sg_.dimension);
        for (std::size_t k = 0; k < sg_.dimension; ++k)
            diff[k] = state.position[k] - sg_.reference_point[k];
        const double intercept =
            positive_part(state.velocity[i] * sg_.reference_gradient[i]) +
            sg_.lipschitz * p_norm(diff, sg_.norm_order);
        const double slope = sg_.lipschitz * p_norm(state.velocity, sg_.norm_order);
        return {intercept, slope};
    }

    double rate_at_proposal(int clock, const PhaseState& advanced, RngStream& rng) override {
        const auto i = static_cast<std::size_t>(clock);
        const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(sg_.num_terms)));
        sg_.term_gradient(j, advanced.position, term_grad_);
        const double estimate = sg_.reference_gradient[i] + term_grad_[i] -
                                sg_.reference_term_gradients[static_cast<std::size_t>(j)][i];
        return positive_part(advanced.velocity[i] * estimate);
    }

    void apply_jump(int clock, PhaseState& state, RngStream&) override {
        state.velocity[static_cast<std::size_t>(clock)] *= -1.0;
    }

private:
    SubsampledGradient sg_;
    Vec term_grad_;
};

} // namespace

std::unique_ptr<PdmpModel> make_subsampled_zigzag_model(SubsampledGradient sg) {
    return std::make_unique<SubsampledZigZagModel>(std::move(sg));
}

Skeleton run_zzss(const SubsampledGradient& sg, const PhaseState& initial, Budget budget,
                  std::uint64_t seed) {
    check_unit_velocity(initial);
    auto model = make_subsampled_zigzag_model(sg);
    return simulate_skeleton(*model, initial, budget, seed);
}

} // namespace pdmp
