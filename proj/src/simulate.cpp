#include "pdmp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdmp/thinning.hpp"

namespace pdmp {

namespace {

// Relative slack absorbing floating-point noise when a rate sits exactly on
// its bound (e.g. one-dimensional Zig-Zag where bound and rate coincide).
// Anything beyond this is a genuine bound violation and aborts the run.
constexpr double kBoundSlackRel = 1e-9;
constexpr double kBoundSlackAbs = 1e-12;

} // namespace

Skeleton simulate_skeleton(PdmpModel& model, const PhaseState& initial, Budget budget,
                           std::uint64_t seed) {
    const int n_clocks = model.clock_count();
    if (n_clocks <= 0) throw std::invalid_argument("simulate_skeleton: model has no clocks");
    if (!(budget.amount >= 1.0))
        throw std::invalid_argument("simulate_skeleton: budget must be at least 1");
    if (initial.position.size() != initial.velocity.size() || initial.position.empty())
        throw std::invalid_argument("simulate_skeleton: malformed initial state");
    if (!model.admissible(initial))
        throw DomainViolationError("simulate_skeleton: initial state outside admissible set");

    std::vector<RngStream> streams;
    streams.reserve(static_cast<std::size_t>(n_clocks));
    for (int c = 0; c < n_clocks; ++c) streams.push_back(clock_stream(seed, static_cast<std::uint64_t>(c)));

    const std::int64_t cost_den = model.gradient_cost_denominator();
    const bool event_budget = budget.kind == Budget::Kind::Events;
    if (!event_budget) {
        bool any_thinned = false;
        for (int c = 0; c < n_clocks; ++c) any_thinned |= !model.clock_is_exact(c);
        if (!any_thinned)
            throw std::invalid_argument(
                "simulate_skeleton: a gradient budget needs at least one thinned clock");
    }

    Skeleton skel;
    skel.events.push_back({0.0, initial});
    skel.cum_evals.push_back(0.0);

    PhaseState state = initial;
    double t = 0.0;
    std::int64_t accepted = 0;

    model.anchor(state);

    while (true) {
        if (event_budget && accepted >= static_cast<std::int64_t>(budget.amount)) break;

        // Draw one proposal per clock from its re-anchored bound; the
        // earliest proposal wins.
        double tau_min = std::numeric_limits<double>::infinity();
        int winner = -1;
        AffineRateBound winner_bound;
        for (int c = 0; c < n_clocks; ++c) {
            const AffineRateBound bound = model.clock_bound(c, state);
            const double tau = invert_affine_bound(bound, streams[static_cast<std::size_t>(c)].exponential());
            ++skel.stats.clock_draws;
            if (tau < tau_min) {
                tau_min = tau;
                winner = c;
                winner_bound = bound;
            }
        }
        if (winner < 0) break; // all clocks silent forever: path frozen at t

        const bool exact = model.clock_is_exact(winner);
        if (!event_budget && !exact) {
            // Would the next rate evaluation exceed the gradient budget?
            const double next_evals =
                static_cast<double>(skel.stats.proposals + 1) / static_cast<double>(cost_den);
            if (next_evals > budget.amount * (1.0 + 1e-12)) break;
        }

        state.advance_in_place(tau_min);
        t += tau_min;
        if (!model.admissible(state))
            throw DomainViolationError("simulate_skeleton: state left the admissible set");

        bool accept = true;
        if (!exact) {
            RngStream& rng = streams[static_cast<std::size_t>(winner)];
            const double true_rate = model.rate_at_proposal(winner, state, rng);
            ++skel.stats.proposals;
            skel.stats.gradient_evaluations =
                static_cast<double>(skel.stats.proposals) / static_cast<double>(cost_den);
            if (std::isnan(true_rate))
                throw std::runtime_error("simulate_skeleton: NaN rate at proposal");
            const double bound_rate = winner_bound.value(tau_min);
            if (true_rate > bound_rate * (1.0 + kBoundSlackRel) + kBoundSlackAbs)
                throw BoundViolationError(state, tau_min, true_rate, bound_rate);
            accept = bound_rate > 0.0 &&
                     rng.uniform01() < std::min(1.0, true_rate / bound_rate);
        }

        if (accept) {
            model.apply_jump(winner, state, streams[static_cast<std::size_t>(winner)]);
            ++accepted;
            ++skel.stats.acceptances;
            skel.events.push_back({t, state});
            skel.cum_evals.push_back(skel.stats.gradient_evaluations);
        }
        // Rejected proposals simply re-anchor at the advanced state; the
        // thinned process is memoryless so fresh clock draws preserve the law.
        model.anchor(state);
        skel.final_time = t;
    }

    return skel;
}

namespace {

std::size_t segment_index(const Skeleton& skel, double t) {
    // Last event with time <= t.
    const auto it = std::upper_bound(
        skel.events.begin(), skel.events.end(), t,
        [](double value, const SkeletonEvent& e) { return value < e.time; });
    return static_cast<std::size_t>(std::distance(skel.events.begin(), it)) - 1;
}

} // namespace

std::vector<std::vector<double>> extract_samples(const Skeleton& skeleton, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("extract_samples: need n >= 1");
    if (skeleton.events.empty()) throw std::invalid_argument("extract_samples: empty skeleton");
    if (!(skeleton.final_time > 0.0))
        throw std::invalid_argument("extract_samples: final_time must be positive");

    const double T = skeleton.final_time;
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) {
        const double tk = T * static_cast<double>(k) / static_cast<double>(n);
        const SkeletonEvent& e = skeleton.events[segment_index(skeleton, tk)];
        const double s = tk - e.time;
        std::vector<double> x = e.state.position;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * e.state.velocity[i];
        out.push_back(std::move(x));
    }
    return out;
}

double evals_at_time(const Skeleton& skeleton, double t) {
    if (skeleton.events.empty()) return 0.0;
    if (t >= skeleton.final_time) return skeleton.stats.gradient_evaluations;
    if (t <= 0.0) return 0.0;
    const std::size_t k = segment_index(skeleton, t);
    const double c0 = skeleton.cum_evals[k];
    if (k + 1 >= skeleton.events.size()) {
        // Beyond the last event: interpolate toward the final tally.
        const double t0 = skeleton.events[k].time;
        const double span = skeleton.final_time - t0;
        if (span <= 0.0) return c0;
        const double frac = (t - t0) / span;
        return c0 + frac * (skeleton.stats.gradient_evaluations - c0);
    }
    const double t0 = skeleton.events[k].time;
    const double t1 = skeleton.events[k + 1].time;
    const double c1 = skeleton.cum_evals[k + 1];
    if (t1 <= t0) return c1;
    return c0 + (t - t0) / (t1 - t0) * (c1 - c0);
}

} // namespace pdmp
