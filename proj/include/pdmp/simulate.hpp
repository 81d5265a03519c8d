// The generic PDMP simulation loop: per-clock affine bounds, Poisson
// thinning, and linear deterministic flow between events.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pdmp/core.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

// A PDMP expressed as a set of event clocks over a linear flow. Each clock
// is either thinned (an affine bound dominates its true rate along the
// flow) or exact (its bound IS the rate, so proposals are always accepted).
//
// The simulator re-anchors every bound at the current state after each
// proposal, so clock_bound() is always called with the freshest state. The
// winning clock's rate_at_proposal() is called exactly once per proposal;
// models should cache whatever it computes (typically the gradient at the
// advanced position) because the next anchor is that same position.
class PdmpModel {
public:
    virtual ~PdmpModel() = default;

    virtual int dimension() const = 0;
    virtual int clock_count() const = 0;

    // Notify the model that the anchor state changed; a no-op for models
    // without shared per-anchor caches.
    virtual void anchor(const PhaseState& state) { (void)state; }

    virtual AffineRateBound clock_bound(int clock, const PhaseState& state) = 0;

    // True rate of the winning clock at the advanced state. May consume
    // randomness (subsampled rates draw a term index).
    virtual double rate_at_proposal(int clock, const PhaseState& advanced, RngStream& rng) = 0;

    virtual void apply_jump(int clock, PhaseState& state, RngStream& rng) = 0;

    // Exact clocks (e.g. constant-rate refreshment) skip the accept test.
    virtual bool clock_is_exact(int clock) const {
        (void)clock;
        return false;
    }

    // Thinned proposals cost 1/denominator gradient evaluations each
    // (denominator = number of subsampling terms, 1 for full gradients).
    virtual std::int64_t gradient_cost_denominator() const { return 1; }

    virtual bool admissible(const PhaseState& state) const {
        (void)state;
        return true;
    }
};

// Runs the proposal-thinning-jump loop from `initial` until the budget is
// exhausted (accepted-event count, or gradient evaluations). Deterministic
// given `seed`: each clock owns stream (seed, clock index).
//
// Throws BoundViolationError if a true rate exceeds its bound beyond
// floating-point slack, DomainViolationError if the state leaves the
// model's admissible set.
Skeleton simulate_skeleton(PdmpModel& model, const PhaseState& initial, Budget budget,
                           std::uint64_t seed);

// Path positions at the n equally spaced times t_k = k*T/n, k = 1..n,
// reconstructed from the skeleton by the linear flow.
std::vector<std::vector<double>> extract_samples(const Skeleton& skeleton, std::int64_t n);

// Cumulative gradient evaluations consumed by the path up to time t
// (step-interpolated at event resolution).
double evals_at_time(const Skeleton& skeleton, double t);

} // namespace pdmp
