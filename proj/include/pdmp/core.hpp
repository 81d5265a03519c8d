// Core state and bookkeeping types shared by all PDMP samplers.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmp {

// Space the simulated coordinates live in: the constrained set itself
// (Primal) or its unconstrained image under a mirror map (Dual).
enum class Space { Primal, Dual };

// Position/velocity pair of a PDMP. Zig-Zag-family states carry velocities
// in {-1, +1}^d; bouncy-particle states carry arbitrary real velocities.
struct PhaseState {
    std::vector<double> position;
    std::vector<double> velocity;
    Space space = Space::Primal;

    std::size_t dimension() const { return position.size(); }

    // State advanced along the linear flow x + s*v (velocity unchanged).
    PhaseState advanced(double s) const {
        PhaseState out = *this;
        for (std::size_t i = 0; i < position.size(); ++i)
            out.position[i] += s * velocity[i];
        return out;
    }

    void advance_in_place(double s) {
        for (std::size_t i = 0; i < position.size(); ++i)
            position[i] += s * velocity[i];
    }
};

// Affine dominating bound for a jump rate along a proposal segment:
// s -> (intercept + slope*s)^+. The intercept must be nonnegative; the
// slope may be negative, in which case the total mass is finite.
struct AffineRateBound {
    double intercept = 0.0;
    double slope = 0.0;

    double value(double s) const {
        const double r = intercept + slope * s;
        return r > 0.0 ? r : 0.0;
    }
};

// Simulation effort counters. gradient_evaluations may be fractional: a
// subsampled rate evaluation touching one of K terms counts 1/K.
struct ThinningStats {
    std::int64_t proposals = 0;
    std::int64_t acceptances = 0;
    std::int64_t clock_draws = 0;
    double gradient_evaluations = 0.0;
};

struct SkeletonEvent {
    double time = 0.0;
    PhaseState state;
};

// The lossless record of a PDMP path: accepted event times with post-jump
// states, the final simulated time, and effort counters. cum_evals[k] is the
// gradient-evaluation count consumed up to (and including) event k, used for
// epoch-resolved diagnostics.
struct Skeleton {
    std::vector<SkeletonEvent> events;
    double final_time = 0.0;
    ThinningStats stats;
    std::vector<double> cum_evals;
};

struct Budget {
    enum class Kind { Events, GradientEvaluations };
    Kind kind = Kind::Events;
    double amount = 0.0;

    static Budget events(std::int64_t n) {
        return Budget{Kind::Events, static_cast<double>(n)};
    }
    static Budget gradient_evaluations(double n) {
        return Budget{Kind::GradientEvaluations, n};
    }
};

// Raised when a thinning proposal observes a true rate above its dominating
// bound. This signals an invalid bound (e.g. a wrong Lipschitz constant) and
// is never clipped away.
class BoundViolationError : public std::runtime_error {
public:
    BoundViolationError(PhaseState state, double s, double true_rate, double bound_rate)
        : std::runtime_error("thinning bound violated: rate " + std::to_string(true_rate) +
                             " > bound " + std::to_string(bound_rate) + " at s = " +
                             std::to_string(s)),
          state(std::move(state)), proposal_time(s), true_rate(true_rate),
          bound_rate(bound_rate) {}

    PhaseState state;
    double proposal_time;
    double true_rate;
    double bound_rate;
};

class DomainViolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pdmp
