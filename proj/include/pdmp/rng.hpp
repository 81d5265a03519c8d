// Deterministic random number streams for PDMP simulation.
//
// Every stochastic component of a sampler (each Poisson clock, plus any
// auxiliary draws such as initial velocities) owns its own stream derived
// from a master seed and a stream id. Adding or removing clocks therefore
// never perturbs the draws seen by the remaining streams, and two runs with
// the same seed are bit-identical.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pdmp {

namespace detail {

// SplitMix64: used only to expand seeds into full engine states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// 256-layer ziggurat covering exp(-x^2/2): equal-area strips with the base
// strip absorbing the tail beyond r.
struct ZigguratTables {
    static constexpr double kR = 3.6541528853610088;
    double x[257];
    double y[257];

    ZigguratTables() {
        constexpr double v = 4.928673233974655e-3;
        const double f_r = std::exp(-0.5 * kR * kR);
        x[0] = v / f_r;
        x[1] = kR;
        y[0] = 0.0;
        y[1] = f_r;
        for (int i = 1; i < 256; ++i) {
            y[i + 1] = y[i] + v / x[i];
            x[i + 1] = y[i + 1] >= 1.0 ? 0.0 : std::sqrt(-2.0 * std::log(y[i + 1]));
        }
        x[256] = 0.0;
        y[256] = 1.0;
    }
};

inline const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

} // namespace detail

// xoshiro256++ engine with hand-rolled variate generation. The standard
// <random> distributions are implementation-defined, so we generate
// uniform/exponential/normal variates ourselves to keep output stable.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t s = master_seed ^ (0xD1B54A32D192ED03ull * (stream_id + 1));
        for (auto& w : state_) w = detail::splitmix64(s);
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1]; never returns 0 so log(u) is always finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on (lo, hi].
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Exp(rate) variate.
    double exponential(double rate = 1.0) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform01()) / rate;
    }

    // Standard normal via the ziggurat method; the wedge and tail cases
    // fall back to exact evaluation so the law is exact.
    double normal() {
        const auto& zig = detail::ziggurat();
        while (true) {
            const std::uint64_t bits = next_u64();
            const auto layer = static_cast<std::size_t>(bits & 0xFF);
            const bool negative = (bits >> 8) & 1;
            // 53-bit uniform magnitude in [0, 1).
            const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
            const double x = u * zig.x[layer];
            if (x < zig.x[layer + 1]) return negative ? -x : x;
            if (layer == 0) {
                // Tail beyond r: exact exponential-rejection tail sampler.
                double xx, yy;
                do {
                    xx = -std::log(uniform01()) / detail::ZigguratTables::kR;
                    yy = -std::log(uniform01());
                } while (yy + yy < xx * xx);
                const double t = detail::ZigguratTables::kR + xx;
                return negative ? -t : t;
            }
            const double y = zig.y[layer] + uniform01() * (zig.y[layer + 1] - zig.y[layer]);
            if (y < std::exp(-0.5 * x * x)) return negative ? -x : x;
        }
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Random sign, +1 or -1.
    double sign() { return (next_u64() & 1ull) ? 1.0 : -1.0; }

    std::vector<double> normal_vector(std::size_t d) {
        std::vector<double> out(d);
        for (auto& x : out) x = normal();
        return out;
    }

    // Uniform on the unit sphere of R^d (d = 1 gives a random sign).
    std::vector<double> unit_sphere(std::size_t d) {
        std::vector<double> v(d);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& x : v) {
                x = normal();
                norm2 += x * x;
            }
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& x : v) x *= inv;
        return v;
    }

    std::vector<double> rademacher_vector(std::size_t d) {
        std::vector<double> v(d);
        for (auto& x : v) x = sign();
        return v;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

// Stream ids: clocks use their own index; auxiliary draws use tagged ids far
// away from any plausible clock count.
inline constexpr std::uint64_t kAuxStreamTag = 0x100000000ull;

inline RngStream clock_stream(std::uint64_t master_seed, std::uint64_t clock_index) {
    return RngStream(master_seed, clock_index);
}

inline RngStream aux_stream(std::uint64_t master_seed, std::uint64_t tag = 0) {
    return RngStream(master_seed, kAuxStreamTag + tag);
}

} // namespace pdmp
