#include "pdmp/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 200;
constexpr int kBisectMaxIter = 400;

} // namespace

// ---------------------------------------------------------------------------
// SeparableBarrier
// ---------------------------------------------------------------------------

double SeparableBarrier::value(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i) s += piece_value(i, x[i]);
    return s;
}

void SeparableBarrier::forward_into(const Vec& x, Vec& zeta) const {
    zeta.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) zeta[i] = piece_d1(i, x[i]);
}

void SeparableBarrier::inverse_into(const Vec& zeta, Vec& x) const {
    x.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) x[i] = piece_invert(i, zeta[i]);
}

linalg::Matrix SeparableBarrier::hessian(const Vec& x) const {
    linalg::Matrix h(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) h(i, i) = piece_d2(i, x[i]);
    return h;
}

linalg::Matrix SeparableBarrier::conjugate_hessian(const Vec& zeta) const {
    linalg::Matrix h(dimension());
    for (std::size_t i = 0; i < dimension(); ++i)
        h(i, i) = 1.0 / piece_d2(i, piece_invert(i, zeta[i]));
    return h;
}

double SeparableBarrier::log_det_conjugate_hessian(const Vec& zeta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dimension(); ++i)
        s -= std::log(piece_d2(i, piece_invert(i, zeta[i])));
    return s;
}

void SeparableBarrier::grad_log_det_conjugate_hessian_into(const Vec& zeta, Vec& out) const {
    // d/dzeta_i of -log g''(x_i(zeta_i)) with x'(zeta) = 1/g'' gives
    // -g''' / g''^2 evaluated at x_i(zeta_i).
    out.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) {
        const double x = piece_invert(i, zeta[i]);
        const double d2 = piece_d2(i, x);
        out[i] = -piece_d3(i, x) / (d2 * d2);
    }
}

void SeparableBarrier::conjugate_hessian_apply(const Vec& zeta, const Vec& g, Vec& out) const {
    out.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i)
        out[i] = g[i] / piece_d2(i, piece_invert(i, zeta[i]));
}

void SeparableBarrier::conjugate_hessian_inv_sqrt_apply(const Vec& zeta, const Vec& w,
                                                        Vec& out) const {
    out.resize(dimension());
    for (std::size_t i = 0; i < dimension(); ++i)
        out[i] = w[i] * std::sqrt(piece_d2(i, piece_invert(i, zeta[i])));
}

bool SeparableBarrier::contains(const Vec& x) const {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < dimension(); ++i) {
        const auto [lo, hi] = piece_domain(i);
        if (!(x[i] > lo && x[i] < hi)) return false;
    }
    return true;
}

double SeparableBarrier::piece_invert(std::size_t i, double zeta) const {
    const auto [lo, hi] = piece_domain(i);

    // Bracket the root of g'(x) = zeta; g' is strictly increasing onto R.
    auto probe_toward = [&](double from, double boundary, bool upward) {
        // Geometric approach toward a finite boundary, doubling toward an
        // infinite one.
        double x = from;
        for (int k = 0; k < 2000; ++k) {
            double next;
            if (std::isinf(boundary)) {
                next = upward ? (x >= 1.0 ? x * 2.0 : (x >= -1.0 ? x + 1.0 : x / 2.0))
                              : (x <= -1.0 ? x * 2.0 : (x <= 1.0 ? x - 1.0 : x / 2.0));
            } else {
                next = boundary + (x - boundary) * 0.5;
            }
            const double g = piece_d1(i, next);
            x = next;
            if (upward ? (g >= zeta) : (g <= zeta)) return x;
        }
        throw std::runtime_error(name() + ": failed to bracket inverse map at zeta = " +
                                 std::to_string(zeta));
    };

    double mid;
    if (std::isinf(lo) && std::isinf(hi)) mid = 0.0;
    else if (std::isinf(hi)) mid = lo + 1.0;
    else if (std::isinf(lo)) mid = hi - 1.0;
    else mid = 0.5 * (lo + hi);

    double xlo, xhi;
    if (piece_d1(i, mid) >= zeta) {
        xhi = mid;
        xlo = probe_toward(mid, lo, false);
    } else {
        xlo = mid;
        xhi = probe_toward(mid, hi, true);
    }

    // Newton from the bracket midpoint, safeguarded against leaving it.
    double x = 0.5 * (xlo + xhi);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const double r = piece_d1(i, x) - zeta;
        if (std::abs(r) <= kNewtonTol) return x;
        if (r > 0.0) xhi = x; else xlo = x;
        const double d2 = piece_d2(i, x);
        double step = r / d2;
        double xn = x - step;
        if (!(xn > xlo && xn < xhi)) xn = 0.5 * (xlo + xhi);
        if (xn == x) break;
        x = xn;
    }

    // Bisection fallback: guaranteed on the monotone map, stops at the
    // floating-point resolution of the bracket.
    for (int it = 0; it < kBisectMaxIter; ++it) {
        const double m = 0.5 * (xlo + xhi);
        if (m <= xlo || m >= xhi) return m; // bracket exhausted
        const double r = piece_d1(i, m) - zeta;
        if (std::abs(r) <= kNewtonTol) return m;
        if (r > 0.0) xhi = m; else xlo = m;
    }
    return 0.5 * (xlo + xhi);
}

// ---------------------------------------------------------------------------
// Concrete separable barriers
// ---------------------------------------------------------------------------

std::pair<double, double> IdentityBarrier::piece_domain(std::size_t) const {
    return {-kInf, kInf};
}

double HypercubeBarrier::piece_value(std::size_t, double x) const {
    return -0.5 * (std::log1p(x) + std::log1p(-x));
}
double HypercubeBarrier::piece_d1(std::size_t, double x) const {
    return x / (1.0 - x * x);
}
double HypercubeBarrier::piece_d2(std::size_t, double x) const {
    const double u = 1.0 - x * x;
    return (1.0 + x * x) / (u * u);
}
double HypercubeBarrier::piece_d3(std::size_t, double x) const {
    const double u = 1.0 - x * x;
    return 2.0 * x * (3.0 + x * x) / (u * u * u);
}
double HypercubeBarrier::piece_d4(std::size_t, double x) const {
    const double u = 1.0 - x * x;
    return 6.0 * (1.0 + x * x) / (u * u * u) + 12.0 * x * x * (3.0 + x * x) / (u * u * u * u);
}
double HypercubeBarrier::piece_invert(std::size_t, double zeta) const {
    // Root of zeta x^2 + x - zeta = 0 inside (-1, 1), in cancellation-free form.
    return 2.0 * zeta / (1.0 + std::sqrt(1.0 + 4.0 * zeta * zeta));
}

PreconditionedHypercubeBarrier::PreconditionedHypercubeBarrier(std::vector<double> weights)
    : SeparableBarrier(weights.size()), weights_(std::move(weights)) {
    for (double w : weights_)
        if (!(w >= 0.0))
            throw std::invalid_argument("preconditioned barrier: weights must be nonnegative");
}
double PreconditionedHypercubeBarrier::piece_value(std::size_t i, double x) const {
    return -0.25 * (std::log1p(x) + std::log1p(-x)) + 0.25 * weights_[i] * x * x;
}
double PreconditionedHypercubeBarrier::piece_d1(std::size_t i, double x) const {
    return 0.5 * x / (1.0 - x * x) + 0.5 * weights_[i] * x;
}
double PreconditionedHypercubeBarrier::piece_d2(std::size_t i, double x) const {
    const double u = 1.0 - x * x;
    return 0.5 * (1.0 + x * x) / (u * u) + 0.5 * weights_[i];
}
double PreconditionedHypercubeBarrier::piece_d3(std::size_t, double x) const {
    const double u = 1.0 - x * x;
    return x * (3.0 + x * x) / (u * u * u);
}
double PreconditionedHypercubeBarrier::piece_d4(std::size_t, double x) const {
    const double u = 1.0 - x * x;
    return 3.0 * (1.0 + x * x) / (u * u * u) + 6.0 * x * x * (3.0 + x * x) / (u * u * u * u);
}

BoxBarrier::BoxBarrier(std::vector<double> lower, std::vector<double> upper)
    : SeparableBarrier(lower.size()), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
        throw std::invalid_argument("box barrier: bound size mismatch");
    for (std::size_t i = 0; i < lower_.size(); ++i)
        if (!(lower_[i] < upper_[i]))
            throw std::invalid_argument("box barrier: needs a_i < b_i");
}
double BoxBarrier::piece_value(std::size_t i, double x) const {
    return -std::log(x - lower_[i]) - std::log(upper_[i] - x);
}
double BoxBarrier::piece_d1(std::size_t i, double x) const {
    return -1.0 / (x - lower_[i]) + 1.0 / (upper_[i] - x);
}
double BoxBarrier::piece_d2(std::size_t i, double x) const {
    const double p = x - lower_[i], q = upper_[i] - x;
    return 1.0 / (p * p) + 1.0 / (q * q);
}
double BoxBarrier::piece_d3(std::size_t i, double x) const {
    const double p = x - lower_[i], q = upper_[i] - x;
    return -2.0 / (p * p * p) + 2.0 / (q * q * q);
}
double BoxBarrier::piece_d4(std::size_t i, double x) const {
    const double p = x - lower_[i], q = upper_[i] - x;
    return 6.0 / (p * p * p * p) + 6.0 / (q * q * q * q);
}

double EntropicQuadraticBarrier::piece_value(std::size_t, double x) const {
    return 0.5 * x * x - std::log(x);
}
std::pair<double, double> EntropicQuadraticBarrier::piece_domain(std::size_t) const {
    return {0.0, kInf};
}
double EntropicQuadraticBarrier::piece_invert(std::size_t, double zeta) const {
    // x - 1/x = zeta; the positive root, cancellation-free on both tails.
    const double r = std::sqrt(zeta * zeta + 4.0);
    return zeta >= 0.0 ? 0.5 * (zeta + r) : 2.0 / (r - zeta);
}

// ---------------------------------------------------------------------------
// SimplexEntropyBarrier
// ---------------------------------------------------------------------------

SimplexEntropyBarrier::SimplexEntropyBarrier(std::size_t categories) : dim_(categories - 1) {
    if (categories < 2)
        throw std::invalid_argument("simplex barrier: need at least two categories");
}

double SimplexEntropyBarrier::log_sum(const Vec& zeta) {
    double m = 0.0;
    for (double z : zeta) m = std::max(m, z);
    double s = std::exp(-m);
    for (double z : zeta) s += std::exp(z - m);
    return m + std::log(s);
}

double SimplexEntropyBarrier::value(const Vec& x) const {
    double s = 0.0, rest = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        s += x[i] * std::log(x[i]);
        rest -= x[i];
    }
    return s + rest * std::log(rest);
}

void SimplexEntropyBarrier::forward_into(const Vec& x, Vec& zeta) const {
    zeta.resize(dim_);
    double rest = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) rest -= x[i];
    const double log_rest = std::log(rest);
    for (std::size_t i = 0; i < dim_; ++i) zeta[i] = std::log(x[i]) - log_rest;
}

void SimplexEntropyBarrier::inverse_into(const Vec& zeta, Vec& x) const {
    x.resize(dim_);
    const double ls = log_sum(zeta);
    for (std::size_t i = 0; i < dim_; ++i) x[i] = std::exp(zeta[i] - ls);
}

linalg::Matrix SimplexEntropyBarrier::hessian(const Vec& x) const {
    double rest = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) rest -= x[i];
    const double c = 1.0 / rest;
    linalg::Matrix h(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) h(i, j) = c;
        h(i, i) += 1.0 / x[i];
    }
    return h;
}

linalg::Matrix SimplexEntropyBarrier::conjugate_hessian(const Vec& zeta) const {
    Vec x;
    inverse_into(zeta, x);
    linalg::Matrix h(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) h(i, j) = -x[i] * x[j];
        h(i, i) += x[i];
    }
    return h;
}

double SimplexEntropyBarrier::log_det_conjugate_hessian(const Vec& zeta) const {
    // det(diag(x) - x x^T) over the first d-1 coordinates equals the product
    // of all category probabilities, including the reconstructed last one.
    const double ls = log_sum(zeta);
    double s = 0.0;
    for (double z : zeta) s += z;
    return s - static_cast<double>(categories()) * ls;
}

void SimplexEntropyBarrier::grad_log_det_conjugate_hessian_into(const Vec& zeta, Vec& out) const {
    Vec x;
    inverse_into(zeta, x);
    out.resize(dim_);
    const double cats = static_cast<double>(categories());
    for (std::size_t i = 0; i < dim_; ++i) out[i] = 1.0 - cats * x[i];
}

void SimplexEntropyBarrier::conjugate_hessian_apply(const Vec& zeta, const Vec& g,
                                                    Vec& out) const {
    Vec x;
    inverse_into(zeta, x);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dot += x[i] * g[i];
    out.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = x[i] * (g[i] - dot);
}

void SimplexEntropyBarrier::conjugate_hessian_inv_sqrt_apply(const Vec& zeta, const Vec& w,
                                                             Vec& out) const {
    const auto m = conjugate_hessian(zeta);
    const auto inv_sqrt = linalg::symmetric_power(m, -0.5);
    out = linalg::matvec(inv_sqrt, w);
}

bool SimplexEntropyBarrier::contains(const Vec& x) const {
    if (x.size() != dim_) return false;
    double s = 0.0;
    for (double xi : x) {
        if (!(xi > 0.0)) return false;
        s += xi;
    }
    return s < 1.0;
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

std::unique_ptr<BarrierMap> make_identity_barrier(std::size_t d) {
    return std::make_unique<IdentityBarrier>(d);
}
std::unique_ptr<BarrierMap> make_hypercube_barrier(std::size_t d) {
    return std::make_unique<HypercubeBarrier>(d);
}
std::unique_ptr<BarrierMap> make_preconditioned_hypercube_barrier(std::vector<double> weights) {
    return std::make_unique<PreconditionedHypercubeBarrier>(std::move(weights));
}
std::unique_ptr<BarrierMap> make_box_barrier(std::vector<double> lower,
                                             std::vector<double> upper) {
    return std::make_unique<BoxBarrier>(std::move(lower), std::move(upper));
}
std::unique_ptr<BarrierMap> make_entropic_quadratic_barrier(std::size_t d) {
    return std::make_unique<EntropicQuadraticBarrier>(d);
}
std::unique_ptr<BarrierMap> make_simplex_entropy_barrier(std::size_t categories) {
    return std::make_unique<SimplexEntropyBarrier>(categories);
}

} // namespace pdmp
