// Convex barrier functions (mirror maps) over constrained domains.
//
// A barrier psi is strictly convex on its domain M with a gradient that
// blows up at the boundary, so grad psi maps M bijectively onto R^d (the
// dual space) and its Legendre conjugate gradient is the inverse map. Every
// barrier here exposes:
//
//   value(x)                          psi(x)
//   forward(x)                        grad psi(x), M -> R^d
//   inverse(zeta)                     grad psi*(zeta), R^d -> M
//   hessian(x)                        Hess psi(x), SPD
//   conjugate_hessian(zeta)           Hess psi*(zeta) = [Hess psi(x)]^-1
//   log_det_conjugate_hessian(zeta)   log det Hess psi*(zeta)
//   grad_log_det_conjugate_hessian    its gradient, always analytic
//
// The analytic log-det gradient matters: it enters jump rates where
// numerical differentiation noise would corrupt thinning.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pdmp/linalg.hpp"

namespace pdmp {

class BarrierMap {
public:
    using Vec = std::vector<double>;

    virtual ~BarrierMap() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;

    virtual double value(const Vec& x) const = 0;
    virtual void forward_into(const Vec& x, Vec& zeta) const = 0;
    virtual void inverse_into(const Vec& zeta, Vec& x) const = 0;

    virtual linalg::Matrix hessian(const Vec& x) const = 0;
    virtual linalg::Matrix conjugate_hessian(const Vec& zeta) const = 0;
    virtual double log_det_conjugate_hessian(const Vec& zeta) const = 0;
    virtual void grad_log_det_conjugate_hessian_into(const Vec& zeta, Vec& out) const = 0;

    // out = Hess psi*(zeta) * g, the chain-rule factor of dual gradients.
    virtual void conjugate_hessian_apply(const Vec& zeta, const Vec& g, Vec& out) const = 0;

    // out = [Hess psi*(zeta)]^(-1/2) * w, the noise shaping of
    // multiplicative-noise mirror Langevin steps.
    virtual void conjugate_hessian_inv_sqrt_apply(const Vec& zeta, const Vec& w,
                                                  Vec& out) const = 0;

    // Strict interior membership in the primal domain.
    virtual bool contains(const Vec& x) const = 0;

    Vec forward(const Vec& x) const {
        Vec z(dimension());
        forward_into(x, z);
        return z;
    }
    Vec inverse(const Vec& zeta) const {
        Vec x(dimension());
        inverse_into(zeta, x);
        return x;
    }
};

// Separable barrier psi(x) = sum_i g_i(x_i); all maps are coordinatewise.
// Derived classes supply the scalar pieces (value and first four
// derivatives) plus the open domain interval per coordinate; inversion
// defaults to safeguarded Newton with a bisection fallback on the strictly
// increasing derivative, overridable with closed forms.
class SeparableBarrier : public BarrierMap {
public:
    explicit SeparableBarrier(std::size_t d) : d_(d) {}

    std::size_t dimension() const override { return d_; }

    double value(const Vec& x) const override;
    void forward_into(const Vec& x, Vec& zeta) const override;
    void inverse_into(const Vec& zeta, Vec& x) const override;
    linalg::Matrix hessian(const Vec& x) const override;
    linalg::Matrix conjugate_hessian(const Vec& zeta) const override;
    double log_det_conjugate_hessian(const Vec& zeta) const override;
    void grad_log_det_conjugate_hessian_into(const Vec& zeta, Vec& out) const override;
    void conjugate_hessian_apply(const Vec& zeta, const Vec& g, Vec& out) const override;
    void conjugate_hessian_inv_sqrt_apply(const Vec& zeta, const Vec& w, Vec& out) const override;
    bool contains(const Vec& x) const override;

    virtual double piece_value(std::size_t i, double x) const = 0;
    virtual double piece_d1(std::size_t i, double x) const = 0;
    virtual double piece_d2(std::size_t i, double x) const = 0;
    virtual double piece_d3(std::size_t i, double x) const = 0;
    virtual double piece_d4(std::size_t i, double x) const = 0;
    // Open interval (lo, hi); +-infinity for unbounded sides.
    virtual std::pair<double, double> piece_domain(std::size_t i) const = 0;

    // Solves piece_d1(i, x) = zeta. Default: Newton, then bisection.
    virtual double piece_invert(std::size_t i, double zeta) const;

private:
    std::size_t d_;
};

// psi(x) = ||x||^2 / 2 on R^d; the mirror maps are the identity and the
// push-forward potential equals the target potential. Used for reduction
// tests of the mirror samplers against their unconstrained counterparts.
class IdentityBarrier final : public SeparableBarrier {
public:
    explicit IdentityBarrier(std::size_t d) : SeparableBarrier(d) {}
    std::string name() const override { return "identity"; }
    double piece_value(std::size_t, double x) const override { return 0.5 * x * x; }
    double piece_d1(std::size_t, double x) const override { return x; }
    double piece_d2(std::size_t, double) const override { return 1.0; }
    double piece_d3(std::size_t, double) const override { return 0.0; }
    double piece_d4(std::size_t, double) const override { return 0.0; }
    std::pair<double, double> piece_domain(std::size_t) const override;
    double piece_invert(std::size_t, double zeta) const override { return zeta; }
};

// Log barrier on the hypercube (-1,1)^d:
//   psi(x) = -1/2 sum_i [log(1 + x_i) + log(1 - x_i)],  grad_i = x_i/(1-x_i^2).
class HypercubeBarrier final : public SeparableBarrier {
public:
    explicit HypercubeBarrier(std::size_t d) : SeparableBarrier(d) {}
    std::string name() const override { return "hypercube"; }
    double piece_value(std::size_t, double x) const override;
    double piece_d1(std::size_t, double x) const override;
    double piece_d2(std::size_t, double x) const override;
    double piece_d3(std::size_t, double x) const override;
    double piece_d4(std::size_t, double x) const override;
    std::pair<double, double> piece_domain(std::size_t) const override { return {-1.0, 1.0}; }
    double piece_invert(std::size_t, double zeta) const override;
};

// Half the hypercube barrier plus a diagonal quadratic that preconditions
// the dual dynamics:
//   psi(x) = 1/2 psi_hypercube(x) + 1/4 x^T diag(w) x,  w_i >= 0.
// Only diagonal preconditioning is supported; coordinatewise inversion
// requires separability.
class PreconditionedHypercubeBarrier final : public SeparableBarrier {
public:
    explicit PreconditionedHypercubeBarrier(std::vector<double> weights);
    std::string name() const override { return "preconditioned-hypercube"; }
    double piece_value(std::size_t i, double x) const override;
    double piece_d1(std::size_t i, double x) const override;
    double piece_d2(std::size_t i, double x) const override;
    double piece_d3(std::size_t, double x) const override;
    double piece_d4(std::size_t, double x) const override;
    std::pair<double, double> piece_domain(std::size_t) const override { return {-1.0, 1.0}; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> weights_;
};

// Log barrier on a general box prod_i (a_i, b_i):
//   psi(x) = -sum_i [log(x_i - a_i) + log(b_i - x_i)].
class BoxBarrier final : public SeparableBarrier {
public:
    BoxBarrier(std::vector<double> lower, std::vector<double> upper);
    std::string name() const override { return "box"; }
    double piece_value(std::size_t i, double x) const override;
    double piece_d1(std::size_t i, double x) const override;
    double piece_d2(std::size_t i, double x) const override;
    double piece_d3(std::size_t i, double x) const override;
    double piece_d4(std::size_t i, double x) const override;
    std::pair<double, double> piece_domain(std::size_t i) const override {
        return {lower_[i], upper_[i]};
    }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }

private:
    std::vector<double> lower_, upper_;
};

// psi(x) = ||x||^2/2 - sum_i log x_i on the positive orthant; the inverse
// map has the closed form x_i = (zeta_i + sqrt(zeta_i^2 + 4)) / 2.
class EntropicQuadraticBarrier final : public SeparableBarrier {
public:
    explicit EntropicQuadraticBarrier(std::size_t d) : SeparableBarrier(d) {}
    std::string name() const override { return "entropic-quadratic"; }
    double piece_value(std::size_t, double x) const override;
    double piece_d1(std::size_t, double x) const override { return x - 1.0 / x; }
    double piece_d2(std::size_t, double x) const override { return 1.0 + 1.0 / (x * x); }
    double piece_d3(std::size_t, double x) const override { return -2.0 / (x * x * x); }
    double piece_d4(std::size_t, double x) const override { return 6.0 / (x * x * x * x); }
    std::pair<double, double> piece_domain(std::size_t) const override;
    double piece_invert(std::size_t, double zeta) const override;
};

// Negative entropy on the open probability simplex over `categories`
// outcomes, expressed in the first categories-1 coordinates with the last
// reconstructed as 1 - sum:
//   psi(x) = sum_{i<d} x_i log x_i + x_d log x_d,  x_d = 1 - sum_{i<d} x_i.
// forward is the log-odds map zeta_i = log(x_i / x_d); inverse is softmax.
// The conjugate Hessian is diag(x) - x x^T (Sherman-Morrison), whose
// log-determinant is sum_i log x_i over all categories.
class SimplexEntropyBarrier final : public BarrierMap {
public:
    explicit SimplexEntropyBarrier(std::size_t categories);

    std::size_t dimension() const override { return dim_; }
    std::string name() const override { return "simplex-entropy"; }
    std::size_t categories() const { return dim_ + 1; }

    double value(const Vec& x) const override;
    void forward_into(const Vec& x, Vec& zeta) const override;
    void inverse_into(const Vec& zeta, Vec& x) const override;
    linalg::Matrix hessian(const Vec& x) const override;
    linalg::Matrix conjugate_hessian(const Vec& zeta) const override;
    double log_det_conjugate_hessian(const Vec& zeta) const override;
    void grad_log_det_conjugate_hessian_into(const Vec& zeta, Vec& out) const override;
    void conjugate_hessian_apply(const Vec& zeta, const Vec& g, Vec& out) const override;
    void conjugate_hessian_inv_sqrt_apply(const Vec& zeta, const Vec& w, Vec& out) const override;
    bool contains(const Vec& x) const override;

    // log(1 + sum_i e^{zeta_i}), the conjugate psi*(zeta), evaluated stably.
    static double log_sum(const Vec& zeta);

private:
    std::size_t dim_; // simulated dimension = categories - 1
};

std::unique_ptr<BarrierMap> make_identity_barrier(std::size_t d);
std::unique_ptr<BarrierMap> make_hypercube_barrier(std::size_t d);
std::unique_ptr<BarrierMap> make_preconditioned_hypercube_barrier(std::vector<double> weights);
std::unique_ptr<BarrierMap> make_box_barrier(std::vector<double> lower, std::vector<double> upper);
std::unique_ptr<BarrierMap> make_entropic_quadratic_barrier(std::size_t d);
std::unique_ptr<BarrierMap> make_simplex_entropy_barrier(std::size_t categories);

} // namespace pdmp
