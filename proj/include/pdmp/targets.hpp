// Benchmark targets: potentials with analytic gradients, constraint
// domains, exact reference samplers, and the dominating constants used for
// step sizes and thinning bounds.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pdmp/barrier.hpp"
#include "pdmp/linalg.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

class Target {
public:
    using Vec = std::vector<double>;

    virtual ~Target() = default;
    virtual std::size_t dimension() const = 0; // simulated dimension
    virtual std::string name() const = 0;
    virtual double potential(const Vec& x) const = 0;
    virtual void gradient_into(const Vec& x, Vec& g) const = 0;
    virtual bool in_domain(const Vec& x) const = 0;

    Vec gradient(const Vec& x) const {
        Vec g(dimension());
        gradient_into(x, g);
        return g;
    }
};

// Gaussian with covariance Sigma truncated to an open box; infinite box
// bounds give the unconstrained Gaussian. U(x) = x^T Sigma^{-1} x / 2.
class TruncatedGaussian final : public Target {
public:
    TruncatedGaussian(linalg::Matrix sigma, std::vector<double> lower, std::vector<double> upper);

    // Unconstrained Gaussian.
    explicit TruncatedGaussian(linalg::Matrix sigma);

    std::size_t dimension() const override { return sigma_.n; }
    std::string name() const override { return "truncated-gaussian"; }
    double potential(const Vec& x) const override;
    void gradient_into(const Vec& x, Vec& g) const override;
    bool in_domain(const Vec& x) const override;

    const linalg::Matrix& sigma() const { return sigma_; }
    const linalg::Matrix& precision() const { return precision_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    bool is_box_bounded() const;

    // Exact draws by rejection from the unconstrained Gaussian: propose
    // through the Cholesky factor, accept iff inside the box. Coordinates
    // are generated in factor order and rejected as early as possible.
    // Aborts when the empirical acceptance rate indicates a
    // domain/covariance mismatch. Deterministic for a fixed (seed, threads).
    std::vector<Vec> exact_samples(std::int64_t n, std::uint64_t seed, int threads = 1) const;

private:
    void prepare_rejection_order();

    linalg::Matrix sigma_, precision_, chol_;
    std::vector<double> lower_, upper_;
    // Rejection-order machinery: coordinates permuted by ascending marginal
    // box probability so proposals fail as early as possible.
    std::vector<std::size_t> order_;
    linalg::Matrix chol_ordered_;
    std::vector<double> lower_ordered_, upper_ordered_;
};

// Product of Gamma(alpha_i, beta_i) distributions (shape/rate) on the
// positive orthant: U(x) = sum_i beta_i x_i - (alpha_i - 1) log x_i.
class GammaProduct final : public Target {
public:
    GammaProduct(std::vector<double> shape, std::vector<double> rate);

    std::size_t dimension() const override { return shape_.size(); }
    std::string name() const override { return "gamma-product"; }
    double potential(const Vec& x) const override;
    void gradient_into(const Vec& x, Vec& g) const override;
    bool in_domain(const Vec& x) const override;

    const std::vector<double>& shape() const { return shape_; }
    const std::vector<double>& rate() const { return rate_; }

    std::vector<Vec> exact_samples(std::int64_t n, std::uint64_t seed) const;

private:
    std::vector<double> shape_, rate_;
};

// Dirichlet posterior from multinomial counts under a Dirichlet prior,
// expressed in the first d-1 simplex coordinates (the last is 1 - sum).
// Batches hold the per-batch category counts for subsampled samplers.
class DirichletPosterior final : public Target {
public:
    DirichletPosterior(std::vector<double> counts, std::vector<double> prior,
                       std::vector<std::vector<double>> batches);

    std::size_t dimension() const override { return counts_.size() - 1; }
    std::string name() const override { return "dirichlet-posterior"; }
    double potential(const Vec& x) const override;
    void gradient_into(const Vec& x, Vec& g) const override;
    bool in_domain(const Vec& x) const override;

    std::size_t categories() const { return counts_.size(); }
    int batch_count() const { return static_cast<int>(batches_.size()); }
    const std::vector<double>& counts() const { return counts_; }
    const std::vector<double>& prior() const { return prior_; }
    const std::vector<std::vector<double>>& batches() const { return batches_; }

    // sum_i n_i and sum_i alpha_i.
    double total_counts() const;
    double total_prior() const;

    // Posterior concentration n_i + alpha_i.
    std::vector<double> concentration() const;

    // Closed-form posterior moments of category i.
    double marginal_mean(std::size_t i) const;
    double marginal_std(std::size_t i) const;

    // Exact Dirichlet draws (all categories, rows sum to one).
    std::vector<Vec> exact_samples(std::int64_t n, std::uint64_t seed) const;

    // Per-batch primal gradient in the reduced coordinates: batch j
    // contributes the potential -sum_i (K m^j_i + alpha_i - 1) log x_i, and
    // these average to the full gradient over the K batches.
    void batch_gradient_into(int j, const Vec& x, Vec& g) const;

private:
    std::vector<double> counts_, prior_;
    std::vector<std::vector<double>> batches_;
};

// Synthetic multinomial dataset: n_draws categorical draws from p, counted
// and split into n_batches consecutive equal-size batches. The batch counts
// always sum to the total counts.
DirichletPosterior sample_multinomial_dataset(const std::vector<double>& p, std::int64_t n_draws,
                                              int n_batches, const std::vector<double>& prior,
                                              std::uint64_t seed);

// Dual-space decomposition of the Dirichlet posterior under the simplex
// entropy barrier. The dual potential splits over batches as
//   V^j(zeta) = -(K m^j + alpha)^T zeta + (N + Gamma) log(1 + sum e^zeta),
// all in the first d-1 coordinates; the average over j recovers V exactly,
// and its mode has the closed form zeta_bar = forward((n + alpha)/(N + Gamma)).
struct DirichletDualPieces {
    std::size_t dimension = 0;
    int num_terms = 0;
    double scale = 0.0;                             // N + Gamma
    std::vector<std::vector<double>> coefficients;  // (K m^j + alpha), first d-1 coords
    std::vector<double> full_coefficient;           // (n + alpha), first d-1 coords
    std::vector<double> dual_mode;                  // zeta_bar
    double sup_norm_lipschitz = 0.0;                // Lipschitz bound of every grad V^j in sup norm

    double term_value(int j, const std::vector<double>& zeta) const;
    void term_gradient_into(int j, const std::vector<double>& zeta, std::vector<double>& g) const;
    double value(const std::vector<double>& zeta) const;
    void gradient_into(const std::vector<double>& zeta, std::vector<double>& g) const;
};

DirichletDualPieces dirichlet_dual_pieces(const DirichletPosterior& posterior,
                                          const SimplexEntropyBarrier& barrier);

// Dominating constants for a (target, barrier) pair: the dual
// gradient-Lipschitz constant backing thinning bounds and the step-size
// constants of the mirror Langevin discretizations. NaN marks constants
// that do not exist for the pair.
struct DerivedConstants {
    double primal_lipschitz = std::numeric_limits<double>::quiet_NaN();  // L
    double dual_lipschitz = std::numeric_limits<double>::quiet_NaN();    // L_V
    double relative_smoothness = std::numeric_limits<double>::quiet_NaN();        // L_V^S
    double relative_gradient_bound = std::numeric_limits<double>::quiet_NaN();    // L_V^L
    double self_concordance = std::numeric_limits<double>::quiet_NaN();  // M_psi
    double mlaa_step = std::numeric_limits<double>::quiet_NaN();         // 1 / L_V
    double mlam_step = std::numeric_limits<double>::quiet_NaN();         // 1 / (L_V^S + 2 M L_V^L)
};

DerivedConstants derived_constants(const GammaProduct& target,
                                   const EntropicQuadraticBarrier& barrier);
DerivedConstants derived_constants(const TruncatedGaussian& target, const BoxBarrier& barrier);
DerivedConstants derived_constants(const TruncatedGaussian& target,
                                   const PreconditionedHypercubeBarrier& barrier);
DerivedConstants derived_constants(const DirichletPosterior& target,
                                   const SimplexEntropyBarrier& barrier);

// Dispatch by dynamic type; throws on an unsupported pair.
DerivedConstants derived_constants(const Target& target, const BarrierMap& barrier);

// Gamma(shape, rate) variate, valid for any shape > 0.
double gamma_variate(RngStream& rng, double shape, double rate);

} // namespace pdmp
