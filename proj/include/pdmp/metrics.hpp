// Evaluation pipeline: Wasserstein-1 distances from sorted samples, Monte
// Carlo noise floors from exact-vs-exact replicates, running moment errors
// on epoch grids, and batch-means standard errors.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace pdmp::metrics {

// W1 between equal-size empirical measures: mean absolute difference of
// sorted samples. Throws on unequal lengths.
double w1_sorted(std::vector<double> a, std::vector<double> b);

// W1 for possibly unequal sizes by alignment at n = min(|a|, |b|) common
// quantiles with the midpoint convention (i - 1/2)/n; reduces exactly to
// w1_sorted for equal sizes.
double w1_quantile_aligned(std::vector<double> a, std::vector<double> b);

struct W1Report {
    std::vector<double> per_marginal_errors;
    double total_error = 0.0;
    double noise_floor_mean = 0.0;
    double noise_floor_std = 0.0;
};

// Marginal-wise W1 plus the marginal sum (the total is a true W1 only under
// independent marginals).
W1Report w1_multivariate_by_marginals(const std::vector<std::vector<double>>& a,
                                      const std::vector<std::vector<double>>& b);

// Mean and standard deviation of the pairwise W1 errors between `copies`
// independent exact sample sets of size n: the attainable-accuracy baseline.
// The sampler is called as sampler(copy_index) and must return n draws.
std::pair<double, double> noise_floor(
    const std::function<std::vector<double>(int copy)>& sampler, int copies);

// Marginal-wise noise floor over vector-valued exact draws, summed across
// marginals to match the total error of w1_multivariate_by_marginals.
std::pair<double, double> noise_floor_multivariate(
    const std::function<std::vector<std::vector<double>>(int copy)>& sampler, int copies);

// |sigma_hat(t) - true_std| / true_std at each checkpoint, where
// sigma_hat(t) is the running standard deviation of the stream values whose
// epoch tag does not exceed the checkpoint. Entries must be sorted by
// epoch. A degenerate running sample (fewer than two points or zero
// variance) reports relative error 1.
std::vector<double> running_relative_std_error(
    const std::vector<std::pair<double, double>>& epoch_tagged_values, double true_std,
    const std::vector<double>& checkpoints);

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs); // unbiased
double median(std::vector<double> xs);

// Standard error of the mean estimated by non-overlapping batch means.
double batch_means_standard_error(const std::vector<double>& xs, int batches = 32);

// One-sided empirical-vs-analytic Kolmogorov-Smirnov distance
// sup_x |F_n(x) - F(x)| for a continuous CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov critical value: reject at level alpha iff
// sqrt(n) * D_n exceeds this. Supports the levels used here.
double ks_critical_value(double alpha);

} // namespace pdmp::metrics
