#include "pdmp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdmp::metrics {

double w1_sorted(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("w1_sorted: unequal sample counts");
    if (a.empty()) throw std::invalid_argument("w1_sorted: empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

double w1_quantile_aligned(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("w1_quantile_aligned: empty samples");
    if (a.size() == b.size()) return w1_sorted(std::move(a), std::move(b));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = std::min(a.size(), b.size());
    auto order_stat = [](const std::vector<double>& xs, double q) {
        // Inverse-CDF convention: the ceil(q * N)-th order statistic.
        const auto idx = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(xs.size())) - 1.0);
        return xs[std::min(idx, xs.size() - 1)];
    };
    double s = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double q = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
        s += std::abs(order_stat(a, q) - order_stat(b, q));
    }
    return s / static_cast<double>(n);
}

W1Report w1_multivariate_by_marginals(const std::vector<std::vector<double>>& a,
                                      const std::vector<std::vector<double>>& b) {
    if (a.empty() || b.empty() || a.size() != b.size() || a.front().size() != b.front().size())
        throw std::invalid_argument("w1_multivariate_by_marginals: shape mismatch");
    const std::size_t d = a.front().size();
    W1Report report;
    report.per_marginal_errors.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> ak(a.size()), bk(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ak[i] = a[i][k];
            bk[i] = b[i][k];
        }
        report.per_marginal_errors[k] = w1_sorted(std::move(ak), std::move(bk));
        report.total_error += report.per_marginal_errors[k];
    }
    return report;
}

namespace {

std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
    const double m = mean(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
    return {m, std::sqrt(v)};
}

} // namespace

std::pair<double, double> noise_floor(
    const std::function<std::vector<double>(int copy)>& sampler, int copies) {
    if (copies < 2) throw std::invalid_argument("noise_floor: need at least two copies");
    std::vector<std::vector<double>> sets;
    sets.reserve(static_cast<std::size_t>(copies));
    for (int c = 0; c < copies; ++c) sets.push_back(sampler(c));
    std::vector<double> errors;
    for (int i = 0; i < copies; ++i)
        for (int j = i + 1; j < copies; ++j)
            errors.push_back(w1_sorted(sets[static_cast<std::size_t>(i)],
                                       sets[static_cast<std::size_t>(j)]));
    return mean_and_std(errors);
}

std::pair<double, double> noise_floor_multivariate(
    const std::function<std::vector<std::vector<double>>(int copy)>& sampler, int copies) {
    if (copies < 2) throw std::invalid_argument("noise_floor: need at least two copies");
    std::vector<std::vector<std::vector<double>>> sets;
    sets.reserve(static_cast<std::size_t>(copies));
    for (int c = 0; c < copies; ++c) sets.push_back(sampler(c));
    std::vector<double> errors;
    for (int i = 0; i < copies; ++i)
        for (int j = i + 1; j < copies; ++j)
            errors.push_back(w1_multivariate_by_marginals(sets[static_cast<std::size_t>(i)],
                                                          sets[static_cast<std::size_t>(j)])
                                 .total_error);
    return mean_and_std(errors);
}

std::vector<double> running_relative_std_error(
    const std::vector<std::pair<double, double>>& epoch_tagged_values, double true_std,
    const std::vector<double>& checkpoints) {
    if (!(true_std > 0.0))
        throw std::invalid_argument("running_relative_std_error: true_std must be positive");
    if (epoch_tagged_values.empty())
        throw std::invalid_argument("running_relative_std_error: empty stream");

    std::vector<double> out;
    out.reserve(checkpoints.size());
    // One-pass running mean/M2 over the stream, pausing at each checkpoint.
    std::size_t idx = 0;
    double count = 0.0, m = 0.0, m2 = 0.0;
    for (double cp : checkpoints) {
        while (idx < epoch_tagged_values.size() && epoch_tagged_values[idx].first <= cp) {
            const double x = epoch_tagged_values[idx].second;
            count += 1.0;
            const double delta = x - m;
            m += delta / count;
            m2 += delta * (x - m);
            ++idx;
        }
        if (count < 2.0) {
            out.push_back(1.0);
            continue;
        }
        const double sd = std::sqrt(m2 / (count - 1.0));
        out.push_back(std::abs(sd - true_std) / true_std);
    }
    return out;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance: need at least two values");
    const double m = mean(xs);
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return v / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median: empty input");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double batch_means_standard_error(const std::vector<double>& xs, int batches) {
    if (batches < 2) throw std::invalid_argument("batch_means_standard_error: need >= 2 batches");
    if (xs.size() < static_cast<std::size_t>(2 * batches))
        batches = std::max(2, static_cast<int>(xs.size() / 2));
    const std::size_t per = xs.size() / static_cast<std::size_t>(batches);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < per; ++k)
            s += xs[static_cast<std::size_t>(b) * per + k];
        means.push_back(s / static_cast<double>(per));
    }
    return std::sqrt(variance(means) / static_cast<double>(batches));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_critical_value(double alpha) {
    // Asymptotic quantiles of the Kolmogorov distribution.
    if (alpha == 0.01) return 1.62762;
    if (alpha == 0.05) return 1.35810;
    if (alpha == 0.10) return 1.22385;
    throw std::invalid_argument("ks_critical_value: unsupported level");
}

} // namespace pdmp::metrics
