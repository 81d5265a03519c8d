// Benchmark harness for the constrained samplers: runs replicated
// experiments from a JSON config, computes Wasserstein/moment metrics
// against exact reference draws, and emits plot-ready CSV/JSON.
//
// Subcommands:
//   sample      one experiment config -> per-replicate samples + metrics
//   compare     several configs over one target -> comparison table
//   wasserstein two sample CSVs -> W1 report
//   noise-floor exact-vs-exact W1 baseline for a target
//
// Exit codes: 0 success, 2 config error, 3 sampler abort.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdmp/metrics.hpp"
#include "pdmp/mirror.hpp"
#include "pdmp/sde.hpp"
#include "pdmp/skeleton_io.hpp"

using nlohmann::json;
using namespace pdmp;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Target construction
// ---------------------------------------------------------------------------

// Synthetic Gaussian location model for subsampled runs on unconstrained
// targets: U^j(x) = ||x - y_j||^2 / 2 with the posterior N(mean(y), I).
class GaussianLocation final : public Target {
public:
    GaussianLocation(std::size_t d, int terms, double data_std, std::uint64_t seed)
        : data_(static_cast<std::size_t>(terms), Vec(d, 0.0)), mean_(d, 0.0) {
        RngStream rng(seed, 0x500000000ull);
        for (auto& y : data_)
            for (std::size_t i = 0; i < d; ++i) {
                y[i] = data_std * rng.normal();
                mean_[i] += y[i] / static_cast<double>(terms);
            }
    }

    std::size_t dimension() const override { return mean_.size(); }
    std::string name() const override { return "gaussian-location"; }
    double potential(const Vec& x) const override {
        double s = 0.0;
        for (const auto& y : data_)
            for (std::size_t i = 0; i < x.size(); ++i)
                s += 0.5 * (x[i] - y[i]) * (x[i] - y[i]) / static_cast<double>(data_.size());
        return s;
    }
    void gradient_into(const Vec& x, Vec& g) const override {
        g.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - mean_[i];
    }
    bool in_domain(const Vec&) const override { return true; }

    int terms() const { return static_cast<int>(data_.size()); }
    const Vec& mean() const { return mean_; }
    void term_gradient_into(int j, const Vec& x, Vec& g) const {
        const auto& y = data_[static_cast<std::size_t>(j)];
        g.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - y[i];
    }
    std::vector<Vec> exact_samples(std::int64_t n, std::uint64_t seed) const {
        RngStream rng(seed, 0x200000000ull);
        std::vector<Vec> out(static_cast<std::size_t>(n), Vec(dimension()));
        for (auto& row : out)
            for (std::size_t i = 0; i < dimension(); ++i) row[i] = mean_[i] + rng.normal();
        return out;
    }

private:
    std::vector<Vec> data_;
    Vec mean_;
};

struct TargetBundle {
    std::unique_ptr<Target> target;
    std::function<std::vector<Vec>(std::int64_t n, std::uint64_t seed)> exact;
    Vec default_initial; // simulated coordinates, strictly interior
    std::size_t sample_dim = 0;
};

linalg::Matrix parse_sigma(const json& j, std::size_t d) {
    linalg::Matrix sigma(d);
    if (j.contains("sigma_diag")) {
        const auto diag = j.at("sigma_diag").get<std::vector<double>>();
        if (diag.size() != d) throw ConfigError("sigma_diag size mismatch");
        for (std::size_t i = 0; i < d; ++i) sigma(i, i) = diag[i];
    } else if (j.contains("sigma_inverse_distance") && j.at("sigma_inverse_distance").get<bool>()) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k)
                sigma(i, k) = 1.0 / (1.0 + std::abs(double(i) - double(k)));
    } else if (j.contains("sigma")) {
        const auto rows = j.at("sigma").get<std::vector<std::vector<double>>>();
        if (rows.size() != d) throw ConfigError("sigma size mismatch");
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) sigma(i, k) = rows[i][k];
    } else {
        sigma = linalg::Matrix::identity(d);
    }
    return sigma;
}

TargetBundle build_target(const json& cfg, std::uint64_t master_seed, int threads) {
    const auto& j = cfg.at("target");
    const auto id = j.at("id").get<std::string>();
    TargetBundle out;

    if (id == "gamma") {
        auto shape = j.at("shape").get<std::vector<double>>();
        auto rate = j.at("rate").get<std::vector<double>>();
        auto t = std::make_unique<GammaProduct>(shape, rate);
        out.default_initial.resize(shape.size());
        for (std::size_t i = 0; i < shape.size(); ++i)
            out.default_initial[i] = shape[i] / rate[i];
        out.sample_dim = shape.size();
        auto* raw = t.get();
        out.exact = [raw](std::int64_t n, std::uint64_t s) { return raw->exact_samples(n, s); };
        out.target = std::move(t);
    } else if (id == "truncated-gaussian" || id == "gaussian") {
        const auto d = j.at("dimension").get<std::size_t>();
        auto sigma = parse_sigma(j, d);
        std::unique_ptr<TruncatedGaussian> t;
        if (j.contains("lower")) {
            auto lower = j.at("lower").get<std::vector<double>>();
            auto upper = j.at("upper").get<std::vector<double>>();
            t = std::make_unique<TruncatedGaussian>(sigma, lower, upper);
            out.default_initial.resize(d);
            for (std::size_t i = 0; i < d; ++i)
                out.default_initial[i] = 0.5 * (lower[i] + upper[i]);
        } else {
            t = std::make_unique<TruncatedGaussian>(sigma);
            out.default_initial.assign(d, 0.0);
        }
        out.sample_dim = d;
        auto* raw = t.get();
        out.exact = [raw, threads](std::int64_t n, std::uint64_t s) {
            return raw->exact_samples(n, s, threads);
        };
        out.target = std::move(t);
    } else if (id == "dirichlet") {
        const auto p = j.at("p").get<std::vector<double>>();
        const auto n_draws = j.at("n_draws").get<std::int64_t>();
        const auto batches = j.value("batches", 1);
        const auto alpha = j.value("prior_alpha", 0.1);
        auto t = std::make_unique<DirichletPosterior>(sample_multinomial_dataset(
            p, n_draws, batches, Vec(p.size(), alpha), master_seed ^ 0x9E37u));
        out.default_initial.assign(p.size() - 1, 1.0 / static_cast<double>(p.size()));
        out.sample_dim = p.size();
        auto* raw = t.get();
        out.exact = [raw](std::int64_t n, std::uint64_t s) { return raw->exact_samples(n, s); };
        out.target = std::move(t);
    } else if (id == "gaussian-location") {
        const auto d = j.at("dimension").get<std::size_t>();
        const auto terms = j.at("terms").get<int>();
        const auto data_std = j.value("data_std", 1.0);
        auto t = std::make_unique<GaussianLocation>(d, terms, data_std, master_seed ^ 0x51Du);
        out.default_initial = t->mean();
        out.sample_dim = d;
        auto* raw = t.get();
        out.exact = [raw](std::int64_t n, std::uint64_t s) { return raw->exact_samples(n, s); };
        out.target = std::move(t);
    } else {
        throw ConfigError("unknown target id: " + id);
    }
    return out;
}

std::unique_ptr<BarrierMap> build_barrier(const json& cfg, const Target& target) {
    if (!cfg.contains("barrier")) return nullptr;
    const auto& j = cfg.at("barrier");
    const auto id = j.at("id").get<std::string>();
    const std::size_t d = target.dimension();

    if (id == "identity") return make_identity_barrier(d);
    if (id == "hypercube") return make_hypercube_barrier(d);
    if (id == "entropic-quadratic") return make_entropic_quadratic_barrier(d);
    if (id == "simplex") {
        const auto* post = dynamic_cast<const DirichletPosterior*>(&target);
        if (!post) throw ConfigError("simplex barrier requires the dirichlet target");
        return make_simplex_entropy_barrier(post->categories());
    }
    if (id == "box") {
        const auto* tg = dynamic_cast<const TruncatedGaussian*>(&target);
        if (!tg || !tg->is_box_bounded())
            throw ConfigError("box barrier requires a box-truncated gaussian target");
        return make_box_barrier(tg->lower(), tg->upper());
    }
    if (id == "preconditioned-hypercube") {
        std::vector<double> weights;
        if (j.contains("weights")) {
            weights = j.at("weights").get<std::vector<double>>();
        } else {
            const auto* tg = dynamic_cast<const TruncatedGaussian*>(&target);
            if (!tg) throw ConfigError("preconditioned barrier needs weights or a gaussian target");
            const auto mode = j.value("precondition", std::string("sigma-inverse-sqrt"));
            weights.resize(d);
            for (std::size_t i = 0; i < d; ++i) {
                const double t = tg->precision()(i, i);
                weights[i] = mode == "sigma-inverse" ? t : std::sqrt(t);
            }
        }
        return make_preconditioned_hypercube_barrier(weights);
    }
    throw ConfigError("unknown barrier id: " + id);
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    json raw;
    std::string sampler;
    double budget_evals = 0.0;       // gradient evaluations (= epochs)
    std::int64_t budget_events = 0;  // used when > 0
    int replicates = 1;
    double burn_in = 0.10;
    std::int64_t samples_per_replicate = 1000;
    std::uint64_t master_seed = 1;
    std::string out_dir;
    int threads = 2;
    bool compute_w1 = true;
    bool emit_series = false;
    int series_checkpoints = 200;
    int histogram_bins = 0;
};

ExperimentConfig parse_experiment(const json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.sampler = j.at("sampler").get<std::string>();
    const auto& budget = j.at("budget");
    if (budget.contains("events"))
        cfg.budget_events = budget.at("events").get<std::int64_t>();
    else if (budget.contains("gradient_evaluations"))
        cfg.budget_evals = budget.at("gradient_evaluations").get<double>();
    else if (budget.contains("epochs"))
        cfg.budget_evals = budget.at("epochs").get<double>();
    else
        throw ConfigError("budget must set events, gradient_evaluations or epochs");
    if (cfg.budget_events <= 0 && !(cfg.budget_evals > 0.0))
        throw ConfigError("budget must be positive");
    cfg.replicates = j.value("replicates", 1);
    if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
    cfg.burn_in = j.value("burn_in_fraction", 0.10);
    if (cfg.burn_in < 0.0 || cfg.burn_in >= 1.0) throw ConfigError("burn_in_fraction in [0, 1)");
    cfg.samples_per_replicate = j.value("samples_per_replicate", std::int64_t{1000});
    if (cfg.samples_per_replicate < 1) throw ConfigError("samples_per_replicate must be >= 1");
    cfg.master_seed = j.value("seed", std::uint64_t{1});
    cfg.out_dir = j.value("output", std::string("results"));
    cfg.compute_w1 = j.value("compute_w1", true);
    if (j.contains("running_series")) {
        cfg.emit_series = true;
        cfg.series_checkpoints = j.at("running_series").value("checkpoints", 200);
    }
    cfg.histogram_bins = j.value("histogram_bins", 0);
    return cfg;
}

struct ReplicateResult {
    bool ok = false;
    std::string error;
    std::vector<Vec> samples;                           // post burn-in
    std::vector<std::pair<double, double>> x1_series;   // (epoch, first coordinate), full stream
    ThinningStats stats;
    double total_epochs = 0.0;
};

struct SamplerContext {
    const Target* target = nullptr;
    const BarrierMap* barrier = nullptr;
    DerivedConstants constants;
    json explicit_constants;
    double refresh_rate = 1.0;
    double myula_epsilon = 0.01;
    int inner_steps = 10;
    Vec initial;
    std::optional<DirichletDualPieces> dual_pieces;
    std::optional<SubsampledGradient> dual_sg;
    std::optional<SubsampledGradient> primal_sg;
};

double require_constant(const SamplerContext& ctx, const std::string& key, double derived) {
    if (ctx.explicit_constants.contains(key)) return ctx.explicit_constants.at(key).get<double>();
    if (std::isnan(derived))
        throw ConfigError("no derived value for '" + key + "'; set it explicitly in constants");
    return derived;
}

// Extract post-burn-in samples and the epoch-tagged first-coordinate stream
// from a PDMP skeleton.
ReplicateResult harvest_skeleton(const Skeleton& skel, const ExperimentConfig& cfg,
                                 const BarrierMap* barrier) {
    ReplicateResult r;
    r.stats = skel.stats;
    r.total_epochs = skel.stats.gradient_evaluations;

    const std::int64_t want = cfg.samples_per_replicate;
    const auto total = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(want) / (1.0 - cfg.burn_in)));
    std::vector<Vec> all = barrier ? extract_primal_samples(skel, *barrier, total)
                                   : extract_samples(skel, total);
    const std::int64_t drop = total - want;
    r.samples.assign(all.begin() + drop, all.end());

    r.x1_series.reserve(all.size());
    const double T = skel.final_time;
    for (std::size_t k = 0; k < all.size(); ++k) {
        const double tk = T * static_cast<double>(k + 1) / static_cast<double>(all.size());
        r.x1_series.emplace_back(evals_at_time(skel, tk), all[k][0]);
    }
    r.ok = true;
    return r;
}

ReplicateResult harvest_chain(const ChainResult& chain, const ExperimentConfig& cfg) {
    ReplicateResult r;
    r.total_epochs = chain.evals_per_step * static_cast<double>(chain.samples.size());
    r.x1_series.reserve(chain.samples.size());
    for (std::size_t k = 0; k < chain.samples.size(); ++k)
        r.x1_series.emplace_back(chain.evals_per_step * static_cast<double>(k + 1),
                                 chain.samples[k][0]);

    const auto n = static_cast<std::int64_t>(chain.samples.size());
    const auto start = static_cast<std::int64_t>(cfg.burn_in * static_cast<double>(n));
    const std::int64_t kept = n - start;
    const std::int64_t want = std::min(cfg.samples_per_replicate, kept);
    r.samples.reserve(static_cast<std::size_t>(want));
    for (std::int64_t i = 0; i < want; ++i) {
        const auto idx = start + (i * kept) / want + (kept / want) / 2;
        r.samples.push_back(chain.samples[static_cast<std::size_t>(std::min(idx, n - 1))]);
    }
    r.ok = true;
    return r;
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, const SamplerContext& ctx,
                              std::uint64_t seed) {
    const Budget budget = cfg.budget_events > 0
                              ? Budget::events(cfg.budget_events)
                              : Budget::gradient_evaluations(cfg.budget_evals);
    const std::int64_t chain_steps =
        cfg.budget_events > 0 ? cfg.budget_events
                              : static_cast<std::int64_t>(cfg.budget_evals);
    const auto& s = cfg.sampler;
    const Target& target = *ctx.target;
    GradientFn grad = [&target](const Vec& x, Vec& g) { target.gradient_into(x, g); };

    if (s == "zzs" || s == "bps" || s == "zzss") {
        PhaseState init;
        init.position = ctx.initial;
        Skeleton skel;
        if (s == "zzs") {
            init.velocity = aux_stream(seed).rademacher_vector(target.dimension());
            ZigZagSpec spec{target.dimension(), grad,
                            require_constant(ctx, "lipschitz", ctx.constants.primal_lipschitz)};
            skel = run_zzs(spec, init, budget, seed);
        } else if (s == "bps") {
            init.velocity = aux_stream(seed).unit_sphere(target.dimension());
            BouncySpec spec{target.dimension(), grad,
                            require_constant(ctx, "lipschitz", ctx.constants.primal_lipschitz),
                            ctx.refresh_rate, RefreshDist::UnitSphere};
            skel = run_bps(spec, init, budget, seed);
        } else {
            init.velocity = aux_stream(seed).rademacher_vector(target.dimension());
            skel = run_zzss(*ctx.primal_sg, init, budget, seed);
        }
        return harvest_skeleton(skel, cfg, nullptr);
    }

    if (s == "mzzs" || s == "mbps" || s == "mzzss") {
        const double lv = require_constant(ctx, "dual_lipschitz", ctx.constants.dual_lipschitz);
        Skeleton skel;
        if (s == "mzzs")
            skel = run_mzzs(*ctx.barrier, target, lv, ctx.initial, budget, seed);
        else if (s == "mbps")
            skel = run_mbps(*ctx.barrier, target, lv, ctx.refresh_rate, ctx.initial, budget, seed);
        else
            skel = run_mzzss(*ctx.barrier, *ctx.dual_sg, ctx.initial, budget, seed);
        return harvest_skeleton(skel, cfg, ctx.barrier);
    }

    const double step_default =
        s == "mlam" || s == "smlam" ? ctx.constants.mlam_step : ctx.constants.mlaa_step;
    const double dt = require_constant(ctx, "step_size", step_default);

    if (s == "ula") {
        return harvest_chain(run_ula_chain(grad, ctx.initial, dt, chain_steps, seed), cfg);
    }
    if (s == "plmc" || s == "myula") {
        const auto* tg = dynamic_cast<const TruncatedGaussian*>(&target);
        ProjectionFn proj;
        if (tg && tg->is_box_bounded())
            proj = box_projection(tg->lower(), tg->upper());
        else if (dynamic_cast<const GammaProduct*>(&target))
            proj = orthant_projection();
        else
            throw ConfigError(s + " requires a box or orthant constrained target");
        return harvest_chain(
            s == "plmc"
                ? run_plmc_chain(grad, proj, ctx.initial, dt, chain_steps, seed)
                : run_myula_chain(grad, proj, ctx.initial, dt, ctx.myula_epsilon, chain_steps,
                                  seed),
            cfg);
    }
    if (s == "mlaa")
        return harvest_chain(
            run_mlaa_chain(*ctx.barrier, target, ctx.initial, dt, chain_steps, seed), cfg);
    if (s == "mlam")
        return harvest_chain(run_mlam_chain(*ctx.barrier, target, ctx.initial, dt,
                                            ctx.inner_steps, chain_steps, seed),
                             cfg);
    if (s == "smlaa")
        return harvest_chain(
            run_smlaa_chain(*ctx.barrier, *ctx.dual_sg, ctx.initial, dt, chain_steps, seed), cfg);
    if (s == "smlam")
        return harvest_chain(run_smlam_chain(*ctx.barrier, *ctx.primal_sg, ctx.initial, dt,
                                             ctx.inner_steps, chain_steps, seed),
                             cfg);
    throw ConfigError("unknown sampler id: " + cfg.sampler);
}

SamplerContext build_context(const ExperimentConfig& cfg, const TargetBundle& bundle,
                             const BarrierMap* barrier) {
    SamplerContext ctx;
    ctx.target = bundle.target.get();
    ctx.barrier = barrier;
    if (cfg.raw.contains("constants") && cfg.raw.at("constants").is_object())
        ctx.explicit_constants = cfg.raw.at("constants");
    ctx.refresh_rate = cfg.raw.value("refresh_rate", 1.0);
    ctx.myula_epsilon = cfg.raw.value("myula_epsilon", 0.01);
    ctx.inner_steps = cfg.raw.value("inner_steps", 10);
    ctx.initial = cfg.raw.contains("initial")
                      ? cfg.raw.at("initial").get<Vec>()
                      : bundle.default_initial;

    const bool needs_barrier = cfg.sampler == "mzzs" || cfg.sampler == "mbps" ||
                               cfg.sampler == "mzzss" || cfg.sampler == "mlaa" ||
                               cfg.sampler == "mlam" || cfg.sampler == "smlaa" ||
                               cfg.sampler == "smlam";
    if (needs_barrier && !barrier) throw ConfigError(cfg.sampler + " requires a barrier");

    if (barrier) {
        try {
            ctx.constants = derived_constants(*ctx.target, *barrier);
        } catch (const std::invalid_argument&) {
            // Pair without derived constants: all values must be explicit.
        }
    } else if (const auto* tg = dynamic_cast<const TruncatedGaussian*>(ctx.target)) {
        ctx.constants.primal_lipschitz = linalg::spectral_norm(tg->precision(), 1e-10);
    } else if (dynamic_cast<const GaussianLocation*>(ctx.target)) {
        ctx.constants.primal_lipschitz = 1.0;
    }

    if (cfg.sampler == "mzzss" || cfg.sampler == "smlaa") {
        const auto* post = dynamic_cast<const DirichletPosterior*>(ctx.target);
        const auto* simplex = dynamic_cast<const SimplexEntropyBarrier*>(barrier);
        if (!post || !simplex)
            throw ConfigError(cfg.sampler + " requires the dirichlet target and simplex barrier");
        ctx.dual_pieces = dirichlet_dual_pieces(*post, *simplex);
        ctx.dual_sg = subsampled_dual_gradient(*ctx.dual_pieces);
    }
    if (cfg.sampler == "smlam") {
        const auto* post = dynamic_cast<const DirichletPosterior*>(ctx.target);
        if (!post) throw ConfigError("smlam requires the dirichlet target");
        const auto scale = post->total_counts() + post->total_prior();
        Vec xbar(post->dimension());
        for (std::size_t i = 0; i < xbar.size(); ++i)
            xbar[i] = (post->counts()[i] + post->prior()[i]) / scale;
        ctx.primal_sg = make_subsampled_gradient(
            post->dimension(), post->batch_count(),
            [post](int j, const Vec& x, Vec& g) { post->batch_gradient_into(j, x, g); }, xbar,
            scale, std::numeric_limits<double>::infinity());
    }
    if (cfg.sampler == "zzss") {
        const auto* gl = dynamic_cast<const GaussianLocation*>(ctx.target);
        if (!gl) throw ConfigError("zzss requires the gaussian-location target");
        ctx.primal_sg = make_subsampled_gradient(
            gl->dimension(), gl->terms(),
            [gl](int j, const Vec& x, Vec& g) { gl->term_gradient_into(j, x, g); }, gl->mean(),
            1.0, 2.0);
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Metrics and output
// ---------------------------------------------------------------------------

json moment_metrics(const std::vector<ReplicateResult>& reps, std::size_t dim) {
    json out = json::array();
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> rep_means;
        std::vector<double> pooled;
        for (const auto& r : reps) {
            if (!r.ok) continue;
            std::vector<double> xs;
            xs.reserve(r.samples.size());
            for (const auto& s : r.samples) xs.push_back(s[k]);
            rep_means.push_back(metrics::mean(xs));
            pooled.insert(pooled.end(), xs.begin(), xs.end());
        }
        if (pooled.empty()) continue;
        json m;
        m["coordinate"] = k + 1;
        m["mean"] = metrics::mean(pooled);
        m["std"] = pooled.size() > 1 ? std::sqrt(metrics::variance(pooled)) : 0.0;
        m["replicate_mean_se"] =
            rep_means.size() > 1
                ? std::sqrt(metrics::variance(rep_means) / static_cast<double>(rep_means.size()))
                : 0.0;
        m["batch_means_se"] = metrics::batch_means_standard_error(pooled);
        out.push_back(m);
    }
    return out;
}

void write_histograms(const std::vector<ReplicateResult>& reps, std::size_t dim, int bins,
                      const std::filesystem::path& dir) {
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> xs;
        for (const auto& r : reps)
            for (const auto& s : r.samples) xs.push_back(s[k]);
        if (xs.empty()) continue;
        const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
        const double lo = *lo_it, hi = *hi_it;
        const double width = (hi - lo) > 0 ? (hi - lo) : 1.0;
        std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
        for (double x : xs) {
            auto b = static_cast<std::size_t>((x - lo) / width * bins);
            counts[std::min(b, static_cast<std::size_t>(bins - 1))]++;
        }
        std::ofstream f(dir / ("histogram_x" + std::to_string(k + 1) + ".csv"));
        f << "bin_center,count\n";
        for (int b = 0; b < bins; ++b)
            f << format_full_precision(lo + (b + 0.5) * width / bins) << ',' << counts[static_cast<std::size_t>(b)]
              << "\n";
    }
}

int run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    auto bundle = build_target(cfg.raw, cfg.master_seed, cfg.threads);
    auto barrier = build_barrier(cfg.raw, *bundle.target);
    const auto ctx = build_context(cfg, bundle, barrier.get());

    std::filesystem::create_directories(cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);

    if (const auto* post = dynamic_cast<const DirichletPosterior*>(bundle.target.get()))
        write_dirichlet_dataset_json(*post,
                                     cfg.raw.at("target").value("p", std::vector<double>{}),
                                     (dir / "dataset.json").string());

    // Replicates on a bounded worker pool; seeds are master + index.
    std::vector<ReplicateResult> reps(static_cast<std::size_t>(cfg.replicates));
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= cfg.replicates) return;
            auto& slot = reps[static_cast<std::size_t>(r)];
            try {
                slot = run_replicate(cfg, ctx, cfg.master_seed + static_cast<std::uint64_t>(r));
            } catch (const std::exception& e) {
                slot.ok = false;
                slot.error = e.what();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        const int n_workers = std::max(1, std::min(cfg.threads, cfg.replicates));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Per-replicate sample files.
    for (int r = 0; r < cfg.replicates; ++r) {
        const auto& rep = reps[static_cast<std::size_t>(r)];
        if (rep.ok)
            write_samples_csv(rep.samples, (dir / ("replicate_" + std::to_string(r) + ".csv")).string());
    }

    // Metrics.
    json metrics_json;
    metrics_json["moments"] = moment_metrics(reps, bundle.sample_dim);
    if (cfg.compute_w1) {
        std::vector<double> totals;
        json per_rep = json::array();
        for (int r = 0; r < cfg.replicates; ++r) {
            const auto& rep = reps[static_cast<std::size_t>(r)];
            if (!rep.ok) continue;
            const auto reference = bundle.exact(
                static_cast<std::int64_t>(rep.samples.size()),
                cfg.master_seed + 0x77770000ull + static_cast<std::uint64_t>(r));
            const auto rpt = metrics::w1_multivariate_by_marginals(rep.samples, reference);
            totals.push_back(rpt.total_error);
            per_rep.push_back({{"replicate", r},
                               {"per_marginal", rpt.per_marginal_errors},
                               {"total", rpt.total_error}});
        }
        const auto [floor_mean, floor_std] = metrics::noise_floor_multivariate(
            [&](int copy) {
                return bundle.exact(cfg.samples_per_replicate,
                                    cfg.master_seed + 0x66660000ull +
                                        static_cast<std::uint64_t>(copy));
            },
            10);
        metrics_json["w1"] = {{"per_replicate", per_rep},
                              {"median_total", totals.empty() ? 0.0 : metrics::median(totals)},
                              {"noise_floor_mean", floor_mean},
                              {"noise_floor_std", floor_std}};
    }
    if (cfg.emit_series) {
        const auto* post = dynamic_cast<const DirichletPosterior*>(bundle.target.get());
        const double true_std = cfg.raw.at("running_series").contains("true_std")
                                    ? cfg.raw.at("running_series").at("true_std").get<double>()
                                    : (post ? post->marginal_std(0) : 0.0);
        if (!(true_std > 0.0)) throw ConfigError("running_series requires a positive true_std");
        for (int r = 0; r < cfg.replicates; ++r) {
            const auto& rep = reps[static_cast<std::size_t>(r)];
            if (!rep.ok) continue;
            std::vector<double> checkpoints;
            for (int c = 1; c <= cfg.series_checkpoints; ++c)
                checkpoints.push_back(rep.total_epochs * c / cfg.series_checkpoints);
            const auto series =
                metrics::running_relative_std_error(rep.x1_series, true_std, checkpoints);
            std::ofstream f(dir / ("running_rel_std_x1_" + std::to_string(r) + ".csv"));
            f << "epoch,value\n";
            for (std::size_t i = 0; i < series.size(); ++i)
                f << format_full_precision(checkpoints[i]) << ','
                  << format_full_precision(series[i]) << "\n";
        }
    }
    if (cfg.histogram_bins > 0) write_histograms(reps, bundle.sample_dim, cfg.histogram_bins, dir);
    {
        std::ofstream f(dir / "metrics.json");
        f << metrics_json.dump(2) << "\n";
    }

    // Manifest.
    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = cfg.raw;
    manifest["refresh_rate"] = ctx.refresh_rate;
    manifest["burn_in_fraction"] = cfg.burn_in;
    manifest["series_burn_in_fraction"] = 0.0;
    json rep_info = json::array();
    bool any_failed = false;
    for (int r = 0; r < cfg.replicates; ++r) {
        const auto& rep = reps[static_cast<std::size_t>(r)];
        json ri{{"index", r},
                {"seed", cfg.master_seed + static_cast<std::uint64_t>(r)},
                {"status", rep.ok ? "ok" : "aborted"}};
        if (!rep.ok) {
            ri["error"] = rep.error;
            any_failed = true;
        } else {
            ri["stats"] = {{"proposals", rep.stats.proposals},
                           {"acceptances", rep.stats.acceptances},
                           {"clock_draws", rep.stats.clock_draws},
                           {"gradient_evaluations", rep.stats.gradient_evaluations}};
        }
        rep_info.push_back(ri);
    }
    manifest["replicates"] = rep_info;
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ofstream f(dir / "manifest.json");
        f << manifest.dump(2) << "\n";
    }

    std::cout << "wrote " << cfg.out_dir << " (" << cfg.replicates << " replicates)\n";
    return any_failed ? 3 : 0;
}

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    json j;
    f >> j;
    return j;
}

int run_compare(const std::vector<std::string>& config_paths, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override, int threads) {
    if (config_paths.empty()) throw ConfigError("compare: no configs given");
    struct Row {
        std::string sampler;
        double budget;
        double median_w1;
        double mean_x1;
        double floor_mean;
    };
    std::vector<Row> rows;
    std::string target_id;

    for (const auto& path : config_paths) {
        auto j = load_json(path);
        if (seed_override) j["seed"] = *seed_override;
        auto cfg = parse_experiment(j);
        cfg.threads = threads;
        cfg.out_dir = (std::filesystem::path(out_dir) / cfg.sampler).string();
        const auto tid = j.at("target").at("id").get<std::string>();
        if (target_id.empty()) target_id = tid;
        else if (target_id != tid)
            throw ConfigError("compare: configs disagree on the target (" + target_id + " vs " +
                              tid + ")");
        const int rc = run_experiment(cfg);
        if (rc != 0) return rc;

        const auto m = load_json((std::filesystem::path(cfg.out_dir) / "metrics.json").string());
        Row row;
        row.sampler = cfg.sampler;
        row.budget = cfg.budget_events > 0 ? static_cast<double>(cfg.budget_events)
                                           : cfg.budget_evals;
        row.median_w1 = m.contains("w1") ? m.at("w1").at("median_total").get<double>() : -1.0;
        row.floor_mean = m.contains("w1") ? m.at("w1").at("noise_floor_mean").get<double>() : -1.0;
        row.mean_x1 = m.at("moments").at(0).at("mean").get<double>();
        rows.push_back(row);
    }

    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.median_w1 < b.median_w1; });

    std::filesystem::create_directories(out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "comparison.csv");
    csv << "sampler,budget,median_w1,noise_floor_mean,mean_x1\n";
    json jrows = json::array();
    for (const auto& r : rows) {
        csv << r.sampler << ',' << format_full_precision(r.budget) << ','
            << format_full_precision(r.median_w1) << ',' << format_full_precision(r.floor_mean)
            << ',' << format_full_precision(r.mean_x1) << "\n";
        jrows.push_back({{"sampler", r.sampler},
                         {"budget", r.budget},
                         {"median_w1", r.median_w1},
                         {"noise_floor_mean", r.floor_mean},
                         {"mean_x1", r.mean_x1}});
    }
    std::ofstream jf(std::filesystem::path(out_dir) / "comparison.json");
    jf << jrows.dump(2) << "\n";
    std::cout << "wrote " << out_dir << "/comparison.csv (" << rows.size() << " samplers)\n";
    return 0;
}

int run_wasserstein(const std::string& file_a, const std::string& file_b,
                    const std::string& out_path) {
    const auto a = read_samples_csv(file_a);
    const auto b = read_samples_csv(file_b);
    if (a.empty() || b.empty()) throw ConfigError("wasserstein: empty sample file");
    json out;
    if (a.size() == b.size()) {
        const auto rpt = metrics::w1_multivariate_by_marginals(a, b);
        out["per_marginal"] = rpt.per_marginal_errors;
        out["total"] = rpt.total_error;
    } else {
        const std::size_t d = a.front().size();
        std::vector<double> per(d);
        double total = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<double> ak(a.size()), bk(b.size());
            for (std::size_t i = 0; i < a.size(); ++i) ak[i] = a[i][k];
            for (std::size_t i = 0; i < b.size(); ++i) bk[i] = b[i][k];
            per[k] = metrics::w1_quantile_aligned(ak, bk);
            total += per[k];
        }
        out["per_marginal"] = per;
        out["total"] = total;
        out["note"] = "unequal sample counts aligned at common quantiles";
    }
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        f << out.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int run_noise_floor(const std::string& config_path, std::int64_t n, int copies,
                    std::uint64_t seed, int threads, const std::string& out_path) {
    const auto j = load_json(config_path);
    auto bundle = build_target(j, seed, threads);
    const auto [m, s] = metrics::noise_floor_multivariate(
        [&](int copy) {
            return bundle.exact(n, seed + 0x66660000ull + static_cast<std::uint64_t>(copy));
        },
        copies);
    json out{{"n", n}, {"copies", copies}, {"floor_mean", m}, {"floor_std", s}};
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        f << out.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained-sampler benchmark harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_path;
    std::vector<std::string> config_paths;
    std::string file_a, file_b;
    std::optional<std::uint64_t> seed_opt;
    std::optional<int> replicates_opt;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::int64_t floor_n = 10000;
    int floor_copies = 10;

    auto* sample = app.add_subcommand("sample", "run one experiment config");
    sample->add_option("--config", config_path, "experiment config JSON")->required();
    sample->add_option("--seed", seed_opt, "override the master seed");
    sample->add_option("--replicates", replicates_opt, "override the replicate count");
    sample->add_option("--out", out_dir, "override the output directory");
    sample->add_option("--threads", threads, "worker pool size");

    auto* compare = app.add_subcommand("compare", "run several configs over one target");
    compare->add_option("--config", config_paths, "experiment configs JSON")->required();
    compare->add_option("--seed", seed_opt, "override the master seed");
    compare->add_option("--out", out_dir, "output directory")->required();
    compare->add_option("--threads", threads, "worker pool size");

    auto* wass = app.add_subcommand("wasserstein", "W1 between two sample CSV files");
    wass->add_option("file_a", file_a)->required();
    wass->add_option("file_b", file_b)->required();
    wass->add_option("--out", out_path, "output JSON path (default stdout)");

    auto* floor = app.add_subcommand("noise-floor", "exact-vs-exact W1 baseline");
    floor->add_option("--config", config_path, "config JSON with a target block")->required();
    floor->add_option("--n", floor_n, "samples per copy");
    floor->add_option("--copies", floor_copies, "number of exact copies");
    floor->add_option("--seed", seed_opt, "master seed");
    floor->add_option("--out", out_path, "output JSON path (default stdout)");
    floor->add_option("--threads", threads, "worker pool size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sample->parsed()) {
            auto j = load_json(config_path);
            if (seed_opt) j["seed"] = *seed_opt;
            if (replicates_opt) j["replicates"] = *replicates_opt;
            if (!out_dir.empty()) j["output"] = out_dir;
            auto cfg = parse_experiment(j);
            cfg.threads = threads;
            return run_experiment(cfg);
        }
        if (compare->parsed())
            return run_compare(config_paths, out_dir, seed_opt, threads);
        if (wass->parsed()) return run_wasserstein(file_a, file_b, out_path);
        if (floor->parsed())
            return run_noise_floor(config_path, floor_n, floor_copies, seed_opt.value_or(1),
                                   threads, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const BoundViolationError& e) {
        std::cerr << "sampler abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "sampler abort: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
