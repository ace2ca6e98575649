#include "fbmavg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>

#include "fbmavg/errors.hpp"
#include "fbmavg/seeding.hpp"
#include "parallel.hpp"

namespace fbmavg {

void ExperimentConfig::validate() const {
    if (epsilons.empty()) throw DomainError("experiment needs at least one epsilon");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || !(epsilons[i] <= system.epsilon_0())) {
            throw DomainError("epsilon " + std::to_string(epsilons[i]) + " outside (0, epsilon_0]");
        }
        if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
            throw DomainError("epsilons must be sorted in strictly descending order");
        }
    }
    if (replicates < 2) throw DomainError("experiment needs at least 2 replicates");
    if (x0.size() != system.dim_state()) throw DomainError("x0 has the wrong dimension");
    if (!(delta > 0.0)) throw DomainError("exceedance threshold delta must be positive");
    if (!(window > 0.0)) throw DomainError("averaging window must be positive");
    if (keep_trajectories > 10) throw DomainError("at most 10 trajectories can be kept");
    system.hurst().require_fractional("experiment");
}

namespace {

struct ReplicateOutcome {
    bool diverged = false;
    std::vector<double> sq_error;
    double max_abs = 0.0;
    std::optional<std::pair<Trajectory, Trajectory>> kept;
};

// Everything a replicate needs, shared read-only across threads.
struct PairedContext {
    FbmGenerator generator;
    SdeSystem original;
    SdeSystem averaged;
    Vector x0;
    IntegralKind kind;
    std::uint64_t seed;
    std::size_t keep;
};

PairedContext make_context(const ExperimentConfig& config, double epsilon) {
    config.validate();
    std::shared_ptr<const AveragedSystem> avg = config.averaged;
    if (!avg) {
        avg = std::make_shared<const AveragedSystem>(
            build_averaged_system(config.system, config.window, config.diffusion_mode));
    }
    return PairedContext{FbmGenerator(config.method, config.grid, config.system.hurst()),
                         config.system.with_epsilon(epsilon),
                         avg->as_system(epsilon),
                         config.x0,
                         config.kind,
                         config.master_seed,
                         config.keep_trajectories};
}

ReplicateOutcome run_replicate(const PairedContext& ctx, std::size_t r) {
    const std::size_t m = ctx.original.dim_noise();
    std::vector<FbmPath> paths;
    paths.reserve(m);
    std::vector<double> noise(ctx.generator.noise_size());
    for (std::size_t j = 0; j < m; ++j) {
        fill_standard_normal(noise, stream_seed(ctx.seed, r, j));
        paths.push_back(ctx.generator.generate(noise));
    }

    ReplicateOutcome out;
    try {
        Trajectory x = euler_solve(ctx.original, ctx.x0, paths, ctx.kind);
        Trajectory z = euler_solve(ctx.averaged, ctx.x0, paths, ctx.kind);
        const std::size_t nodes = x.grid().n_nodes();
        out.sq_error.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < x.dim(); ++c) {
                const double d = x.at(i, c) - z.at(i, c);
                s += d * d;
            }
            out.sq_error[i] = s;
            out.max_abs = std::max(out.max_abs, std::sqrt(s));
        }
        if (r < ctx.keep) out.kept.emplace(std::move(x), std::move(z));
    } catch (const DivergenceError&) {
        out.diverged = true;
    }
    return out;
}

PairedEnsemble aggregate(const ExperimentConfig& config, double epsilon, std::vector<ReplicateOutcome>& outcomes) {
    PairedEnsemble ens{.epsilon = epsilon, .kind = config.kind, .grid = config.grid};
    const std::size_t nodes = config.grid.n_nodes();

    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (outcomes[r].diverged) ens.divergent_replicates.push_back(r);
    }
    ens.divergent = ens.divergent_replicates.size();
    if (ens.divergent * 100 > outcomes.size()) {
        throw ExperimentError(std::to_string(ens.divergent) + " of " + std::to_string(outcomes.size()) +
                              " replicates diverged (more than 1%) at epsilon " + std::to_string(epsilon));
    }
    ens.replicates_used = outcomes.size() - ens.divergent;

    std::vector<double> column(ens.replicates_used);
    ens.mse.resize(nodes);
    ens.mse_ci_lo.resize(nodes);
    ens.mse_ci_hi.resize(nodes);
    std::vector<Interval> node_ci(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        std::size_t k = 0;
        for (const auto& o : outcomes) {
            if (!o.diverged) column[k++] = o.sq_error[i];
        }
        const MeanEstimate est = mean_estimate(column);
        Interval ci = normal_interval(est);
        ci.lo = std::max(0.0, ci.lo);
        ens.mse[i] = est.mean;
        ens.mse_ci_lo[i] = ci.lo;
        ens.mse_ci_hi[i] = ci.hi;
        node_ci[i] = ci;
    }
    const auto sup = std::max_element(ens.mse.begin(), ens.mse.end());
    ens.sup_node = static_cast<std::size_t>(sup - ens.mse.begin());
    ens.sup_mse = *sup;
    ens.sup_mse_ci = node_ci[ens.sup_node];

    std::size_t exceed = 0;
    for (auto& o : outcomes) {
        if (o.diverged) continue;
        ens.max_abs_error.push_back(o.max_abs);
        if (o.max_abs > config.delta) ++exceed;
        if (o.kept) ens.kept.push_back(std::move(*o.kept));
    }
    ens.exceedance = static_cast<double>(exceed) / static_cast<double>(ens.replicates_used);
    ens.exceedance_ci = wilson_interval(exceed, ens.replicates_used);
    return ens;
}

RegularityReport regularity_of(const PairedContext& ctx, const ExperimentConfig& config) {
    double lo = -1.0, hi = 1.0;
    for (double v : config.x0) {
        lo = std::min(lo, v - 1.0);
        hi = std::max(hi, v + 1.0);
    }
    RegularityReport rep = spot_check_coefficients(ctx.original, config.grid.t_end(), lo, hi);
    if (!rep.finite) throw DomainError("coefficients are not finite on the sampled state box");
    return rep;
}

}  // namespace

PairedEnsemble run_paired(const ExperimentConfig& config, double epsilon) {
    const PairedContext ctx = make_context(config, epsilon);
    const RegularityReport regularity = regularity_of(ctx, config);
    const auto n = static_cast<std::ptrdiff_t>(config.replicates);
    const int nthreads = detail::resolve_threads(config.threads);
    std::vector<ReplicateOutcome> outcomes(config.replicates);
    std::exception_ptr error;

#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads != 1)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        try {
            outcomes[r] = run_replicate(ctx, static_cast<std::size_t>(r));
        } catch (...) {
#pragma omp critical(fbmavg_paired_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    PairedEnsemble ens = aggregate(config, epsilon, outcomes);
    ens.regularity = regularity;
    return ens;
}

PairedEnsemble run_paired_serial(const ExperimentConfig& config, double epsilon) {
    const PairedContext ctx = make_context(config, epsilon);
    const RegularityReport regularity = regularity_of(ctx, config);
    std::vector<ReplicateOutcome> outcomes(config.replicates);
    for (std::size_t r = 0; r < config.replicates; ++r) outcomes[r] = run_replicate(ctx, r);
    PairedEnsemble ens = aggregate(config, epsilon, outcomes);
    ens.regularity = regularity;
    return ens;
}

SweepResult epsilon_sweep(const ExperimentConfig& config) {
    config.validate();
    ExperimentConfig cfg = config;
    if (!cfg.averaged) {
        // Build once so the memo cache is shared across epsilons.
        cfg.averaged = std::make_shared<const AveragedSystem>(
            build_averaged_system(cfg.system, cfg.window, cfg.diffusion_mode));
    }
    SweepResult out;
    for (double eps : cfg.epsilons) {
        PairedEnsemble ens = run_paired(cfg, eps);
        out.rows.push_back({eps, ens.sup_mse, ens.sup_mse_ci, ens.exceedance, ens.exceedance_ci});
        out.divergent_total += ens.divergent;
        out.runs.push_back(std::move(ens));
    }
    if (out.rows.size() >= 2) {
        out.has_diagnostics = true;
        out.mse_nonincreasing = out.mse_strictly_decreasing = out.exceedance_nonincreasing = true;
        for (std::size_t i = 1; i < out.rows.size(); ++i) {
            const auto& prev = out.rows[i - 1];
            const auto& cur = out.rows[i];
            if (cur.sup_mse > prev.sup_mse) out.mse_nonincreasing = false;
            if (!(cur.sup_mse < prev.sup_mse)) out.mse_strictly_decreasing = false;
            if (cur.exceedance > prev.exceedance) out.exceedance_nonincreasing = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------- presets

PresetCase parse_preset_case(std::string_view s) {
    if (s == "a") return PresetCase::a;
    if (s == "b") return PresetCase::b;
    if (s == "c") return PresetCase::c;
    if (s == "d") return PresetCase::d;
    throw DomainError("unknown preset case '" + std::string(s) + "' (expected a, b, c or d)");
}

char to_char(PresetCase c) { return static_cast<char>('a' + static_cast<int>(c)); }

namespace {

constexpr ExampleParameters kExample1[] = {
    {.x0 = 0.0, .lambda = 0.2, .epsilon = 0.045, .hurst = 0.75},
    {.x0 = 0.1, .lambda = 0.2, .epsilon = 0.045, .hurst = 0.55},
    {.x0 = 0.1, .lambda = 0.4, .epsilon = 0.01, .hurst = 0.6},
    {.x0 = 0.0, .lambda = 0.4, .epsilon = 0.02, .hurst = 0.7},
};

constexpr ExampleParameters kExample2[] = {
    {.x0 = 0.0, .lambda = 2.0, .epsilon = 0.001, .hurst = 0.55},
    {.x0 = 0.0, .lambda = 2.0, .epsilon = 0.0045, .hurst = 0.65},
    {.x0 = 0.1, .lambda = 3.0, .epsilon = 0.002, .hurst = 0.6},
    {.x0 = 0.0, .lambda = 3.0, .epsilon = 0.002, .hurst = 0.7},
};

constexpr std::uint64_t kDefaultSeed = 20240917;
constexpr double kDefaultHorizon = 1.0;
constexpr std::size_t kDefaultSteps = 256;

Matrix scalar(double v) { return Matrix(1, 1, v); }

ExperimentConfig base_config(std::string name, SdeSystem system, const ExampleParameters& p) {
    return ExperimentConfig{
        .name = std::move(name),
        .system = std::move(system),
        .averaged = nullptr,
        .window = p.window,
        .kind = IntegralKind::symmetric,
        .x0 = {p.x0},
        .grid = TimeGrid(kDefaultHorizon, kDefaultSteps),
        .epsilons = {p.epsilon},
        .replicates = 2000,
        .master_seed = kDefaultSeed,
        .parameters = {{"x0", p.x0}, {"lambda", p.lambda}, {"epsilon", p.epsilon}, {"hurst", p.hurst}},
    };
}

}  // namespace

ExampleParameters example1_case(PresetCase c) { return kExample1[static_cast<int>(c)]; }
ExampleParameters example2_case(PresetCase c) { return kExample2[static_cast<int>(c)]; }

ExperimentConfig example1_preset(PresetCase c, DiffusionMode mode) {
    ExperimentConfig cfg = example1_config(example1_case(c), mode);
    cfg.name = std::string("example1/") + to_char(c);
    return cfg;
}

ExperimentConfig example2_preset(PresetCase c, DiffusionMode mode) {
    ExperimentConfig cfg = example2_config(example2_case(c), mode);
    cfg.name = std::string("example2/") + to_char(c);
    return cfg;
}

ExperimentConfig example1_config(const ExampleParameters& p, DiffusionMode mode) {
    const double lambda = p.lambda;
    DriftFn b = [lambda](double t, std::span<const double> x) {
        const double s = std::sin(t);
        return Vector{-2.0 * lambda * x[0] * s * s};
    };
    DiffusionFn sigma = [](double, std::span<const double>) { return scalar(1.0); };
    SdeSystem system(1, 1, b, sigma, HurstParameter(p.hurst), p.epsilon, p.epsilon_0);

    ExperimentConfig cfg = base_config("example1", system, p);
    cfg.diffusion_mode = mode;

    // The drift is linear in x, so its average is (average at x = 1) * x.
    const double slope = time_average_drift(b, cfg.window, std::vector<double>{1.0})[0];
    const Matrix sbar = rms_average_diffusion(sigma, cfg.window, std::vector<double>{0.0}, mode);
    AveragedSystem avg(
        system, cfg.window, [slope](std::span<const double> z) { return Vector{slope * z[0]}; },
        [sbar](std::span<const double>) { return sbar; }, Provenance::quadrature, mode);
    avg.add_stated_value({"b_bar_slope", -0.5 * lambda, slope});
    avg.add_stated_value({"sigma_bar", 1.0, sbar(0, 0)});
    cfg.averaged = std::make_shared<const AveragedSystem>(std::move(avg));
    return cfg;
}

ExperimentConfig example2_config(const ExampleParameters& p, DiffusionMode mode) {
    const double lambda = p.lambda;
    DriftFn b = [](double, std::span<const double>) { return Vector{-1.0}; };
    DiffusionFn sigma = [lambda](double t, std::span<const double>) {
        const double co = std::cos(t);
        return scalar(co * co * lambda);
    };
    SdeSystem system(1, 1, b, sigma, HurstParameter(p.hurst), p.epsilon, p.epsilon_0);

    ExperimentConfig cfg = base_config("example2", system, p);
    cfg.diffusion_mode = mode;

    // Neither coefficient depends on the state.
    const Vector bbar = time_average_drift(b, cfg.window, std::vector<double>{0.0});
    const Matrix sbar = rms_average_diffusion(sigma, cfg.window, std::vector<double>{0.0}, mode);
    AveragedSystem avg(
        system, cfg.window, [bbar](std::span<const double>) { return bbar; },
        [sbar](std::span<const double>) { return sbar; }, Provenance::quadrature, mode);
    avg.add_stated_value({"b_bar", -1.0, bbar[0]});
    avg.add_stated_value({"sigma_bar", 0.75 * lambda, sbar(0, 0)});
    cfg.averaged = std::make_shared<const AveragedSystem>(std::move(avg));
    return cfg;
}

ExperimentConfig autonomous_preset(double lambda, double hurst, double epsilon) {
    DriftFn b = [lambda](double, std::span<const double> x) { return Vector{-lambda * x[0]}; };
    DiffusionFn sigma = [](double, std::span<const double> x) {
        const double x2 = x[0] * x[0];
        return scalar(1.0 + x2 / (1.0 + x2));
    };
    SdeSystem system(1, 1, b, sigma, HurstParameter(hurst), epsilon, 1.0, true);
    ExperimentConfig cfg =
        base_config("autonomous", system, {.x0 = 0.5, .lambda = lambda, .epsilon = epsilon, .hurst = hurst});
    cfg.averaged = std::make_shared<const AveragedSystem>(
        build_averaged_system(system, cfg.window, cfg.diffusion_mode));
    return cfg;
}

ExperimentConfig preset_by_name(std::string_view name, PresetCase c, DiffusionMode mode) {
    if (name == "example1") return example1_preset(c, mode);
    if (name == "example2") return example2_preset(c, mode);
    if (name == "autonomous") {
        ExperimentConfig cfg = autonomous_preset();
        cfg.diffusion_mode = mode;
        return cfg;
    }
    throw DomainError("unknown preset '" + std::string(name) + "'");
}

double implied_horizon_constant(double t_end, double epsilon, HurstParameter h, double beta) {
    return t_end * std::pow(epsilon, 2.0 * h.value() * beta);
}

}  // namespace fbmavg
