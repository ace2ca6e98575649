#pragma once

// Monte Carlo comparison of an eps-scaled system X and its averaged
// counterpart Z driven by the same fBm path (synchronous coupling).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fbmavg/averaging.hpp"
#include "fbmavg/fgn.hpp"
#include "fbmavg/integrator.hpp"
#include "fbmavg/statistics.hpp"

namespace fbmavg {

struct ExperimentConfig {
    std::string name;
    SdeSystem system;
    /// Averaged counterpart; when null it is built by quadrature from
    /// `system`, `window` and `diffusion_mode`.
    std::shared_ptr<const AveragedSystem> averaged;
    double window = 0.0;
    IntegralKind kind = IntegralKind::symmetric;
    Vector x0;
    TimeGrid grid;
    /// Strictly decreasing, each in (0, system.epsilon_0()].
    std::vector<double> epsilons;
    std::size_t replicates = 2000;
    std::uint64_t master_seed = 0;
    /// Exceedance threshold for max_t |X - Z|.
    double delta = 0.05;
    DiffusionMode diffusion_mode = DiffusionMode::mean;
    GenerationMethod method = GenerationMethod::circulant;
    /// OpenMP threads; <= 0 means the runtime default.
    int threads = 0;
    /// Number of leading replicates whose full trajectories are kept (<= 10).
    std::size_t keep_trajectories = 10;
    /// Named scalar parameters echoed into reports (lambda, H, x0, ...).
    std::vector<std::pair<std::string, double>> parameters{};

    /// Throws DomainError on any violated invariant.
    void validate() const;
};

struct PairedEnsemble {
    double epsilon = 0.0;
    IntegralKind kind = IntegralKind::symmetric;
    TimeGrid grid;
    /// Per-node mean of |X - Z|^2 with a 95% interval (lower end clipped at 0).
    std::vector<double> mse{};
    std::vector<double> mse_ci_lo{};
    std::vector<double> mse_ci_hi{};
    double sup_mse = 0.0;
    Interval sup_mse_ci{};
    std::size_t sup_node = 0;
    /// Fraction of replicates with max_t |X - Z| > delta, Wilson 95% interval.
    double exceedance = 0.0;
    Interval exceedance_ci{};
    std::size_t replicates_used = 0;
    std::size_t divergent = 0;
    std::vector<std::size_t> divergent_replicates{};
    /// max_t |X - Z| for each used replicate, ascending replicate order.
    std::vector<double> max_abs_error{};
    /// First keep_trajectories replicates (X, Z).
    std::vector<std::pair<Trajectory, Trajectory>> kept{};
    RegularityReport regularity{};
};

/// Parallel over replicates; aggregation happens afterwards in ascending
/// replicate order, so results are bit-identical for any thread count and to
/// run_paired_serial. Divergent replicates are excluded and counted; more than
/// 1% divergent raises ExperimentError.
PairedEnsemble run_paired(const ExperimentConfig& config, double epsilon);

/// Single-threaded reference implementation of run_paired.
PairedEnsemble run_paired_serial(const ExperimentConfig& config, double epsilon);

struct SweepRow {
    double epsilon = 0.0;
    double sup_mse = 0.0;
    Interval mse_ci{};
    double exceedance = 0.0;
    Interval exceedance_ci{};
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<PairedEnsemble> runs;
    /// Present with two or more epsilons. Rows run from large to small eps.
    bool has_diagnostics = false;
    bool mse_nonincreasing = false;
    bool mse_strictly_decreasing = false;
    bool exceedance_nonincreasing = false;
    std::size_t divergent_total = 0;
};

/// run_paired for every configured epsilon on the same master seed.
SweepResult epsilon_sweep(const ExperimentConfig& config);

enum class PresetCase { a, b, c, d };

PresetCase parse_preset_case(std::string_view s);
char to_char(PresetCase c);

struct ExampleParameters {
    double x0 = 0.0;
    double lambda = 0.0;
    double epsilon = 0.0;
    double hurst = 0.75;
    double window = 3.14159265358979323846;
    double epsilon_0 = 1.0;
};

/// Preset cases for the sin^2-drift example:
///   a (x0 0.0, lambda 0.2, eps 0.045, H 0.75), b (0.1, 0.2, 0.045, 0.55),
///   c (0.1, 0.4, 0.01, 0.6),  d (0.0, 0.4, 0.02, 0.7).
ExampleParameters example1_case(PresetCase c);

/// Preset cases for the cos^2-diffusion example:
///   a (x0 0.0, lambda 2.0, eps 0.001, H 0.55), b (0.0, 2.0, 0.0045, 0.65),
///   c (0.1, 3.0, 0.002, 0.6), d (0.0, 3.0, 0.002, 0.7).
ExampleParameters example2_case(PresetCase c);

/// dX = -2 eps^{2H} lambda X sin^2(t) dt + eps^H dB^H with the averaged drift
/// obtained by quadrature over one period (T1 = pi).
ExperimentConfig example1_config(const ExampleParameters& p, DiffusionMode mode = DiffusionMode::mean);

/// dX = -eps^{2H} dt + eps^H lambda cos^2(t) dB^H, sigma-bar by `mode`.
ExperimentConfig example2_config(const ExampleParameters& p, DiffusionMode mode = DiffusionMode::mean);

ExperimentConfig example1_preset(PresetCase c = PresetCase::a, DiffusionMode mode = DiffusionMode::mean);
ExperimentConfig example2_preset(PresetCase c = PresetCase::a, DiffusionMode mode = DiffusionMode::mean);

/// Time-homogeneous system dX = -eps^{2H} lambda X dt + eps^H (1 + X^2/(1+X^2)) dB^H,
/// which is its own average. Used for null-coupling checks.
ExperimentConfig autonomous_preset(double lambda = 0.5, double hurst = 0.7, double epsilon = 0.1);

/// Builds one of the presets above by name: "example1", "example2" or "autonomous".
ExperimentConfig preset_by_name(std::string_view name, PresetCase c, DiffusionMode mode);

/// Horizon constant L implied by T = L eps^{-2H beta} for a chosen beta.
double implied_horizon_constant(double t_end, double epsilon, HurstParameter h, double beta);

}  // namespace fbmavg
