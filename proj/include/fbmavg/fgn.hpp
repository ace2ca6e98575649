#pragma once

// Fractional Brownian motion: covariance structure, exact path generators and
// the statistical diagnostics used to validate them.

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace fbmavg {

/// Hurst index of the driving noise, restricted to [1/2, 1).
///
/// H = 1/2 (ordinary Brownian motion) is accepted so generators can be
/// cross-checked against a random walk; anything that depends on the
/// long-memory kernel calls require_fractional() and rejects it.
class HurstParameter {
public:
    explicit HurstParameter(double h);

    double value() const noexcept { return h_; }
    bool classical() const noexcept { return h_ == 0.5; }

    /// Throws DomainError naming `who` when H = 1/2.
    void require_fractional(std::string_view who) const;

    friend bool operator==(const HurstParameter&, const HurstParameter&) = default;

private:
    double h_;
};

/// Uniform grid t_i = i * t_end / n_steps on [0, t_end].
class TimeGrid {
public:
    TimeGrid(double t_end, std::size_t n_steps);

    double t_end() const noexcept { return t_end_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return dt_; }
    double node(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }
    std::vector<double> nodes() const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_end_;
    std::size_t n_steps_;
    double dt_;
};

/// A sampled fBm trajectory; values[0] is always 0.
class FbmPath {
public:
    FbmPath(TimeGrid grid, HurstParameter h, std::vector<double> values,
            std::size_t clipped_eigenvalues = 0);

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstParameter hurst() const noexcept { return h_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Number of slightly negative circulant eigenvalues clipped to zero while
    /// generating this path (always 0 for the Cholesky generator).
    std::size_t clipped_eigenvalues() const noexcept { return clipped_; }

    /// Subsample every `factor`-th node; the grid must divide evenly.
    FbmPath coarsen(std::size_t factor) const;

private:
    TimeGrid grid_;
    HurstParameter h_;
    std::vector<double> values_;
    std::size_t clipped_;
};

/// Eigenvalues of the circulant embedding of the unit-lag fGn covariance.
struct FgnSpectrum {
    std::vector<double> eigenvalues;  // all >= 0 after clipping
    std::size_t clipped_count = 0;
};

/// E[B(t) B(s)] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double t, double s, HurstParameter h);

/// Autocovariance of unit-step fractional Gaussian noise at lag n:
/// ((n+1)^{2H} + |n-1|^{2H} - 2 n^{2H}) / 2.
double fgn_autocovariance(std::size_t n, HurstParameter h);

/// Lower Cholesky factor of a symmetric positive definite row-major n x n
/// matrix. Throws FactorizationError carrying the failing pivot index.
std::vector<double> cholesky_factor(std::span<const double> matrix, std::size_t n);

/// Exact generator: Cholesky factor of the n x n increment covariance.
/// O(n^2) per path after an O(n^3) setup.
class CholeskyGenerator {
public:
    CholeskyGenerator(TimeGrid grid, HurstParameter h);

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstParameter hurst() const noexcept { return h_; }
    std::size_t noise_size() const noexcept { return grid_.n_steps(); }
    /// Row-major lower factor of the increment covariance (Delta t scaling included).
    std::span<const double> factor() const noexcept { return factor_; }

    FbmPath generate(std::span<const double> noise) const;

private:
    TimeGrid grid_;
    HurstParameter h_;
    std::vector<double> factor_;
};

/// Computes the circulant embedding spectrum of size 2n for unit-lag fGn.
/// Eigenvalues in [-tol, 0) with tol = 1e-12 * max eigenvalue are clipped to
/// zero; anything more negative raises EmbeddingError.
FgnSpectrum circulant_spectrum(std::size_t n_steps, HurstParameter h);

/// Exact O(n log n) generator by circulant embedding (Davies-Harte).
///
/// Consumes 2 * n_steps standard normals: noise[0] drives frequency 0,
/// noise[1] the Nyquist frequency n, and (noise[2k], noise[2k+1]) the real
/// and imaginary parts at frequency k for 1 <= k < n.
class CirculantGenerator {
public:
    CirculantGenerator(TimeGrid grid, HurstParameter h);
    ~CirculantGenerator();
    CirculantGenerator(const CirculantGenerator&);
    CirculantGenerator& operator=(const CirculantGenerator&);
    CirculantGenerator(CirculantGenerator&&) noexcept;
    CirculantGenerator& operator=(CirculantGenerator&&) noexcept;

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstParameter hurst() const noexcept { return h_; }
    std::size_t noise_size() const noexcept { return 2 * grid_.n_steps(); }
    const FgnSpectrum& spectrum() const noexcept { return spectrum_; }

    FbmPath generate(std::span<const double> noise) const;

private:
    struct Plan;

    TimeGrid grid_;
    HurstParameter h_;
    FgnSpectrum spectrum_;
    std::shared_ptr<const Plan> plan_;
};

enum class GenerationMethod { cholesky, circulant };

std::string_view to_string(GenerationMethod m);
GenerationMethod parse_generation_method(std::string_view s);

/// Either generator behind one interface.
class FbmGenerator {
public:
    FbmGenerator(GenerationMethod method, TimeGrid grid, HurstParameter h);

    GenerationMethod method() const noexcept;
    const TimeGrid& grid() const noexcept;
    HurstParameter hurst() const noexcept;
    std::size_t noise_size() const noexcept;
    FbmPath generate(std::span<const double> noise) const;

private:
    std::variant<CholeskyGenerator, CirculantGenerator> impl_;
};

FbmPath generate_cholesky(const TimeGrid& grid, HurstParameter h, std::span<const double> noise);
FbmPath generate_circulant(const TimeGrid& grid, HurstParameter h, std::span<const double> noise);

/// values[i+1] - values[i], length n_steps.
std::vector<double> path_increments(const FbmPath& path);

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

/// Empirical E[(B(t + lag dt) - B(t))^{2k}].
///
/// Each path contributes the average over all of its lag-increments; the
/// standard error is taken across paths, which are independent.
MomentEstimate increment_moment(std::span<const FbmPath> paths, unsigned k, std::size_t lag);

/// (2k)! / (k! 2^k) * tau^{2Hk}.
double gaussian_increment_moment(unsigned k, double tau, HurstParameter h);

struct HurstEstimate {
    double hurst = 0.0;
    /// Set when the increments have (numerically) zero spread about their
    /// mean, e.g. a deterministic straight line. The slope is still reported.
    bool degenerate = false;
    std::vector<std::size_t> lags;
};

/// Aggregated-variance estimator: regresses log E[(X(t+m dt) - X(t))^2] on
/// log(m dt) over dyadic lags m = 1, 2, 4, ... <= min(16, (len-1)/16); the
/// slope is 2H. Requires at least 64 samples, all finite.
HurstEstimate estimate_hurst(std::span<const double> series, double dt);
HurstEstimate estimate_hurst(const FbmPath& path);

}  // namespace fbmavg
