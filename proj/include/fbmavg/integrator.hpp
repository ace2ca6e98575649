#pragma once

// Discrete pathwise integrals against sampled fBm and an Euler-type solver for
//
//   dX = eps^{2H} b(t, X) dt + eps^H sigma(t, X) dB^H(t)
//
// with the stochastic integral read in the forward, backward or symmetric sense.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fbmavg/fgn.hpp"

namespace fbmavg {

enum class IntegralKind { forward, backward, symmetric };

std::string_view to_string(IntegralKind k);
IntegralKind parse_integral_kind(std::string_view s);

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using DriftFn = std::function<Vector(double t, std::span<const double> x)>;
using DiffusionFn = std::function<Matrix(double t, std::span<const double> x)>;

/// Coefficients and scaling of an eps-scaled fBm-driven SDE.
///
/// Drift is multiplied by eps^{2H} and diffusion by eps^H; those are the only
/// places the scale enters. Regularity of the user-supplied coefficients
/// (Lipschitz, growth) is a contract, see spot_check_coefficients().
class SdeSystem {
public:
    SdeSystem(std::size_t dim_state, std::size_t dim_noise, DriftFn drift, DiffusionFn diffusion,
              HurstParameter h, double epsilon, double epsilon_0 = 1.0, bool time_homogeneous = false);

    std::size_t dim_state() const noexcept { return dim_state_; }
    std::size_t dim_noise() const noexcept { return dim_noise_; }
    HurstParameter hurst() const noexcept { return h_; }
    double epsilon() const noexcept { return epsilon_; }
    double epsilon_0() const noexcept { return epsilon_0_; }
    /// True when b and sigma were declared independent of t.
    bool time_homogeneous() const noexcept { return time_homogeneous_; }

    double drift_scale() const noexcept { return drift_scale_; }
    double diffusion_scale() const noexcept { return diffusion_scale_; }

    /// Unscaled coefficients b(t, x), sigma(t, x) with dimension checks.
    Vector drift(double t, std::span<const double> x) const;
    Matrix diffusion(double t, std::span<const double> x) const;

    /// eps^{2H} b(t, x) and eps^H sigma(t, x).
    Vector scaled_drift(double t, std::span<const double> x) const;
    Matrix scaled_diffusion(double t, std::span<const double> x) const;

    const DriftFn& drift_fn() const noexcept { return drift_; }
    const DiffusionFn& diffusion_fn() const noexcept { return diffusion_; }

    SdeSystem with_epsilon(double epsilon) const;

    /// Equivalent system with eps = 1 and the scales folded into b and sigma.
    SdeSystem with_scales_folded() const;

private:
    std::size_t dim_state_;
    std::size_t dim_noise_;
    DriftFn drift_;
    DiffusionFn diffusion_;
    HurstParameter h_;
    double epsilon_;
    double epsilon_0_;
    bool time_homogeneous_;
    double drift_scale_;
    double diffusion_scale_;
};

/// Solution sampled on a grid; states are row-major (n_steps + 1) x d.
class Trajectory {
public:
    Trajectory(TimeGrid grid, std::size_t dim);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<double> state(std::size_t i) noexcept { return {states_.data() + i * dim_, dim_}; }
    std::span<const double> state(std::size_t i) const noexcept { return {states_.data() + i * dim_, dim_}; }
    /// Component `c` of the state at node i.
    double at(std::size_t i, std::size_t c = 0) const noexcept { return states_[i * dim_ + c]; }
    std::span<const double> states() const noexcept { return states_; }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> states_;
};

/// Riemann-sum analogue of the pathwise integral of u against the path:
///   forward   sum u(t_i) dB_i
///   backward  sum u(t_{i+1}) dB_i
///   symmetric sum (u(t_i) + u(t_{i+1})) / 2 dB_i
/// `u` holds n_steps + 1 samples on the path's grid.
double pathwise_integral(std::span<const double> u, const FbmPath& path, IntegralKind kind);

/// Euler-type solver; one fBm path per noise column.
///
///   forward:   x+ = x + b(t_i, x) dt + S(t_i, x) dB
///   symmetric: Heun. x* from the forward step, then the trapezoidal average of
///              b and S between (t_i, x) and (t_{i+1}, x*)
///   backward:  drift at (t_i, x), diffusion at (t_{i+1}, x*)
///
/// where b, S are the eps-scaled coefficients. Throws DivergenceError with the
/// step index if the state becomes non-finite.
Trajectory euler_solve(const SdeSystem& system, std::span<const double> x0, std::span<const FbmPath> paths,
                       IntegralKind kind);

/// Grid solution of dz = -eps^{2H} lambda z dt + eps^H dB^H:
///   z(t_i) = e^{-a lambda t_i} x0 + c sum_{j<i} e^{-a lambda (t_i - t_{j+1/2})} dB_j
/// with a = eps^{2H}, c = eps^H (midpoint-weighted noise convolution).
Trajectory ou_exact_solution(double lambda, double epsilon, HurstParameter h, double x0, const FbmPath& path);

/// E[(int_0^T f dB^H)^2] = int int f(t) f(s) H(2H-1)|t-s|^{2H-2} ds dt for
/// deterministic f. f is sampled at cell midpoints and the kernel is
/// integrated exactly over each pair of cells, which removes the diagonal
/// singularity. Rejects H = 1/2.
double second_moment_deterministic(const std::function<double(double)>& f, const TimeGrid& grid, HurstParameter h);

/// H T^{2H-1}
double lemma_constant(HurstParameter h, double t_end);

/// Sampled evidence for the Lipschitz and linear-growth contracts on the box
/// [0, t_end] x [lo, hi]^d. Estimates only; it cannot prove the conditions.
struct RegularityReport {
    bool finite = true;
    double drift_lipschitz = 0.0;      // max |b(t,x)-b(t,y)| / |x-y|
    double diffusion_lipschitz = 0.0;  // max |S(t,x)-S(t,y)| / |x-y|
    double drift_growth = 0.0;         // max |b(t,x)| / (1 + |x|)
    double diffusion_growth = 0.0;     // max |S(t,x)| / (1 + |x|)
    std::size_t samples = 0;
};

RegularityReport spot_check_coefficients(const SdeSystem& system, double t_end, double lo, double hi,
                                         std::size_t samples = 256, std::uint64_t seed = 0x5eed);

}  // namespace fbmavg
