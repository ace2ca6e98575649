#pragma once

// Time averaging of drift and diffusion coefficients and the averaged
// (autonomous) system that replaces the original one.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbmavg/integrator.hpp"
#include "fbmavg/quadrature.hpp"

namespace fbmavg {

/// How sigma-bar is formed from sigma(s, y) over the window:
///   mean  (1/T1) int sigma ds
///   rms   sign(mean) * sqrt((1/T1) int sigma^2 ds), entrywise
enum class DiffusionMode { mean, rms };

std::string_view to_string(DiffusionMode m);
DiffusionMode parse_diffusion_mode(std::string_view s);

/// (1/T1) int_0^T1 b(s, y) ds.
Vector time_average_drift(const DriftFn& drift, double window, std::span<const double> y,
                          const QuadratureOptions& options = {});

/// Entrywise mean or RMS of sigma(s, y) over [0, T1], see DiffusionMode.
Matrix rms_average_diffusion(const DiffusionFn& diffusion, double window, std::span<const double> y,
                             DiffusionMode mode, const QuadratureOptions& options = {});

enum class Provenance { analytic, quadrature };

std::string_view to_string(Provenance p);

/// A closed-form value quoted for a worked example, kept next to the computed
/// one so the two can be compared. Never used in the solver.
struct StatedValue {
    std::string name;
    double stated = 0.0;
    double computed = 0.0;
};

using AveragedDriftFn = std::function<Vector(std::span<const double> y)>;
using AveragedDiffusionFn = std::function<Matrix(std::span<const double> y)>;

/// Autonomous coefficients b-bar(y), sigma-bar(y) for a time-dependent system.
class AveragedSystem {
public:
    AveragedSystem(SdeSystem base, double window, AveragedDriftFn b_bar, AveragedDiffusionFn sigma_bar,
                   Provenance provenance, DiffusionMode mode);

    const SdeSystem& base() const noexcept { return base_; }
    double window() const noexcept { return window_; }
    Provenance provenance() const noexcept { return provenance_; }
    DiffusionMode mode() const noexcept { return mode_; }

    Vector b_bar(std::span<const double> y) const { return b_bar_(y); }
    Matrix sigma_bar(std::span<const double> y) const { return sigma_bar_(y); }

    const std::vector<StatedValue>& stated_values() const noexcept { return stated_; }
    void add_stated_value(StatedValue v) { stated_.push_back(std::move(v)); }

    /// The averaged SDE, with the base system's H, eps and eps_0.
    SdeSystem as_system() const;
    SdeSystem as_system(double epsilon) const;

private:
    SdeSystem base_;
    double window_;
    AveragedDriftFn b_bar_;
    AveragedDiffusionFn sigma_bar_;
    Provenance provenance_;
    DiffusionMode mode_;
    std::vector<StatedValue> stated_;
};

/// Averages `system` over [0, window] by quadrature, memoizing per state
/// point. The cache is shared by copies and safe under concurrent use.
///
/// A system declared time-homogeneous is returned as-is (provenance
/// analytic): its coefficients are their own averages.
AveragedSystem build_averaged_system(const SdeSystem& system, double window, DiffusionMode mode);

/// Wraps user-supplied closed forms (provenance analytic).
AveragedSystem averaged_from_closed_form(const SdeSystem& system, double window, AveragedDriftFn b_bar,
                                         AveragedDiffusionFn sigma_bar, DiffusionMode mode);

/// phi_1(T1) = max_y (1/T1) int |b(s,y) - b_bar(y)| ds / (1 + |y|)
/// phi_2(T1) = max_y (1/T1) int |sigma(s,y) - sigma_bar(y)|^2 ds / (1 + |y|^2)
/// Descriptive only: finite windows cannot establish phi_i -> 0.
struct ConditionReport {
    std::vector<double> windows;
    std::vector<double> phi1;
    std::vector<double> phi2;
    std::vector<Vector> state_box;
    /// Whether the last three samples of phi_1 / phi_2 are non-increasing.
    bool decreasing_tail1 = false;
    bool decreasing_tail2 = false;
};

ConditionReport check_conditions(const SdeSystem& system, const AveragedSystem& averaged,
                                 std::span<const double> windows, std::span<const Vector> state_box);

}  // namespace fbmavg
