#include "fbmavg/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "fbmavg/errors.hpp"

namespace fbmavg {

std::string_view to_string(DiffusionMode m) { return m == DiffusionMode::mean ? "mean" : "rms"; }

DiffusionMode parse_diffusion_mode(std::string_view s) {
    if (s == "mean") return DiffusionMode::mean;
    if (s == "rms") return DiffusionMode::rms;
    throw DomainError("unknown diffusion averaging mode '" + std::string(s) + "'");
}

std::string_view to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "quadrature"; }

namespace {

void check_window(double window) {
    if (!(window > 0.0) || !std::isfinite(window)) throw DomainError("averaging window must be finite and > 0");
}

}  // namespace

Vector time_average_drift(const DriftFn& drift, double window, std::span<const double> y,
                          const QuadratureOptions& options) {
    check_window(window);
    const Vector state(y.begin(), y.end());
    auto r = integrate_simpson([&](double s) { return drift(s, state); }, 0.0, window, options);
    for (double& v : r.value) v /= window;
    return r.value;
}

Matrix rms_average_diffusion(const DiffusionFn& diffusion, double window, std::span<const double> y,
                             DiffusionMode mode, const QuadratureOptions& options) {
    check_window(window);
    const Vector state(y.begin(), y.end());
    const Matrix probe = diffusion(0.0, state);
    const std::size_t rows = probe.rows(), cols = probe.cols(), n = rows * cols;

    // Integrate sigma and sigma^2 together.
    auto r = integrate_simpson(
        [&](double s) {
            const Matrix m = diffusion(s, state);
            if (m.rows() != rows || m.cols() != cols) throw DomainError("diffusion changed shape over the window");
            std::vector<double> v(2 * n);
            auto d = m.data();
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = d[i];
                v[n + i] = d[i] * d[i];
            }
            return v;
        },
        0.0, window, options);

    Matrix out(rows, cols);
    auto od = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = r.value[i] / window;
        if (mode == DiffusionMode::mean) {
            od[i] = mean;
        } else {
            const double rms = std::sqrt(std::max(0.0, r.value[n + i] / window));
            od[i] = mean < 0.0 ? -rms : rms;
        }
    }
    return out;
}

// ---------------------------------------------------------------- AveragedSystem

AveragedSystem::AveragedSystem(SdeSystem base, double window, AveragedDriftFn b_bar,
                               AveragedDiffusionFn sigma_bar, Provenance provenance, DiffusionMode mode)
    : base_(std::move(base)),
      window_(window),
      b_bar_(std::move(b_bar)),
      sigma_bar_(std::move(sigma_bar)),
      provenance_(provenance),
      mode_(mode) {
    check_window(window_);
    if (!b_bar_ || !sigma_bar_) throw DomainError("averaged system needs both coefficients");
}

SdeSystem AveragedSystem::as_system() const { return as_system(base_.epsilon()); }

SdeSystem AveragedSystem::as_system(double epsilon) const {
    DriftFn b = [f = b_bar_](double, std::span<const double> x) { return f(x); };
    DiffusionFn s = [f = sigma_bar_](double, std::span<const double> x) { return f(x); };
    return SdeSystem(base_.dim_state(), base_.dim_noise(), std::move(b), std::move(s), base_.hurst(), epsilon,
                     base_.epsilon_0(), true);
}

namespace {

struct StateHash {
    std::size_t operator()(const std::vector<double>& v) const noexcept {
        return std::hash<std::string_view>{}(
            std::string_view(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)));
    }
};

// Bit-pattern keyed memo. Values are deterministic, so racing first writes
// are harmless; insertion stops once the cache is full.
template <class Value>
class MemoCache {
public:
    static constexpr std::size_t kCapacity = std::size_t{1} << 16;

    std::optional<Value> find(const std::vector<double>& key) const {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void insert(const std::vector<double>& key, const Value& value) {
        std::unique_lock lock(mutex_);
        if (map_.size() < kCapacity) map_.insert_or_assign(key, value);
    }

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::vector<double>, Value, StateHash> map_;
};

}  // namespace

AveragedSystem build_averaged_system(const SdeSystem& system, double window, DiffusionMode mode) {
    check_window(window);
    if (system.time_homogeneous()) {
        AveragedDriftFn b = [f = system.drift_fn()](std::span<const double> y) { return f(0.0, y); };
        AveragedDiffusionFn s = [f = system.diffusion_fn()](std::span<const double> y) { return f(0.0, y); };
        return AveragedSystem(system, window, std::move(b), std::move(s), Provenance::analytic, mode);
    }

    auto drift_cache = std::make_shared<MemoCache<Vector>>();
    auto diffusion_cache = std::make_shared<MemoCache<Matrix>>();
    AveragedDriftFn b = [f = system.drift_fn(), window, drift_cache](std::span<const double> y) {
        std::vector<double> key(y.begin(), y.end());
        if (auto hit = drift_cache->find(key)) return *hit;
        Vector v = time_average_drift(f, window, y);
        drift_cache->insert(key, v);
        return v;
    };
    AveragedDiffusionFn s = [f = system.diffusion_fn(), window, mode, diffusion_cache](std::span<const double> y) {
        std::vector<double> key(y.begin(), y.end());
        if (auto hit = diffusion_cache->find(key)) return *hit;
        Matrix m = rms_average_diffusion(f, window, y, mode);
        diffusion_cache->insert(key, m);
        return m;
    };
    return AveragedSystem(system, window, std::move(b), std::move(s), Provenance::quadrature, mode);
}

AveragedSystem averaged_from_closed_form(const SdeSystem& system, double window, AveragedDriftFn b_bar,
                                         AveragedDiffusionFn sigma_bar, DiffusionMode mode) {
    return AveragedSystem(system, window, std::move(b_bar), std::move(sigma_bar), Provenance::analytic, mode);
}

// ---------------------------------------------------------------- conditions

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

bool non_increasing_tail(const std::vector<double>& phi) {
    if (phi.size() < 2) return false;
    const std::size_t start = phi.size() >= 3 ? phi.size() - 3 : 0;
    for (std::size_t i = start + 1; i < phi.size(); ++i) {
        const double slack = 1e-9 * std::max(std::abs(phi[i - 1]), std::abs(phi[i]));
        if (phi[i] > phi[i - 1] + slack) return false;
    }
    return true;
}

}  // namespace

ConditionReport check_conditions(const SdeSystem& system, const AveragedSystem& averaged,
                                 std::span<const double> windows, std::span<const Vector> state_box) {
    if (windows.empty() || state_box.empty()) throw DomainError("check_conditions needs windows and states");
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (!(windows[i] > windows[i - 1])) throw DomainError("check_conditions: windows must be increasing");
    }
    // |b - b_bar| has kinks where the deviation changes sign; Simpson still
    // converges, just more slowly, so the tolerance is looser here.
    QuadratureOptions opts;
    opts.rel_tol = 1e-7;
    opts.max_panels = std::size_t{1} << 22;

    ConditionReport rep;
    rep.windows.assign(windows.begin(), windows.end());
    rep.state_box.assign(state_box.begin(), state_box.end());
    for (double w : windows) {
        check_window(w);
        double phi1 = 0.0, phi2 = 0.0;
        for (const Vector& y : state_box) {
            const Vector bb = averaged.b_bar(y);
            const Matrix sb = averaged.sigma_bar(y);
            auto r = integrate_simpson(
                [&](double s) {
                    const Vector b = system.drift(s, y);
                    const Matrix sig = system.diffusion(s, y);
                    Vector db(b.size());
                    for (std::size_t i = 0; i < b.size(); ++i) db[i] = b[i] - bb[i];
                    Vector ds(sig.data().size());
                    for (std::size_t i = 0; i < ds.size(); ++i) ds[i] = sig.data()[i] - sb.data()[i];
                    return std::vector<double>{std::sqrt(norm2(db)), norm2(ds)};
                },
                0.0, w, opts);
            const double y2 = norm2(y);
            phi1 = std::max(phi1, std::max(0.0, r.value[0] / w) / (1.0 + std::sqrt(y2)));
            phi2 = std::max(phi2, std::max(0.0, r.value[1] / w) / (1.0 + y2));
        }
        rep.phi1.push_back(phi1);
        rep.phi2.push_back(phi2);
    }
    rep.decreasing_tail1 = non_increasing_tail(rep.phi1);
    rep.decreasing_tail2 = non_increasing_tail(rep.phi2);
    return rep;
}

}  // namespace fbmavg
