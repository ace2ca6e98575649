#include "fbmavg/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fbmavg/errors.hpp"

namespace fbmavg {

std::string_view to_string(IntegralKind k) {
    switch (k) {
        case IntegralKind::forward: return "forward";
        case IntegralKind::backward: return "backward";
        case IntegralKind::symmetric: return "symmetric";
    }
    return "symmetric";
}

IntegralKind parse_integral_kind(std::string_view s) {
    if (s == "forward") return IntegralKind::forward;
    if (s == "backward") return IntegralKind::backward;
    if (s == "symmetric") return IntegralKind::symmetric;
    throw DomainError("unknown integral kind '" + std::string(s) + "'");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw DomainError("matrix data size does not match its shape");
}

// ---------------------------------------------------------------- SdeSystem

SdeSystem::SdeSystem(std::size_t dim_state, std::size_t dim_noise, DriftFn drift, DiffusionFn diffusion,
                     HurstParameter h, double epsilon, double epsilon_0, bool time_homogeneous)
    : dim_state_(dim_state),
      dim_noise_(dim_noise),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      h_(h),
      epsilon_(epsilon),
      epsilon_0_(epsilon_0),
      time_homogeneous_(time_homogeneous),
      drift_scale_(std::pow(epsilon, 2.0 * h.value())),
      diffusion_scale_(std::pow(epsilon, h.value())) {
    h_.require_fractional("SdeSystem");
    if (dim_state_ == 0 || dim_noise_ == 0) throw DomainError("SdeSystem dimensions must be positive");
    if (!drift_ || !diffusion_) throw DomainError("SdeSystem needs both drift and diffusion");
    if (!(epsilon > 0.0) || !(epsilon <= epsilon_0)) {
        throw DomainError("epsilon must lie in (0, epsilon_0], got " + std::to_string(epsilon));
    }
}

Vector SdeSystem::drift(double t, std::span<const double> x) const {
    Vector b = drift_(t, x);
    if (b.size() != dim_state_) throw DomainError("drift returned a vector of the wrong dimension");
    return b;
}

Matrix SdeSystem::diffusion(double t, std::span<const double> x) const {
    Matrix s = diffusion_(t, x);
    if (s.rows() != dim_state_ || s.cols() != dim_noise_) {
        throw DomainError("diffusion returned a matrix of the wrong shape");
    }
    return s;
}

Vector SdeSystem::scaled_drift(double t, std::span<const double> x) const {
    Vector b = drift(t, x);
    for (double& v : b) v = drift_scale_ * v;
    return b;
}

Matrix SdeSystem::scaled_diffusion(double t, std::span<const double> x) const {
    Matrix s = diffusion(t, x);
    for (double& v : s.data()) v = diffusion_scale_ * v;
    return s;
}

SdeSystem SdeSystem::with_epsilon(double epsilon) const {
    return SdeSystem(dim_state_, dim_noise_, drift_, diffusion_, h_, epsilon, epsilon_0_, time_homogeneous_);
}

SdeSystem SdeSystem::with_scales_folded() const {
    DriftFn b = [drift = drift_, s = drift_scale_](double t, std::span<const double> x) {
        Vector v = drift(t, x);
        for (double& e : v) e = s * e;
        return v;
    };
    DiffusionFn sig = [diffusion = diffusion_, s = diffusion_scale_](double t, std::span<const double> x) {
        Matrix m = diffusion(t, x);
        for (double& e : m.data()) e = s * e;
        return m;
    };
    return SdeSystem(dim_state_, dim_noise_, std::move(b), std::move(sig), h_, 1.0, std::max(1.0, epsilon_0_),
                     time_homogeneous_);
}

Trajectory::Trajectory(TimeGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim), states_(grid.n_nodes() * dim, 0.0) {}

// ---------------------------------------------------------------- integrals

double pathwise_integral(std::span<const double> u, const FbmPath& path, IntegralKind kind) {
    const std::size_t n = path.grid().n_steps();
    if (u.size() != n + 1) {
        throw DomainError("pathwise_integral: integrand has " + std::to_string(u.size()) + " samples, grid has " +
                          std::to_string(n + 1) + " nodes");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double db = path[i + 1] - path[i];
        switch (kind) {
            case IntegralKind::forward: acc += u[i] * db; break;
            case IntegralKind::backward: acc += u[i + 1] * db; break;
            case IntegralKind::symmetric: acc += 0.5 * (u[i] + u[i + 1]) * db; break;
        }
    }
    return acc;
}

namespace {

// x + b dt + S dB, the single update shared by every scheme.
void advance(std::span<const double> x, const Vector& b, const Matrix& s, double dt,
             std::span<const double> db, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        double noise = 0.0;
        for (std::size_t j = 0; j < db.size(); ++j) noise += s(i, j) * db[j];
        out[i] = x[i] + b[i] * dt + noise;
    }
}

Vector midpoint(const Vector& a, const Vector& b) {
    Vector m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
    return m;
}

Matrix midpoint(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows(), a.cols());
    auto ad = a.data();
    auto bd = b.data();
    auto md = m.data();
    for (std::size_t i = 0; i < md.size(); ++i) md[i] = 0.5 * (ad[i] + bd[i]);
    return m;
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

Trajectory euler_solve(const SdeSystem& system, std::span<const double> x0, std::span<const FbmPath> paths,
                       IntegralKind kind) {
    const std::size_t d = system.dim_state();
    const std::size_t m = system.dim_noise();
    if (x0.size() != d) throw DomainError("euler_solve: initial condition has the wrong dimension");
    if (paths.size() != m) throw DomainError("euler_solve: need one fBm path per noise column");
    if (!all_finite(x0)) throw DomainError("euler_solve: initial condition is not finite");
    const TimeGrid grid = paths.front().grid();
    for (const auto& p : paths) {
        if (!(p.grid() == grid)) throw DomainError("euler_solve: noise paths must share one grid");
    }

    Trajectory traj(grid, d);
    std::copy(x0.begin(), x0.end(), traj.state(0).begin());
    const double dt = grid.dt();
    Vector db(m);
    Vector predicted(d);

    for (std::size_t i = 0; i < grid.n_steps(); ++i) {
        const double t0 = grid.node(i);
        const double t1 = grid.node(i + 1);
        for (std::size_t j = 0; j < m; ++j) db[j] = paths[j][i + 1] - paths[j][i];
        auto x = traj.state(i);
        auto next = traj.state(i + 1);

        const Vector b0 = system.scaled_drift(t0, x);
        const Matrix s0 = system.scaled_diffusion(t0, x);
        if (kind == IntegralKind::forward) {
            advance(x, b0, s0, dt, db, next);
        } else {
            advance(x, b0, s0, dt, db, predicted);
            if (!all_finite(predicted)) {
                throw DivergenceError("euler_solve: predictor became non-finite at step " + std::to_string(i + 1),
                                      i + 1);
            }
            const Matrix s1 = system.scaled_diffusion(t1, predicted);
            if (kind == IntegralKind::symmetric) {
                const Vector b1 = system.scaled_drift(t1, predicted);
                advance(x, midpoint(b0, b1), midpoint(s0, s1), dt, db, next);
            } else {
                advance(x, b0, s1, dt, db, next);
            }
        }
        if (!all_finite(next)) {
            throw DivergenceError("euler_solve: state became non-finite at step " + std::to_string(i + 1), i + 1);
        }
    }
    return traj;
}

Trajectory ou_exact_solution(double lambda, double epsilon, HurstParameter h, double x0, const FbmPath& path) {
    if (!(epsilon > 0.0)) throw DomainError("ou_exact_solution: epsilon must be positive");
    const TimeGrid& grid = path.grid();
    const double a = std::pow(epsilon, 2.0 * h.value());
    const double c = std::pow(epsilon, h.value());
    const double dt = grid.dt();
    const double step_decay = std::exp(-a * lambda * dt);
    const double half_decay = std::exp(-a * lambda * 0.5 * dt);

    Trajectory traj(grid, 1);
    traj.state(0)[0] = x0;
    // conv_i = sum_{j<i} e^{-a lambda (t_i - t_{j+1/2})} dB_j, built recursively.
    double conv = 0.0;
    for (std::size_t i = 0; i < grid.n_steps(); ++i) {
        conv = step_decay * conv + half_decay * (path[i + 1] - path[i]);
        const double t = grid.node(i + 1);
        traj.state(i + 1)[0] = std::exp(-a * lambda * t) * x0 + c * conv;
    }
    return traj;
}

double second_moment_deterministic(const std::function<double(double)>& f, const TimeGrid& grid,
                                   HurstParameter h) {
    h.require_fractional("second_moment_deterministic");
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    std::vector<double> fm(n);
    for (std::size_t i = 0; i < n; ++i) {
        fm[i] = f((static_cast<double>(i) + 0.5) * dt);
        if (!std::isfinite(fm[i])) throw DomainError("second_moment_deterministic: integrand is not finite");
    }
    // Exact double integral of the kernel over cells i, j depends on |i - j|
    // only and equals dt^{2H} times the unit-lag fGn autocovariance.
    const double scale = std::pow(dt, 2.0 * h.value());
    std::vector<double> kernel(n);
    for (std::size_t k = 0; k < n; ++k) kernel[k] = scale * fgn_autocovariance(k, h);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = kernel[0] * fm[i];
        for (std::size_t j = 0; j < i; ++j) row += 2.0 * kernel[i - j] * fm[j];
        total += fm[i] * row;
    }
    return total;
}

double lemma_constant(HurstParameter h, double t_end) {
    return h.value() * std::pow(t_end, 2.0 * h.value() - 1.0);
}

namespace {
double frobenius(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) s += (ad[i] - bd[i]) * (ad[i] - bd[i]);
    return std::sqrt(s);
}
double euclid(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}
}  // namespace

RegularityReport spot_check_coefficients(const SdeSystem& system, double t_end, double lo, double hi,
                                         std::size_t samples, std::uint64_t seed) {
    if (!(hi > lo)) throw DomainError("spot_check_coefficients: empty state box");
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> ut(0.0, t_end), ux(lo, hi);
    const std::size_t d = system.dim_state();
    const Matrix zero(d, system.dim_noise(), 0.0);

    RegularityReport rep;
    rep.samples = samples;
    Vector x(d), y(d), diff(d);
    for (std::size_t s = 0; s < samples; ++s) {
        const double t = ut(engine);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = ux(engine);
            y[i] = ux(engine);
            diff[i] = x[i] - y[i];
        }
        const Vector bx = system.drift(t, x), by = system.drift(t, y);
        const Matrix sx = system.diffusion(t, x), sy = system.diffusion(t, y);
        if (!all_finite(bx) || !all_finite(by) || !all_finite(sx.data()) || !all_finite(sy.data())) {
            rep.finite = false;
            continue;
        }
        Vector db(d);
        for (std::size_t i = 0; i < d; ++i) db[i] = bx[i] - by[i];
        const double dist = euclid(diff);
        if (dist > 0.0) {
            rep.drift_lipschitz = std::max(rep.drift_lipschitz, euclid(db) / dist);
            rep.diffusion_lipschitz = std::max(rep.diffusion_lipschitz, frobenius(sx, sy) / dist);
        }
        rep.drift_growth = std::max(rep.drift_growth, euclid(bx) / (1.0 + euclid(x)));
        rep.diffusion_growth = std::max(rep.diffusion_growth, frobenius(sx, zero) / (1.0 + euclid(x)));
    }
    return rep;
}

}  // namespace fbmavg
