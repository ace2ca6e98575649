#include "fbmavg/fgn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <string>

#include <fftw3.h>

#include "fbmavg/errors.hpp"

namespace fbmavg {

// ---------------------------------------------------------------- parameters

HurstParameter::HurstParameter(double h) : h_(h) {
    if (!(h >= 0.5 && h < 1.0)) {
        throw DomainError("Hurst index must lie in [0.5, 1), got " + std::to_string(h));
    }
}

void HurstParameter::require_fractional(std::string_view who) const {
    if (classical()) {
        throw DomainError(std::string(who) + " requires H in (0.5, 1); H = 0.5 is only a Brownian cross-check");
    }
}

TimeGrid::TimeGrid(double t_end, std::size_t n_steps)
    : t_end_(t_end), n_steps_(n_steps), dt_(t_end / static_cast<double>(n_steps)) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw DomainError("time grid needs a finite t_end > 0");
    }
    if (n_steps == 0) {
        throw DomainError("time grid needs at least one step");
    }
}

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> t(n_nodes());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = node(i);
    return t;
}

FbmPath::FbmPath(TimeGrid grid, HurstParameter h, std::vector<double> values, std::size_t clipped)
    : grid_(grid), h_(h), values_(std::move(values)), clipped_(clipped) {
    if (values_.size() != grid_.n_nodes()) {
        throw DomainError("fBm path has " + std::to_string(values_.size()) + " values, grid needs " +
                          std::to_string(grid_.n_nodes()));
    }
    if (values_[0] != 0.0) {
        throw DomainError("fBm path must start at 0");
    }
}

FbmPath FbmPath::coarsen(std::size_t factor) const {
    if (factor == 0 || grid_.n_steps() % factor != 0) {
        throw DomainError("coarsening factor must divide the number of steps");
    }
    std::vector<double> v(grid_.n_steps() / factor + 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i * factor];
    return FbmPath(TimeGrid(grid_.t_end(), grid_.n_steps() / factor), h_, std::move(v), clipped_);
}

// ---------------------------------------------------------------- covariance

double fbm_covariance(double t, double s, HurstParameter h) {
    if (t < 0.0 || s < 0.0) {
        throw DomainError("fBm covariance is defined for nonnegative times");
    }
    const double e = 2.0 * h.value();
    return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double fgn_autocovariance(std::size_t n, HurstParameter h) {
    const double e = 2.0 * h.value();
    const double k = static_cast<double>(n);
    if (n == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, e) + std::pow(k - 1.0, e) - 2.0 * std::pow(k, e));
}

std::vector<double> cholesky_factor(std::span<const double> a, std::size_t n) {
    if (a.size() != n * n) {
        throw DomainError("cholesky_factor: matrix size does not match n*n");
    }
    std::vector<double> l(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
        if (!(d > 0.0)) {
            throw FactorizationError("covariance matrix is not positive definite at pivot " +
                                         std::to_string(j) + " (pivot value " + std::to_string(d) + ")",
                                     j);
        }
        const double ljj = std::sqrt(d);
        l[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            l[i * n + j] = s / ljj;
        }
    }
    return l;
}

namespace {

std::vector<double> cumulative_path(std::span<const double> increments) {
    std::vector<double> v(increments.size() + 1, 0.0);
    for (std::size_t i = 0; i < increments.size(); ++i) v[i + 1] = v[i] + increments[i];
    return v;
}

void check_noise(std::span<const double> noise, std::size_t expected, const char* who) {
    if (noise.size() != expected) {
        throw DomainError(std::string(who) + ": expected " + std::to_string(expected) +
                          " noise values, got " + std::to_string(noise.size()));
    }
}

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

// ---------------------------------------------------------------- Cholesky

CholeskyGenerator::CholeskyGenerator(TimeGrid grid, HurstParameter h) : grid_(grid), h_(h) {
    const std::size_t n = grid_.n_steps();
    const double scale = std::pow(grid_.dt(), 2.0 * h_.value());
    std::vector<double> rho(n);
    for (std::size_t k = 0; k < n; ++k) rho[k] = scale * fgn_autocovariance(k, h_);
    std::vector<double> cov(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) cov[i * n + j] = rho[i > j ? i - j : j - i];
    }
    factor_ = cholesky_factor(cov, n);
}

FbmPath CholeskyGenerator::generate(std::span<const double> noise) const {
    const std::size_t n = grid_.n_steps();
    check_noise(noise, n, "generate_cholesky");
    std::vector<double> inc(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = factor_.data() + i * n;
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += row[k] * noise[k];
        inc[i] = s;
    }
    return FbmPath(grid_, h_, cumulative_path(inc));
}

// ---------------------------------------------------------------- circulant

namespace detail {

// Out-of-place complex forward DFT of a fixed size.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) {
        std::vector<std::complex<double>> in(n), out(n);
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~FftPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void execute(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) const {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    }

private:
    fftw_plan plan_ = nullptr;
};

}  // namespace detail

struct CirculantGenerator::Plan : detail::FftPlan {
    using FftPlan::FftPlan;
};

FgnSpectrum circulant_spectrum(std::size_t n, HurstParameter h) {
    if (n == 0) throw DomainError("circulant_spectrum: n_steps must be positive");
    const std::size_t m = 2 * n;
    // First row of the circulant: rho(0..n), rho(n-1..1).
    std::vector<std::complex<double>> row(m), eig(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(k, h);
    for (std::size_t k = n + 1; k < m; ++k) row[k] = fgn_autocovariance(m - k, h);
    detail::FftPlan(m).execute(row, eig);

    FgnSpectrum spec;
    spec.eigenvalues.resize(m);
    double max_eig = 0.0;
    for (std::size_t k = 0; k < m; ++k) max_eig = std::max(max_eig, eig[k].real());
    const double tol = 1e-12 * max_eig;
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = eig[k].real();
        if (lam < -tol) {
            throw EmbeddingError("circulant embedding has eigenvalue " + std::to_string(lam) + " at index " +
                                 std::to_string(k) + "; fall back to the Cholesky generator");
        }
        if (lam < 0.0) {
            ++spec.clipped_count;
            spec.eigenvalues[k] = 0.0;
        } else {
            spec.eigenvalues[k] = lam;
        }
    }
    return spec;
}

CirculantGenerator::CirculantGenerator(TimeGrid grid, HurstParameter h)
    : grid_(grid),
      h_(h),
      spectrum_(circulant_spectrum(grid.n_steps(), h)),
      plan_(std::make_shared<const Plan>(2 * grid.n_steps())) {}

CirculantGenerator::~CirculantGenerator() = default;
CirculantGenerator::CirculantGenerator(const CirculantGenerator&) = default;
CirculantGenerator& CirculantGenerator::operator=(const CirculantGenerator&) = default;
CirculantGenerator::CirculantGenerator(CirculantGenerator&&) noexcept = default;
CirculantGenerator& CirculantGenerator::operator=(CirculantGenerator&&) noexcept = default;

FbmPath CirculantGenerator::generate(std::span<const double> noise) const {
    const std::size_t n = grid_.n_steps();
    const std::size_t m = 2 * n;
    check_noise(noise, m, "generate_circulant");
    const auto& lam = spectrum_.eigenvalues;
    const double md = static_cast<double>(m);

    std::vector<std::complex<double>> w(m), y(m);
    w[0] = std::sqrt(lam[0] / md) * noise[0];
    w[n] = std::sqrt(lam[n] / md) * noise[1];
    for (std::size_t k = 1; k < n; ++k) {
        const double a = std::sqrt(lam[k] / (2.0 * md));
        w[k] = {a * noise[2 * k], a * noise[2 * k + 1]};
        w[m - k] = std::conj(w[k]);
    }
    plan_->execute(w, y);

    const double scale = std::pow(grid_.dt(), h_.value());
    std::vector<double> inc(n);
    for (std::size_t j = 0; j < n; ++j) inc[j] = scale * y[j].real();
    return FbmPath(grid_, h_, cumulative_path(inc), spectrum_.clipped_count);
}

// ---------------------------------------------------------------- facade

std::string_view to_string(GenerationMethod m) {
    return m == GenerationMethod::cholesky ? "cholesky" : "circulant";
}

GenerationMethod parse_generation_method(std::string_view s) {
    if (s == "cholesky") return GenerationMethod::cholesky;
    if (s == "circulant") return GenerationMethod::circulant;
    throw DomainError("unknown generation method '" + std::string(s) + "'");
}

namespace {
std::variant<CholeskyGenerator, CirculantGenerator> make_generator(GenerationMethod m, TimeGrid g,
                                                                   HurstParameter h) {
    if (m == GenerationMethod::cholesky) return CholeskyGenerator(g, h);
    return CirculantGenerator(g, h);
}
}  // namespace

FbmGenerator::FbmGenerator(GenerationMethod method, TimeGrid grid, HurstParameter h)
    : impl_(make_generator(method, grid, h)) {}

GenerationMethod FbmGenerator::method() const noexcept {
    return impl_.index() == 0 ? GenerationMethod::cholesky : GenerationMethod::circulant;
}
const TimeGrid& FbmGenerator::grid() const noexcept {
    return std::visit([](const auto& g) -> const TimeGrid& { return g.grid(); }, impl_);
}
HurstParameter FbmGenerator::hurst() const noexcept {
    return std::visit([](const auto& g) { return g.hurst(); }, impl_);
}
std::size_t FbmGenerator::noise_size() const noexcept {
    return std::visit([](const auto& g) { return g.noise_size(); }, impl_);
}
FbmPath FbmGenerator::generate(std::span<const double> noise) const {
    return std::visit([&](const auto& g) { return g.generate(noise); }, impl_);
}

FbmPath generate_cholesky(const TimeGrid& grid, HurstParameter h, std::span<const double> noise) {
    return CholeskyGenerator(grid, h).generate(noise);
}

FbmPath generate_circulant(const TimeGrid& grid, HurstParameter h, std::span<const double> noise) {
    return CirculantGenerator(grid, h).generate(noise);
}

// ---------------------------------------------------------------- statistics

std::vector<double> path_increments(const FbmPath& path) {
    auto v = path.values();
    std::vector<double> inc(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) inc[i] = v[i + 1] - v[i];
    return inc;
}

MomentEstimate increment_moment(std::span<const FbmPath> paths, unsigned k, std::size_t lag) {
    if (paths.empty()) throw DomainError("increment_moment: empty ensemble");
    if (k == 0) throw DomainError("increment_moment: k must be positive");
    const TimeGrid& grid = paths.front().grid();
    if (lag == 0 || lag > grid.n_steps()) {
        throw DomainError("increment_moment: lag must satisfy 1 <= lag <= n_steps");
    }
    std::vector<double> per_path;
    per_path.reserve(paths.size());
    for (const auto& p : paths) {
        if (!(p.grid() == grid) || !(p.hurst() == paths.front().hurst())) {
            throw DomainError("increment_moment: ensemble paths must share grid and H");
        }
        auto v = p.values();
        double acc = 0.0;
        const std::size_t count = v.size() - lag;
        for (std::size_t i = 0; i < count; ++i) acc += std::pow(v[i + lag] - v[i], 2.0 * k);
        per_path.push_back(acc / static_cast<double>(count));
    }
    const double m = static_cast<double>(per_path.size());
    const double mean = std::accumulate(per_path.begin(), per_path.end(), 0.0) / m;
    double ss = 0.0;
    for (double x : per_path) ss += (x - mean) * (x - mean);
    MomentEstimate out;
    out.value = mean;
    out.paths = per_path.size();
    out.std_error = per_path.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    return out;
}

double gaussian_increment_moment(unsigned k, double tau, HurstParameter h) {
    // (2k)! / (k! 2^k) = (2k-1)!!
    double dfact = 1.0;
    for (unsigned j = 1; j <= 2 * k - 1; j += 2) dfact *= j;
    return dfact * std::pow(tau, 2.0 * h.value() * k);
}

HurstEstimate estimate_hurst(std::span<const double> series, double dt) {
    if (series.size() < 64) {
        throw DomainError("estimate_hurst needs at least 64 samples, got " + std::to_string(series.size()));
    }
    if (!(dt > 0.0)) throw DomainError("estimate_hurst: dt must be positive");
    for (double x : series) {
        if (!std::isfinite(x)) throw DomainError("estimate_hurst: series contains non-finite values");
    }
    const std::size_t n = series.size() - 1;
    const std::size_t max_lag = std::min<std::size_t>(16, n / 16);

    HurstEstimate est;
    std::vector<double> lx, ly;
    for (std::size_t m = 1; m <= max_lag; m *= 2) {
        double acc = 0.0;
        for (std::size_t i = 0; i + m <= n; ++i) {
            const double d = series[i + m] - series[i];
            acc += d * d;
        }
        const double second = acc / static_cast<double>(n + 1 - m);
        if (!(second > 0.0)) throw DomainError("estimate_hurst: series is constant");
        est.lags.push_back(m);
        lx.push_back(std::log(static_cast<double>(m) * dt));
        ly.push_back(std::log(second));
    }

    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    est.hurst = 0.5 * sxy / sxx;

    // Spread of unit increments about their mean.
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += series[i + 1] - series[i];
    mean /= static_cast<double>(n);
    double centered = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = series[i + 1] - series[i];
        sq += d * d;
        centered += (d - mean) * (d - mean);
    }
    est.degenerate = centered <= 1e-12 * sq;
    return est;
}

HurstEstimate estimate_hurst(const FbmPath& path) {
    return estimate_hurst(path.values(), path.grid().dt());
}

}  // namespace fbmavg
