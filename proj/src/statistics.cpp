#include "fbmavg/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "fbmavg/errors.hpp"

namespace fbmavg {

namespace {
constexpr double kZ95 = 1.959963984540054;
}

MeanEstimate mean_estimate(std::span<const double> x) {
    MeanEstimate m;
    m.count = x.size();
    if (x.empty()) return m;
    double s = 0.0;
    for (double v : x) s += v;
    m.mean = s / static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - m.mean) * (v - m.mean);
        const double n = static_cast<double>(x.size());
        m.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return m;
}

Interval normal_interval(const MeanEstimate& m) {
    return {m.mean - kZ95 * m.std_error, m.mean + kZ95 * m.std_error};
}

Interval wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw DomainError("wilson_interval: no trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // Clamp so the interval always contains p despite rounding at p = 0 or 1.
    return {std::min(p, std::max(0.0, centre - half)), std::max(p, std::min(1.0, centre + half))};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return 1.628 * std::sqrt((a + b) / (a * b));
}

}  // namespace fbmavg
