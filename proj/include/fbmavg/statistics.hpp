#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fbmavg {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Sample mean and standard error of the mean (n - 1 denominator).
struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

MeanEstimate mean_estimate(std::span<const double> x);

/// Normal-approximation 95% interval mean +- 1.96 SE.
Interval normal_interval(const MeanEstimate& m);

/// Wilson score 95% interval for `successes` out of `trials`.
Interval wilson_interval(std::size_t successes, std::size_t trials);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value c(alpha) sqrt((n + m) / (n m)) at
/// alpha = 0.01 (c = 1.628).
double ks_critical_1pct(std::size_t n, std::size_t m);

}  // namespace fbmavg
