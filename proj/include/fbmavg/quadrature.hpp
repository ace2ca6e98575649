#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fbmavg {

struct QuadratureOptions {
    std::size_t min_panels = 1024;
    std::size_t max_panels = std::size_t{1} << 20;
    /// Accept when |S_2n - S_n| / 15 <= rel_tol * max(1, |S_2n|) componentwise.
    double rel_tol = 1e-8;
};

struct QuadratureResult {
    std::vector<double> value;
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

/// Composite Simpson rule for a vector-valued integrand on [a, b], doubling the
/// panel count until the Richardson estimate meets the tolerance. Throws
/// QuadratureError with the achieved estimate if max_panels is exceeded.
QuadratureResult integrate_simpson(const std::function<std::vector<double>(double)>& g, double a, double b,
                                   const QuadratureOptions& options = {});

}  // namespace fbmavg
