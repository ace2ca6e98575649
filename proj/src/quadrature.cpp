#include "fbmavg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fbmavg/errors.hpp"

namespace fbmavg {

namespace {

// Simpson sum over nodes spaced h apart (odd node count).
std::vector<double> simpson(const std::vector<std::vector<double>>& f, double h) {
    const std::size_t dim = f.front().size();
    std::vector<double> s(dim, 0.0);
    const std::size_t last = f.size() - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        const double w = (i == 0 || i == last) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        for (std::size_t c = 0; c < dim; ++c) s[c] += w * f[i][c];
    }
    for (double& v : s) v *= h / 3.0;
    return s;
}

}  // namespace

QuadratureResult integrate_simpson(const std::function<std::vector<double>(double)>& g, double a, double b,
                                   const QuadratureOptions& options) {
    if (!(b > a)) throw DomainError("integrate_simpson: need a < b");
    std::size_t panels = std::max<std::size_t>(2, options.min_panels);
    if (panels % 2 == 1) ++panels;

    std::vector<std::vector<double>> f(panels + 1);
    double h = (b - a) / static_cast<double>(panels);
    for (std::size_t i = 0; i <= panels; ++i) f[i] = g(a + static_cast<double>(i) * h);
    for (const auto& v : f) {
        if (v.size() != f.front().size()) throw DomainError("integrate_simpson: integrand changed dimension");
    }
    std::vector<double> coarse = simpson(f, h);

    while (true) {
        // Refine: keep old nodes, insert midpoints.
        std::vector<std::vector<double>> fine(2 * panels + 1);
        const double hf = h / 2.0;
        for (std::size_t i = 0; i <= panels; ++i) fine[2 * i] = std::move(f[i]);
        for (std::size_t i = 0; i < panels; ++i) fine[2 * i + 1] = g(a + static_cast<double>(2 * i + 1) * hf);
        std::vector<double> refined = simpson(fine, hf);

        double err = 0.0, ratio = 0.0;
        for (std::size_t c = 0; c < refined.size(); ++c) {
            const double e = std::abs(refined[c] - coarse[c]) / 15.0;
            if (!std::isfinite(refined[c])) throw QuadratureError("integrate_simpson: non-finite integrand", e);
            err = std::max(err, e);
            ratio = std::max(ratio, e / std::max(1.0, std::abs(refined[c])));
        }
        panels *= 2;
        if (ratio <= options.rel_tol) return {std::move(refined), err, panels};
        if (panels * 2 > options.max_panels) {
            throw QuadratureError("integrate_simpson: no convergence with " + std::to_string(panels) +
                                      " panels, achieved relative error " + std::to_string(ratio),
                                  ratio);
        }
        f = std::move(fine);
        h = hf;
        coarse = std::move(refined);
    }
}

}  // namespace fbmavg
