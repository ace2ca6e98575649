#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fbmavg/ensemble.hpp"
#include "fbmavg/errors.hpp"
#include "fbmavg/integrator.hpp"
#include "fbmavg/seeding.hpp"
#include "fbmavg/statistics.hpp"

using namespace fbmavg;

namespace {

SdeSystem constant_system(double b, double s, double hurst, double eps) {
    return SdeSystem(
        1, 1, [b](double, std::span<const double>) { return Vector{b}; },
        [s](double, std::span<const double>) { return Matrix(1, 1, s); }, HurstParameter(hurst), eps);
}

SdeSystem ou_system(double lambda, double hurst, double eps) {
    return SdeSystem(
        1, 1, [lambda](double, std::span<const double> x) { return Vector{-lambda * x[0]}; },
        [](double, std::span<const double>) { return Matrix(1, 1, 1.0); }, HurstParameter(hurst), eps);
}

FbmPath sample_path(double hurst, std::size_t n, std::uint64_t seed, double t_end = 1.0) {
    const FbmGenerator gen(GenerationMethod::circulant, TimeGrid(t_end, n), HurstParameter(hurst));
    return generate_member(gen, seed, 0);
}

double max_abs_diff(const Trajectory& a, const Trajectory& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.states().size(); ++i) m = std::max(m, std::abs(a.states()[i] - b.states()[i]));
    return m;
}

constexpr IntegralKind kAllKinds[] = {IntegralKind::forward, IntegralKind::backward, IntegralKind::symmetric};

}  // namespace

// ------------------------------------------------------------ integrals

TEST(PathwiseIntegral, ConstantIntegrandTelescopes) {
    const FbmPath p = sample_path(0.7, 64, 1);
    const std::vector<double> one(65, 1.0), zero(65, 0.0);
    for (IntegralKind k : kAllKinds) {
        EXPECT_NEAR(pathwise_integral(one, p, k), p[64], 1e-13);
        EXPECT_EQ(pathwise_integral(zero, p, k), 0.0);
    }
}

TEST(PathwiseIntegral, TwoStepHandEvaluation) {
    // u(t) = t on {0, 0.5, 1}; dB = (b1, b2).
    const double b1 = 0.3, b2 = -0.7;
    const FbmPath p(TimeGrid(1.0, 2), HurstParameter(0.75), {0.0, b1, b1 + b2});
    const std::vector<double> u{0.0, 0.5, 1.0};
    const double db2 = (b1 + b2) - b1;
    EXPECT_DOUBLE_EQ(pathwise_integral(u, p, IntegralKind::forward), 0.5 * db2);
    EXPECT_DOUBLE_EQ(pathwise_integral(u, p, IntegralKind::backward), 0.5 * b1 + 1.0 * db2);
    EXPECT_DOUBLE_EQ(pathwise_integral(u, p, IntegralKind::symmetric), 0.25 * b1 + 0.75 * db2);
}

TEST(PathwiseIntegral, LengthMismatch) {
    const FbmPath p = sample_path(0.7, 8, 1);
    EXPECT_THROW(pathwise_integral(std::vector<double>(8, 1.0), p, IntegralKind::forward), DomainError);
}

TEST(PathwiseIntegral, KindsCoincideUnderRefinement) {
    // Median |forward - backward| over 200 paths should at least shrink by
    // 2^{0.9 H} per halving of dt.
    const double hv = 0.75;
    const FbmGenerator gen(GenerationMethod::circulant, TimeGrid(1.0, 512), HurstParameter(hv));
    std::vector<std::vector<double>> gaps(4);
    for (std::size_t r = 0; r < 200; ++r) {
        const FbmPath fine = generate_member(gen, 4242, r);
        for (std::size_t level = 0; level < 4; ++level) {
            const FbmPath p = fine.coarsen(std::size_t{8} >> level);
            std::vector<double> u(p.size());
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(p.grid().node(i));
            gaps[level].push_back(std::abs(pathwise_integral(u, p, IntegralKind::forward) -
                                           pathwise_integral(u, p, IntegralKind::backward)));
        }
    }
    std::vector<double> med;
    for (auto& g : gaps) {
        std::nth_element(g.begin(), g.begin() + g.size() / 2, g.end());
        med.push_back(g[g.size() / 2]);
    }
    for (std::size_t l = 1; l < med.size(); ++l) EXPECT_GE(med[l - 1] / med[l], std::pow(2.0, 0.9 * hv));
}

// ------------------------------------------------------------ SdeSystem

TEST(SdeSystem, Contracts) {
    EXPECT_THROW(constant_system(0, 1, 0.5, 0.1), DomainError);  // H = 1/2 rejected
    EXPECT_THROW(constant_system(0, 1, 0.7, 0.0), DomainError);
    EXPECT_THROW(constant_system(0, 1, 0.7, 1.5), DomainError);  // > epsilon_0
    const SdeSystem s = constant_system(0, 1, 0.7, 0.2);
    EXPECT_DOUBLE_EQ(s.drift_scale(), std::pow(0.2, 1.4));
    EXPECT_DOUBLE_EQ(s.diffusion_scale(), std::pow(0.2, 0.7));
    const SdeSystem bad(
        1, 1, [](double, std::span<const double>) { return Vector{1.0, 2.0}; },
        [](double, std::span<const double>) { return Matrix(1, 1, 1.0); }, HurstParameter(0.7), 0.1);
    EXPECT_THROW(bad.drift(0.0, std::vector<double>{0.0}), DomainError);
}

// ------------------------------------------------------------ Euler

TEST(EulerSolve, ZeroCoefficientsStayPut) {
    const FbmPath p = sample_path(0.7, 50, 2);
    for (IntegralKind k : kAllKinds) {
        const Trajectory tr = euler_solve(constant_system(0.0, 0.0, 0.7, 0.3), std::vector<double>{1.25}, {&p, 1}, k);
        for (std::size_t i = 0; i <= 50; ++i) EXPECT_EQ(tr.at(i), 1.25);
    }
}

TEST(EulerSolve, AdditiveNoiseReproducesPath) {
    const double eps = 0.3, hv = 0.75;
    const FbmPath p = sample_path(hv, 100, 3);
    const double c = std::pow(eps, hv);
    for (IntegralKind k : kAllKinds) {
        const Trajectory tr = euler_solve(constant_system(0.0, 1.0, hv, eps), std::vector<double>{0.5}, {&p, 1}, k);
        EXPECT_EQ(tr.at(0), 0.5);
        for (std::size_t i = 0; i <= 100; ++i) EXPECT_NEAR(tr.at(i), 0.5 + c * p[i], 1e-13);
    }
}

TEST(EulerSolve, ConstantCoefficientsBitIdenticalAcrossKinds) {
    const double eps = 0.2, hv = 0.65, b = -0.8, s = 1.7;
    const FbmPath p = sample_path(hv, 128, 4);
    const SdeSystem sys = constant_system(b, s, hv, eps);
    const std::vector<double> x0{0.1};
    const Trajectory fwd = euler_solve(sys, x0, {&p, 1}, IntegralKind::forward);
    EXPECT_EQ(fwd, euler_solve(sys, x0, {&p, 1}, IntegralKind::backward));
    EXPECT_EQ(fwd, euler_solve(sys, x0, {&p, 1}, IntegralKind::symmetric));
    for (std::size_t i = 0; i <= 128; ++i) {
        const double expect = 0.1 + sys.drift_scale() * b * p.grid().node(i) + sys.diffusion_scale() * s * p[i];
        EXPECT_NEAR(fwd.at(i), expect, 1e-13);
    }
}

TEST(EulerSolve, ScalesLiveInOnePlace) {
    const SdeSystem sys(
        1, 1, [](double t, std::span<const double> x) { return Vector{-x[0] * std::cos(t) + 0.3}; },
        [](double t, std::span<const double> x) { return Matrix(1, 1, 1.0 + 0.5 * std::sin(x[0] + t)); },
        HurstParameter(0.8), 0.37);
    const FbmPath p = sample_path(0.8, 200, 5, 2.0);
    for (IntegralKind k : kAllKinds) {
        EXPECT_EQ(euler_solve(sys, std::vector<double>{0.4}, {&p, 1}, k),
                  euler_solve(sys.with_scales_folded(), std::vector<double>{0.4}, {&p, 1}, k));
    }
}

TEST(EulerSolve, MultiDimensionalIndependentColumns) {
    // d = 2, m = 2, diagonal diffusion: each component follows its own path.
    const SdeSystem sys(
        2, 2, [](double, std::span<const double>) { return Vector{0.0, 0.0}; },
        [](double, std::span<const double>) { return Matrix(2, 2, {1.0, 0.0, 0.0, 2.0}); }, HurstParameter(0.7),
        1.0);
    const std::vector<FbmPath> paths{sample_path(0.7, 30, 6), sample_path(0.7, 30, 7)};
    const Trajectory tr = euler_solve(sys, std::vector<double>{0.0, 1.0}, paths, IntegralKind::symmetric);
    for (std::size_t i = 0; i <= 30; ++i) {
        EXPECT_NEAR(tr.at(i, 0), paths[0][i], 1e-13);
        EXPECT_NEAR(tr.at(i, 1), 1.0 + 2.0 * paths[1][i], 1e-13);
    }
    EXPECT_THROW(euler_solve(sys, std::vector<double>{0.0, 1.0}, {paths.data(), 1}, IntegralKind::forward),
                 DomainError);
}

TEST(EulerSolve, DivergenceReportsStep) {
    const SdeSystem sys(
        1, 1, [](double, std::span<const double> x) { return Vector{x[0] * x[0]}; },
        [](double, std::span<const double>) { return Matrix(1, 1, 0.0); }, HurstParameter(0.7), 1.0);
    const FbmPath p = sample_path(0.7, 10, 8);
    try {
        euler_solve(sys, std::vector<double>{1e200}, {&p, 1}, IntegralKind::forward);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

// ------------------------------------------------------------ OU oracle

TEST(OuExactSolution, NoMeanReversion) {
    const FbmPath p = sample_path(0.75, 64, 9);
    const Trajectory z = ou_exact_solution(0.0, 0.2, HurstParameter(0.75), 0.3, p);
    const double c = std::pow(0.2, 0.75);
    for (std::size_t i = 0; i <= 64; ++i) EXPECT_NEAR(z.at(i), 0.3 + c * p[i], 1e-14);

    const FbmPath zero(TimeGrid(1.0, 16), HurstParameter(0.75), std::vector<double>(17, 0.0));
    const Trajectory z0 = ou_exact_solution(0.7, 0.2, HurstParameter(0.75), 0.0, zero);
    for (std::size_t i = 0; i <= 16; ++i) EXPECT_EQ(z0.at(i), 0.0);
}

TEST(OuExactSolution, EulerConvergesAtFirstOrder) {
    // Strong mean reversion (eps = 1, lambda = 2) so the discretization error
    // dominates rounding; nested grids come from one fine path.
    const HurstParameter h(0.75);
    const FbmPath fine = sample_path(0.75, 4096, 10);
    std::vector<double> err;
    for (std::size_t factor : {64u, 32u, 16u, 8u}) {
        const FbmPath p = fine.coarsen(factor);
        const Trajectory e = euler_solve(ou_system(2.0, 0.75, 1.0), std::vector<double>{1.0}, {&p, 1},
                                         IntegralKind::forward);
        err.push_back(max_abs_diff(e, ou_exact_solution(2.0, 1.0, h, 1.0, p)));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        EXPECT_LT(err[i], err[i - 1]);
        EXPECT_GT(err[i - 1] / err[i], 1.5) << "level " << i;
    }
}

TEST(OuExactSolution, ExampleParametersAgree) {
    // lambda 0.2, eps 0.045, H 0.75, x0 0: averaged drift -lambda z.
    const HurstParameter h(0.75);
    const FbmPath fine = sample_path(0.75, 2048, 11);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t factor : {16u, 4u, 1u}) {
        const FbmPath p = fine.coarsen(factor);
        for (IntegralKind k : kAllKinds) {
            const Trajectory e = euler_solve(ou_system(0.2, 0.75, 0.045), std::vector<double>{0.0}, {&p, 1}, k);
            const double d = max_abs_diff(e, ou_exact_solution(0.2, 0.045, h, 0.0, p));
            EXPECT_LT(d, 1e-5);
            if (k == IntegralKind::forward) {
                EXPECT_LT(d, prev);
                prev = d;
            }
        }
    }
}

// ------------------------------------------------------------ second moment

TEST(SecondMoment, ConstantIntegrandGivesFbmVariance) {
    for (double hv : {0.55, 0.75, 0.9}) {
        for (double t : {1.0, 2.5}) {
            const double v = second_moment_deterministic([](double) { return 1.0; }, TimeGrid(t, 200),
                                                         HurstParameter(hv));
            EXPECT_NEAR(v, std::pow(t, 2 * hv), 1e-12 * std::pow(t, 2 * hv));
        }
    }
    EXPECT_EQ(second_moment_deterministic([](double) { return 0.0; }, TimeGrid(1.0, 10), HurstParameter(0.7)),
              0.0);
    EXPECT_THROW(second_moment_deterministic([](double) { return 1.0; }, TimeGrid(1.0, 10), HurstParameter(0.5)),
                 DomainError);
}

TEST(SecondMoment, MatchesMonteCarloIsometry) {
    const HurstParameter h(0.75);
    const TimeGrid g(1.0, 256);
    auto f = [](double t) { return std::cos(3.0 * t) + 0.5; };
    const double exact = second_moment_deterministic(f, g, h);
    const auto paths = generate_ensemble(FbmGenerator(GenerationMethod::circulant, g, h), 5000, 12);
    std::vector<double> u(g.n_nodes());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(g.node(i));
    std::vector<double> sq;
    for (const auto& p : paths) {
        const double v = pathwise_integral(u, p, IntegralKind::symmetric);
        sq.push_back(v * v);
    }
    const MeanEstimate m = mean_estimate(sq);
    EXPECT_NEAR(m.mean, exact, 4.0 * m.std_error);
}

TEST(SecondMoment, BoundedByKernelMass) {
    // int int f f phi <= sup_s int phi(t, s) dt * int f^2 = 2^{2-2H} H T^{2H-1} int f^2,
    // and for f = 1 the excess over H T^{2H-1} int f^2 is (1 - H) T^{2H}.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const double hv = 0.55 + 0.4 * u(rng), t_end = 0.5 + 2.0 * u(rng);
        const double a = u(rng), w = 10.0 * u(rng), c = u(rng);
        auto f = [&](double t) { return c + a * std::sin(w * t); };
        const TimeGrid g(t_end, 300);
        const HurstParameter h(hv);
        double f2 = 0.0;
        for (std::size_t i = 0; i < 300; ++i) {
            const double x = f((i + 0.5) * g.dt());
            f2 += x * x * g.dt();
        }
        const double lhs = second_moment_deterministic(f, g, h);
        EXPECT_LE(lhs, std::pow(2.0, 2 - 2 * hv) * lemma_constant(h, t_end) * f2 * (1 + 1e-12));
    }
    const HurstParameter h(0.75);
    const double one = second_moment_deterministic([](double) { return 1.0; }, TimeGrid(1.0, 100), h);
    EXPECT_NEAR(one - lemma_constant(h, 1.0) * 1.0, 0.25, 1e-12);
}

TEST(SpotCheck, EstimatesLipschitzAndGrowth) {
    const double lambda = 0.4;
    const SdeSystem sys(
        1, 1,
        [lambda](double t, std::span<const double> x) {
            const double s = std::sin(t);
            return Vector{-2 * lambda * x[0] * s * s};
        },
        [](double, std::span<const double>) { return Matrix(1, 1, 1.0); }, HurstParameter(0.7), 0.1);
    const RegularityReport r = spot_check_coefficients(sys, 10.0, -2.0, 2.0, 500);
    EXPECT_TRUE(r.finite);
    EXPECT_LE(r.drift_lipschitz, 2 * lambda + 1e-12);
    EXPECT_GT(r.drift_lipschitz, 0.5 * lambda);
    EXPECT_EQ(r.diffusion_lipschitz, 0.0);
    EXPECT_LE(r.drift_growth, 2 * lambda);
}
