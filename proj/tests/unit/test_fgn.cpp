#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fbmavg/ensemble.hpp"
#include "fbmavg/errors.hpp"
#include "fbmavg/fgn.hpp"
#include "fbmavg/seeding.hpp"
#include "fbmavg/statistics.hpp"

using namespace fbmavg;

namespace {

// Mean of x*y over the ensemble with its standard error (zero-mean process).
MeanEstimate product_moment(const std::vector<FbmPath>& paths, std::size_t i, std::size_t j) {
    std::vector<double> prod;
    prod.reserve(paths.size());
    for (const auto& p : paths) prod.push_back(p[i] * p[j]);
    return mean_estimate(prod);
}

}  // namespace

// ------------------------------------------------------------ parameters

TEST(HurstParameter, AcceptsHalfOpenUnitInterval) {
    EXPECT_NO_THROW(HurstParameter(0.5));
    EXPECT_NO_THROW(HurstParameter(0.99));
    EXPECT_THROW(HurstParameter(0.49), DomainError);
    EXPECT_THROW(HurstParameter(1.0), DomainError);
    EXPECT_THROW(HurstParameter(std::nan("")), DomainError);
    EXPECT_TRUE(HurstParameter(0.5).classical());
    EXPECT_FALSE(HurstParameter(0.7).classical());
    EXPECT_THROW(HurstParameter(0.5).require_fractional("test"), DomainError);
}

TEST(TimeGrid, RejectsDegenerateGrids) {
    EXPECT_THROW(TimeGrid(0.0, 10), DomainError);
    EXPECT_THROW(TimeGrid(-1.0, 10), DomainError);
    EXPECT_THROW(TimeGrid(1.0, 0), DomainError);
    TimeGrid g(2.0, 4);
    EXPECT_DOUBLE_EQ(g.dt(), 0.5);
    EXPECT_EQ(g.node(0), 0.0);
    auto t = g.nodes();
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(t[i - 1], t[i]);
}

// ------------------------------------------------------------ covariance

TEST(FbmCovariance, Examples) {
    const HurstParameter h75(0.75);
    EXPECT_DOUBLE_EQ(fbm_covariance(1.0, 1.0, h75), 1.0);
    EXPECT_EQ(fbm_covariance(0.0, 5.0, HurstParameter(0.6)), 0.0);
    // 2^{1.5} / 2, 40-digit oracle.
    EXPECT_NEAR(fbm_covariance(2.0, 1.0, h75), 1.414213562373095048801688724, 1e-15);
    EXPECT_THROW(fbm_covariance(-0.1, 1.0, h75), DomainError);
}

TEST(FbmCovariance, SymmetricAndVarianceConsistent) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0), uh(0.5, 0.999);
    for (int k = 0; k < 2000; ++k) {
        const HurstParameter h(uh(rng));
        const double t = u(rng), s = u(rng);
        EXPECT_EQ(fbm_covariance(t, s, h), fbm_covariance(s, t, h));
        EXPECT_EQ(fbm_covariance(t, t, h), std::pow(t, 2.0 * h.value()));
    }
}

TEST(FgnAutocovariance, Examples) {
    EXPECT_EQ(fgn_autocovariance(1, HurstParameter(0.5)), 0.0);
    EXPECT_EQ(fgn_autocovariance(0, HurstParameter(0.7)), 1.0);
    EXPECT_NEAR(fgn_autocovariance(1, HurstParameter(0.75)), 0.414213562373095048801688724, 1e-15);
}

TEST(FgnAutocovariance, LongRangeDependence) {
    for (double hv : {0.55, 0.6, 0.75, 0.9}) {
        const HurstParameter h(hv);
        for (std::size_t n = 1; n <= 2000; ++n) EXPECT_GT(fgn_autocovariance(n, h), 0.0) << "n=" << n;
        const double ratio = fgn_autocovariance(100, h) / (hv * (2 * hv - 1) * std::pow(100.0, 2 * hv - 2));
        EXPECT_GE(ratio, 0.99);
        EXPECT_LE(ratio, 1.01);
    }
    // 40-digit oracle for H = 0.75: 1.0000062501822997...
    const double r = fgn_autocovariance(100, HurstParameter(0.75)) / (0.75 * 0.5 * std::pow(100.0, -0.5));
    EXPECT_NEAR(r, 1.000006250182299724, 1e-9);
}

// ------------------------------------------------------------ Cholesky

TEST(Cholesky, ZeroNoiseGivesZeroPath) {
    const TimeGrid g(1.0, 32);
    const FbmPath p = generate_cholesky(g, HurstParameter(0.7), std::vector<double>(32, 0.0));
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
}

TEST(Cholesky, HalfHurstIsRandomWalk) {
    const TimeGrid g(2.0, 50);
    const auto noise = standard_normal(50, 11);
    const FbmPath p = generate_cholesky(g, HurstParameter(0.5), noise);
    const double sdt = std::sqrt(g.dt());
    double b = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        b += sdt * noise[i];
        EXPECT_EQ(p[i + 1], b);
    }
}

TEST(Cholesky, ThreeStepFactorColumn) {
    // Delta t = 1 so the increment covariance is rho(|i-j|); values are the
    // partial sums of the first factor column (mpmath Cholesky, 40 digits).
    const TimeGrid g(3.0, 3);
    const FbmPath p = generate_cholesky(g, HurstParameter(0.75), std::vector<double>{1.0, 0.0, 0.0});
    EXPECT_EQ(p[0], 0.0);
    EXPECT_NEAR(p[1], 1.0, 1e-15);
    EXPECT_NEAR(p[2], 1.414213562373095048801688724, 1e-14);
    EXPECT_NEAR(p[3], 1.683862648980220891489480788, 1e-14);

    const CholeskyGenerator gen(g, HurstParameter(0.75));
    EXPECT_NEAR(gen.factor()[1 * 3 + 1], 0.9101797211244546826, 1e-14);
    EXPECT_NEAR(gen.factor()[2 * 3 + 2], 0.9037787523178889158, 1e-14);
}

TEST(Cholesky, DuplicatedNodeReportsPivot) {
    // fBm covariance at nodes (1, 1, 2): rows 0 and 1 coincide.
    const HurstParameter h(0.7);
    const double t[] = {1.0, 1.0, 2.0};
    std::vector<double> c(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[i * 3 + j] = fbm_covariance(t[i], t[j], h);
    try {
        cholesky_factor(c, 3);
        FAIL() << "expected FactorizationError";
    } catch (const FactorizationError& e) {
        EXPECT_EQ(e.pivot(), 1u);
    }
}

TEST(Cholesky, RejectsWrongNoiseLength) {
    EXPECT_THROW(generate_cholesky(TimeGrid(1.0, 8), HurstParameter(0.7), std::vector<double>(7)), DomainError);
}

// ------------------------------------------------------------ circulant

TEST(Circulant, SpectrumNonnegative) {
    for (double hv : {0.5, 0.55, 0.75, 0.95}) {
        for (std::size_t n : {1u, 2u, 7u, 64u, 1000u}) {
            const FgnSpectrum s = circulant_spectrum(n, HurstParameter(hv));
            ASSERT_EQ(s.eigenvalues.size(), 2 * n);
            for (double l : s.eigenvalues) EXPECT_GE(l, 0.0);
        }
    }
    // White noise: the embedding is the identity.
    const FgnSpectrum flat = circulant_spectrum(16, HurstParameter(0.5));
    for (double l : flat.eigenvalues) EXPECT_NEAR(l, 1.0, 1e-12);
}

TEST(Circulant, ZeroNoiseAndLength) {
    const TimeGrid g(1.0, 20);
    const FbmPath p = generate_circulant(g, HurstParameter(0.8), std::vector<double>(40, 0.0));
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(generate_circulant(g, HurstParameter(0.8), std::vector<double>(20)), DomainError);
}

TEST(Circulant, Deterministic) {
    const TimeGrid g(1.0, 100);
    const auto noise = standard_normal(200, 3);
    const FbmPath a = generate_circulant(g, HurstParameter(0.7), noise);
    const FbmPath b = generate_circulant(g, HurstParameter(0.7), noise);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);

    const auto n2 = standard_normal(100, 3);
    const FbmPath c = generate_cholesky(g, HurstParameter(0.7), n2);
    const FbmPath d = generate_cholesky(g, HurstParameter(0.7), n2);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], d[i]);
}

TEST(Circulant, TerminalVarianceMatches) {
    // Var B(1) = 1; with known mean 0 the SE of the mean of B(1)^2 is sqrt(2/M).
    const TimeGrid g(1.0, 256);
    const FbmGenerator gen(GenerationMethod::circulant, g, HurstParameter(0.75));
    const auto paths = generate_ensemble(gen, 5000, 101);
    const MeanEstimate v = product_moment(paths, 256, 256);
    EXPECT_NEAR(v.mean, 1.0, 4.0 * std::sqrt(2.0 / 5000.0));
}

TEST(Circulant, BrownianIncrementsMatchCholesky) {
    const TimeGrid g(1.0, 50);
    const HurstParameter h(0.5);
    const auto a = generate_ensemble(FbmGenerator(GenerationMethod::circulant, g, h), 4000, 1);
    const auto b = generate_ensemble(FbmGenerator(GenerationMethod::cholesky, g, h), 4000, 2);
    const MomentEstimate ma = increment_moment(a, 1, 1);
    const MomentEstimate mb = increment_moment(b, 1, 1);
    EXPECT_NEAR(ma.value, g.dt(), 4.0 * ma.std_error);
    EXPECT_NEAR(mb.value, g.dt(), 4.0 * mb.std_error);
    EXPECT_NEAR(ma.value, mb.value, 4.0 * std::hypot(ma.std_error, mb.std_error));
}

TEST(Generators, EmpiricalCovariancesAgree) {
    const TimeGrid g(1.0, 16);
    const HurstParameter h(0.7);
    const auto a = generate_ensemble(FbmGenerator(GenerationMethod::circulant, g, h), 5000, 1001);
    const auto b = generate_ensemble(FbmGenerator(GenerationMethod::cholesky, g, h), 5000, 2002);
    for (std::size_t i = 1; i <= 16; ++i) {
        for (std::size_t j = i; j <= 16; ++j) {
            const MeanEstimate ca = product_moment(a, i, j);
            const MeanEstimate cb = product_moment(b, i, j);
            EXPECT_NEAR(ca.mean, cb.mean, 4.0 * std::hypot(ca.std_error, cb.std_error)) << i << "," << j;
        }
    }
}

TEST(Generators, SelfSimilarityInLaw) {
    // B(4t) / 4^H vs B(t) at t = 1, independent ensembles, two-sample KS at 1%.
    const HurstParameter h(0.75);
    const TimeGrid g(4.0, 64);
    const FbmGenerator gen(GenerationMethod::circulant, g, h);
    const auto first = generate_ensemble(gen, 5000, 77);
    const auto second = generate_ensemble(gen, 5000, 78);
    std::vector<double> scaled, plain;
    const double s = std::pow(4.0, h.value());
    for (const auto& p : first) scaled.push_back(p[64] / s);
    for (const auto& p : second) plain.push_back(p[16]);
    EXPECT_LT(ks_statistic(scaled, plain), ks_critical_1pct(5000, 5000));
}

TEST(FbmPath, CoarsenKeepsEveryKthNode) {
    const TimeGrid g(1.0, 8);
    const FbmPath p = generate_cholesky(g, HurstParameter(0.6), standard_normal(8, 5));
    const FbmPath c = p.coarsen(4);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[1], p[4]);
    EXPECT_EQ(c[2], p[8]);
    EXPECT_THROW(p.coarsen(3), DomainError);
}

// ------------------------------------------------------------ increments

TEST(PathIncrements, ZeroAndTelescoping) {
    const TimeGrid g(1.0, 40);
    const FbmPath zero(g, HurstParameter(0.7), std::vector<double>(41, 0.0));
    for (double d : path_increments(zero)) EXPECT_EQ(d, 0.0);

    const FbmPath p = generate_circulant(g, HurstParameter(0.7), standard_normal(80, 9));
    const auto inc = path_increments(p);
    ASSERT_EQ(inc.size(), 40u);
    double sum = 0.0;
    for (double d : inc) sum += d;
    EXPECT_NEAR(sum, p[40], 1e-13);
}

TEST(IncrementMoment, VarianceScalesWithLag) {
    // Delta t = 0.01, H = 0.6: E[dB^2] = 0.01^{1.2}.
    const TimeGrid g(1.0, 100);
    const HurstParameter h(0.6);
    const auto paths = generate_ensemble(FbmGenerator(GenerationMethod::circulant, g, h), 5000, 31);
    const MomentEstimate m = increment_moment(paths, 1, 1);
    EXPECT_NEAR(m.value, std::pow(0.01, 1.2), 4.0 * m.std_error);
    const MomentEstimate m4 = increment_moment(paths, 2, 10);
    EXPECT_NEAR(m4.value, gaussian_increment_moment(2, 0.1, h), 5.0 * m4.std_error);
}

TEST(IncrementMoment, GaussianFactor) {
    EXPECT_DOUBLE_EQ(gaussian_increment_moment(1, 0.3, HurstParameter(0.7)), std::pow(0.3, 1.4));
    EXPECT_DOUBLE_EQ(gaussian_increment_moment(2, 1.0, HurstParameter(0.75)), 3.0);
    EXPECT_DOUBLE_EQ(gaussian_increment_moment(3, 1.0, HurstParameter(0.75)), 15.0);
}

TEST(IncrementMoment, DegenerateAndErrors) {
    const TimeGrid g(1.0, 10);
    std::vector<FbmPath> zeros(3, FbmPath(g, HurstParameter(0.7), std::vector<double>(11, 0.0)));
    EXPECT_EQ(increment_moment(zeros, 1, 2).value, 0.0);
    EXPECT_THROW(increment_moment(std::vector<FbmPath>{}, 1, 1), DomainError);
    EXPECT_THROW(increment_moment(zeros, 1, 11), DomainError);
}

// ------------------------------------------------------------ Hurst estimation

TEST(EstimateHurst, StraightLineIsDegenerate) {
    const TimeGrid g(1.0, 255);
    auto t = g.nodes();
    const HurstEstimate e = estimate_hurst(t, g.dt());
    EXPECT_NEAR(e.hurst, 1.0, 1e-9);
    EXPECT_TRUE(e.degenerate);
}

TEST(EstimateHurst, InputValidation) {
    EXPECT_THROW(estimate_hurst(std::vector<double>(63, 1.0), 0.1), DomainError);
    std::vector<double> bad(100, 0.0);
    bad[3] = std::nan("");
    EXPECT_THROW(estimate_hurst(bad, 0.1), DomainError);
}

TEST(EstimateHurst, RecoversGeneratedIndex) {
    // Calibrated offline: at 4096 steps with lags 1..16 the estimator's spread
    // is about 0.012 (H = 0.5) and 0.017 (H = 0.75).
    const TimeGrid g(1.0, 4096);
    for (double hv : {0.5, 0.75}) {
        const FbmGenerator gen(GenerationMethod::circulant, g, HurstParameter(hv));
        int inside = 0;
        for (std::size_t s = 0; s < 40; ++s) {
            const HurstEstimate e = estimate_hurst(generate_member(gen, 500 + s, 0));
            EXPECT_FALSE(e.degenerate);
            if (std::abs(e.hurst - hv) <= 0.05) ++inside;
        }
        EXPECT_GE(inside, 38) << "H=" << hv;
    }
}
