#include "oracles.hpp"
#include "ratiouq/betaprime.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <limits>
#include <numeric>

using ratiouq::GenBetaPrime;

namespace {

const GenBetaPrime kDemo{10.0, 20.0, 2.0, 0.5};

}  // namespace

TEST(BetaPrimePdf, UnitParametersAtOne) {
    EXPECT_NEAR(ratiouq::bp_pdf(1.0, {1, 1, 1, 1}), 0.25, 1e-15);
}

TEST(BetaPrimePdf, MatchesDerivativeOfCdf) {
    const double x = 0.3;
    const double fd = oracle::central_difference([](double t) { return ratiouq::bp_cdf(t, kDemo); }, x, 1e-5);
    const double pdf = ratiouq::bp_pdf(x, kDemo);
    EXPECT_NEAR(pdf, fd, 1e-6 * pdf);
}

TEST(BetaPrimePdf, IntegratesToOne) {
    for (const GenBetaPrime& d : {kDemo, GenBetaPrime{3, 5, 1, 1}, GenBetaPrime{0.7, 2.5, 1.5, 3.0},
                                  GenBetaPrime{31, 11, 1, 1}, GenBetaPrime{2, 4, 0.5, 0.2}}) {
        // Split at the median; the upper piece maps [med, inf) to a finite interval.
        const double med = ratiouq::bp_median(d);
        const auto f = [&](double x) { return ratiouq::bp_pdf(x, d); };
        const double total = oracle::integrate(f, 0.0, med) +
                             oracle::integrate(f, med, std::numeric_limits<double>::infinity());
        EXPECT_NEAR(total, 1.0, 1e-6) << d.alpha << "," << d.beta << "," << d.p << "," << d.q;
    }
}

TEST(BetaPrimePdf, ClosedFormAgainstDirectEvaluation) {
    const GenBetaPrime d{2.5, 3.5, 1.7, 0.8};
    for (double x : {0.01, 0.4, 1.0, 3.0, 20.0}) {
        const double direct = d.p * std::pow(x, d.alpha * d.p - 1.0) /
                              (std::pow(d.q, d.alpha * d.p) * std::beta(d.alpha, d.beta) *
                               std::pow(1.0 + std::pow(x / d.q, d.p), d.alpha + d.beta));
        EXPECT_NEAR(ratiouq::bp_pdf(x, d), direct, 1e-12 * direct);
    }
}

TEST(BetaPrimePdf, BoundaryAtZero) {
    EXPECT_EQ(ratiouq::bp_pdf(0.0, {2, 3, 1, 1}), 0.0);
    // alpha p = 1: p / (q B(alpha, beta))
    EXPECT_NEAR(ratiouq::bp_pdf(0.0, {0.5, 3, 2, 1.5}), 2.0 / (1.5 * std::beta(0.5, 3.0)), 1e-12);
    EXPECT_TRUE(std::isinf(ratiouq::bp_pdf(0.0, {0.5, 3, 1, 1})));
}

TEST(BetaPrimePdf, FiniteForExtremeArguments) {
    const GenBetaPrime d{200, 300, 3, 1e-3};
    for (double x : {1e-300, 1e-10, 1e-3, 1e5, 1e300}) {
        const double v = ratiouq::bp_pdf(x, d);
        EXPECT_TRUE(std::isfinite(v)) << x;
        EXPECT_GE(v, 0.0);
    }
}

TEST(BetaPrimePdf, Errors) {
    EXPECT_THROW(ratiouq::bp_pdf(-0.1, kDemo), ratiouq::DomainError);
    EXPECT_THROW(ratiouq::bp_pdf(1.0, {0, 1, 1, 1}), ratiouq::ParameterError);
    EXPECT_THROW(ratiouq::bp_pdf(1.0, {1, -1, 1, 1}), ratiouq::ParameterError);
    EXPECT_THROW(ratiouq::bp_pdf(1.0, {1, 1, 0, 1}), ratiouq::ParameterError);
    EXPECT_THROW(ratiouq::bp_pdf(1.0, {1, 1, 1, std::nan("")}), ratiouq::ParameterError);
    EXPECT_THROW(ratiouq::bp_cdf(-1.0, kDemo), ratiouq::DomainError);
}

TEST(BetaPrimeCdf, MedianAtScaleForEqualShapes) {
    for (double a : {0.5, 2.0, 17.0})
        for (double p : {0.3, 1.0, 4.0}) EXPECT_NEAR(ratiouq::bp_cdf(2.5, {a, a, p, 2.5}), 0.5, 1e-14);
}

TEST(BetaPrimeCdf, ZeroAndInfinity) {
    EXPECT_EQ(ratiouq::bp_cdf(0.0, kDemo), 0.0);
    EXPECT_EQ(ratiouq::bp_cdf(std::numeric_limits<double>::infinity(), kDemo), 1.0);
    EXPECT_LT(ratiouq::bp_cdf(1e300, {1, 0.01, 1, 1}), 1.0);
}

TEST(BetaPrimeCdf, MatchesQuadratureOfPdf) {
    const double cdf = ratiouq::bp_cdf(0.4, kDemo);
    const double quad = oracle::integrate([](double t) { return ratiouq::bp_pdf(t, kDemo); }, 0.0, 0.4);
    EXPECT_NEAR(cdf, quad, 1e-6);
    // A plain trapezoid rule on a fine grid, as a second route.
    const std::size_t n = 40000;
    double trap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 0.4 * double(i) / double(n), b = 0.4 * double(i + 1) / double(n);
        trap += 0.5 * (ratiouq::bp_pdf(a, kDemo) + ratiouq::bp_pdf(b, kDemo)) * (b - a);
    }
    EXPECT_NEAR(cdf, trap, 1e-6);
}

TEST(BetaPrimeCdf, MonotoneAndInUnitInterval) {
    for (const GenBetaPrime& d : {kDemo, GenBetaPrime{0.3, 0.4, 0.7, 5.0}, GenBetaPrime{50, 2, 1, 1}}) {
        double prev = 0.0;
        for (int i = 1; i <= 400; ++i) {
            const double x = std::pow(10.0, -6.0 + 12.0 * i / 400.0);
            const double f = ratiouq::bp_cdf(x, d);
            EXPECT_GE(f, prev);
            EXPECT_LE(f, 1.0);
            prev = f;
        }
    }
}

TEST(BetaPrimeCdf, ComplementIsAccurateInTheTail) {
    const GenBetaPrime d{3, 5, 1, 1};
    for (double x : {0.1, 1.0, 50.0, 1e4}) {
        EXPECT_NEAR(ratiouq::bp_cdf(x, d) + ratiouq::bp_ccdf(x, d), 1.0, 1e-14);
    }
    // Far tail: the survival function with beta = 5 decays like x^-5 / (5 B(3, 5)).
    const double x = 1e6;
    const double asym = std::pow(x, -5.0) / (5.0 * std::beta(3.0, 5.0));
    EXPECT_NEAR(ratiouq::bp_ccdf(x, d), asym, 1e-4 * asym);
}

TEST(BetaPrimeCdf, ScaleProperty) {
    const GenBetaPrime d{2.2, 3.1, 1.4, 3.7};
    const GenBetaPrime unit{2.2, 3.1, 1.4, 1.0};
    for (double x : {0.1, 0.9, 3.7, 12.0, 80.0})
        EXPECT_NEAR(ratiouq::bp_cdf(x, d), ratiouq::bp_cdf(x / d.q, unit), 1e-14);
}

TEST(BetaPrimeCdf, AgreesWithBetaDistribution) {
    const boost::math::beta_distribution<double> beta(kDemo.alpha, kDemo.beta);
    for (double x : {0.05, 0.3, 0.5, 0.9, 2.0}) {
        const double y = std::pow(x / kDemo.q, kDemo.p);
        EXPECT_NEAR(ratiouq::bp_cdf(x, kDemo), boost::math::cdf(beta, y / (1.0 + y)), 1e-14);
    }
}

TEST(BetaPrimeQuantile, SpecialLevels) {
    EXPECT_EQ(ratiouq::bp_quantile(0.0, kDemo), 0.0);
    EXPECT_TRUE(std::isinf(ratiouq::bp_quantile(1.0, kDemo)));
    EXPECT_NEAR(ratiouq::bp_quantile(0.5, {4, 4, 3, 1.7}), 1.7, 1e-12);
    EXPECT_THROW(ratiouq::bp_quantile(-0.01, kDemo), ratiouq::DomainError);
    EXPECT_THROW(ratiouq::bp_quantile(1.01, kDemo), ratiouq::DomainError);
    EXPECT_THROW(ratiouq::bp_quantile(std::nan(""), kDemo), ratiouq::DomainError);
}

TEST(BetaPrimeQuantile, RoundTripFromX) {
    // Above about 1.5 the cdf of kDemo rounds to 1, so the round trip is only posed in the bulk.
    for (double x : {0.1, 0.5, 0.8}) EXPECT_NEAR(ratiouq::bp_quantile(ratiouq::bp_cdf(x, kDemo), kDemo), x, 1e-8 * x);
}

TEST(BetaPrimeQuantile, RoundTripFromU) {
    for (const GenBetaPrime& d : {kDemo, GenBetaPrime{0.6, 0.9, 1, 2}, GenBetaPrime{80, 40, 1, 0.3}})
        for (double u = 0.001; u < 1.0; u += 0.0373) EXPECT_NEAR(ratiouq::bp_cdf(ratiouq::bp_quantile(u, d), d), u, 1e-10);
}

TEST(BetaPrimeSample, EmptyAndDeterministic) {
    EXPECT_TRUE(ratiouq::bp_sample(0, kDemo, 1).empty());
    EXPECT_EQ(ratiouq::bp_sample(100, kDemo, 42), ratiouq::bp_sample(100, kDemo, 42));
    EXPECT_NE(ratiouq::bp_sample(100, kDemo, 42), ratiouq::bp_sample(100, kDemo, 43));
}

TEST(BetaPrimeSample, KolmogorovSmirnov) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto xs = ratiouq::bp_sample(1000, kDemo, seed);
        const double d = oracle::ks_statistic(xs, [](double x) { return ratiouq::bp_cdf(x, kDemo); });
        EXPECT_LT(d, oracle::ks_critical_01(xs.size())) << seed;
    }
}

TEST(BetaPrimeSample, MeanMatchesClosedForm) {
    const GenBetaPrime d{3, 5, 1, 1};
    const auto xs = ratiouq::bp_sample(100000, d, 7);
    const double n = double(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / (n - 1.0) / n);
    EXPECT_NEAR(mean, 0.75, 3.0 * se);
    EXPECT_NEAR(ratiouq::bp_mean(d), 0.75, 1e-14);
}

TEST(BetaPrimeSample, PowerRelation) {
    const auto xs = ratiouq::bp_sample(2000, kDemo, 11);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(std::pow(x / kDemo.q, kDemo.p));
    const GenBetaPrime unit{kDemo.alpha, kDemo.beta, 1, 1};
    EXPECT_LT(oracle::ks_statistic(ys, [&](double y) { return ratiouq::bp_cdf(y, unit); }),
              oracle::ks_critical_01(ys.size()));
}

TEST(BetaPrimeSample, BetaRelation) {
    const auto xs = ratiouq::bp_sample(2000, kDemo, 12);
    const boost::math::beta_distribution<double> beta(kDemo.alpha, kDemo.beta);
    std::vector<double> zs;
    for (double x : xs) {
        const double y = std::pow(x / kDemo.q, kDemo.p);
        zs.push_back(y / (1.0 + y));
    }
    EXPECT_LT(oracle::ks_statistic(zs, [&](double z) { return boost::math::cdf(beta, z); }),
              oracle::ks_critical_01(zs.size()));
}

TEST(BetaPrimeMoments, ModeMaximizesDensity) {
    const GenBetaPrime d{4, 3, 1.5, 2};
    const double m = ratiouq::bp_mode(d);
    const double fm = ratiouq::bp_pdf(m, d);
    EXPECT_GT(fm, ratiouq::bp_pdf(m * 0.999, d));
    EXPECT_GT(fm, ratiouq::bp_pdf(m * 1.001, d));
    EXPECT_EQ(ratiouq::bp_mode({0.5, 3, 1, 1}), 0.0);
    EXPECT_TRUE(std::isinf(ratiouq::bp_mean({2, 0.5, 1, 1})));
}

TEST(BetaPrimeMoments, MeanMatchesQuadrature) {
    const auto f = [](double x) { return x * ratiouq::bp_pdf(x, kDemo); };
    const double hi = ratiouq::bp_quantile(1.0 - 1e-15, kDemo);
    EXPECT_NEAR(ratiouq::bp_mean(kDemo), oracle::integrate(f, 0.0, hi), 1e-8);
}
