#include "oracles.hpp"
#include "ratiouq/ratio.hpp"
#include "ratiouq/synthetic.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ratiouq;

namespace {

CountData single(double v) { return CountData::from_vector(Vector::Constant(1, v)); }

}  // namespace

TEST(Zbetaprime, ConjugateArithmetic) {
    const RatioPosterior r = zbetaprime(single(30), single(10));
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r.bins[0], (GenBetaPrime{31, 11, 1, 1}));
    EXPECT_TRUE(r.valid[0]);
    EXPECT_DOUBLE_EQ(r.map_estimate(0), 3.0);  // modes 30 and 10
}

TEST(Zbetaprime, SymmetricInputsHaveUnitMedian) {
    const RatioPosterior r = zbetaprime(single(17), single(17), {2, 0.5, 2, 0.5});
    EXPECT_NEAR(bp_median(r.bins[0]), 1.0, 1e-12);
}

TEST(Zbetaprime, MissingRealizationsAndInvalidBins) {
    Matrix num(3, 2), den(3, 2);
    num << 4, 6, NAN, 3, NAN, NAN;
    den << 2, NAN, 5, 5, 1, 1;
    const RatioPosterior r = zbetaprime(CountData(num), CountData(den));
    EXPECT_EQ(r.bins[0], (GenBetaPrime{11, 3, 1, 0.5}));
    EXPECT_EQ(r.bins[1], (GenBetaPrime{4, 11, 1, 2.0}));
    EXPECT_FALSE(r.valid[2]);
    EXPECT_TRUE(std::isnan(r.map_estimate(2)));
    // A proper prior rescues the empty bin.
    const RatioPosterior p = zbetaprime(CountData(num), CountData(den), {2, 3, 1, 0});
    EXPECT_TRUE(p.valid[2]);
    EXPECT_EQ(p.bins[2], (GenBetaPrime{2, 3, 1, 2.0 / 3.0}));
}

TEST(Zbetaprime, ZeroDataReturnsPriorLaw) {
    Matrix num(2, 1), den(2, 1);
    num << NAN, 5;
    den << NAN, 2;
    const RatioPosterior r = zbetaprime(CountData(num), CountData(den), {2.5, 1.5, 4, 2});
    EXPECT_EQ(r.bins[0], (GenBetaPrime{2.5, 4, 1, 2.0 / 1.5}));
}

TEST(Zbetaprime, Errors) {
    EXPECT_THROW(zbetaprime(single(1), CountData::from_vector(Vector::Ones(2))), ShapeError);
    EXPECT_THROW(zbetaprime(single(1), single(1), {0, 0, 1, 0}), ParameterError);
    EXPECT_THROW(zbetaprime(single(1), single(1), {1, -1, 1, 0}), ParameterError);
}

TEST(Zbetaprime, MonteCarloCdf) {
    const RatioPosterior r = zbetaprime(single(30), single(10));
    std::mt19937_64 rng(17);
    std::gamma_distribution<double> ga(31, 1), gb(11, 1);
    std::vector<double> z(1000000);
    for (auto& v : z) v = ga(rng) / gb(rng);
    std::sort(z.begin(), z.end());
    for (double zs : {1.0, 3.0, 5.0}) EXPECT_LT(std::abs(oracle::ecdf(z, zs) - bp_cdf(zs, r.bins[0])), 0.005) << zs;
}

TEST(RatioPermproc, IdenticalDataGivesSymmetricPosterior) {
    const ToyProblem toy = toy_ratio_problem(30, 4);
    const KernelMatrix k = wendland_kernel(toy.grid, 0.75);
    const RatioPosterior r = ratio_estimation_permproc(toy.numerator, toy.numerator, k);
    ASSERT_TRUE(r.converged());
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_NEAR(r.bins[i].q, 1.0, 1e-12);
        EXPECT_NEAR(r.bins[i].alpha, r.bins[i].beta, 1e-12 * r.bins[i].alpha);
        EXPECT_NEAR(bp_median(r.bins[i]), 1.0, 1e-9);
        EXPECT_NEAR(r.map_estimate(Eigen::Index(i)), 1.0, 1e-12);
    }
}

TEST(RatioPermproc, FlatIntensities) {
    const BinGrid grid = BinGrid::uniform(-1, 1, 40);
    const KernelMatrix k = wendland_kernel(grid, 0.75);
    std::size_t hits = 0, total = 0;
    for (std::uint64_t s = 0; s < 8; ++s) {
        const CountData a = simulate_binned_poisson(Vector::Constant(40, 30.0), 1, 500 + s);
        const CountData b = simulate_binned_poisson(Vector::Constant(40, 10.0), 1, 900 + s);
        const RatioPosterior r = ratio_estimation_permproc(a, b, k);
        for (const auto& bp : r.bins) {
            const double iqr = bp_quantile(0.75, bp) - bp_quantile(0.25, bp);
            hits += std::abs(bp_median(bp) - 3.0) <= 3.0 * iqr;
            ++total;
        }
    }
    EXPECT_GE(double(hits) / double(total), 0.9);
}

TEST(RatioPermproc, ParametersComeFromTheTwoFits) {
    const ToyProblem toy = toy_ratio_problem(25, 5);
    const KernelMatrix k1 = wendland_kernel(toy.grid, 0.75);
    const KernelMatrix k2 = wendland_kernel(toy.grid, 0.5, 2.0);
    const RatioOptions opt{1.5, 0.8, 2.0, 0.5, 300};
    const RatioPosterior r = ratio_estimation_permproc(toy.numerator, toy.denominator, k1, k2, opt);
    const PermanentalFit fa = permprocest(toy.numerator, k1, {2.0, 1.5, 300});
    const PermanentalFit fb = permprocest(toy.denominator, k2, {0.5, 0.8, 300});
    for (Eigen::Index i = 0; i < 25; ++i) {
        const auto& bp = r.bins[std::size_t(i)];
        EXPECT_DOUBLE_EQ(bp.alpha, fa.gamma_post.shape(i));
        EXPECT_DOUBLE_EQ(bp.beta, fb.gamma_post.shape(i));
        EXPECT_DOUBLE_EQ(bp.p, 1.0);
        EXPECT_DOUBLE_EQ(bp.q, fb.gamma_post.rate(i) / fa.gamma_post.rate(i));
        EXPECT_DOUBLE_EQ(r.map_estimate(i), fa.lambda_hat(i) / fb.lambda_hat(i));
    }
    EXPECT_THROW(ratio_estimation_permproc(toy.numerator, CountData::from_vector(Vector::Ones(3)), k1), ShapeError);
}

TEST(RatioPermproc, NonConvergenceIsFlagged) {
    const ToyProblem toy = toy_ratio_problem(30, 6);
    const KernelMatrix k = wendland_kernel(toy.grid, 0.75);
    const RatioPosterior r = ratio_estimation_permproc(toy.numerator, toy.denominator, k, {1, 1, 1, 1, 1});
    EXPECT_FALSE(r.converged());
    EXPECT_EQ(r.size(), 30u);
}

TEST(RatioPermproc, SwapGivesReciprocalLaw) {
    const ToyProblem toy = toy_ratio_problem(20, 7);
    const KernelMatrix k = wendland_kernel(toy.grid, 0.75);
    const RatioPosterior ab = ratio_estimation_permproc(toy.numerator, toy.denominator, k);
    const RatioPosterior ba = ratio_estimation_permproc(toy.denominator, toy.numerator, k);
    for (std::size_t i = 0; i < ab.size(); ++i) {
        EXPECT_NEAR(ba.bins[i].alpha, ab.bins[i].beta, 1e-12 * ab.bins[i].beta);
        EXPECT_NEAR(ba.bins[i].q, 1.0 / ab.bins[i].q, 1e-12 / ab.bins[i].q);
        for (double z : {0.2, 0.7, 1.0, 2.5})
            EXPECT_NEAR(bp_cdf(z, ba.bins[i]), 1.0 - bp_cdf(1.0 / z, ab.bins[i]), 1e-10);
    }
}

TEST(QoiModel, Validation) {
    EXPECT_THROW((QoiModel{-1, 0, 1}).validate(), UnsupportedModelError);
    EXPECT_THROW((QoiModel{1, 0, -0.5}).validate(), UnsupportedModelError);
    EXPECT_THROW((QoiModel{0, 0, 1}).validate(), UnsupportedModelError);
    EXPECT_THROW((QoiModel{1, NAN, 1}).validate(), ParameterError);
    const QoiModel m{0.2, -2, 0.5};
    EXPECT_DOUBLE_EQ(m.support_start(), 10.0);
    EXPECT_NEAR(m.qoi_from_ratio(m.ratio_from_qoi(17.0)), 17.0, 1e-12);
}

TEST(QoiPosterior, IdentityModelReproducesRatio) {
    const RatioPosterior r = zbetaprime(CountData::from_vector(Vector::Constant(3, 12)),
                                        CountData::from_vector(Vector::Constant(3, 4)));
    const QoiPosterior t = qoi_posterior(r, QoiModel{});
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(t.bins[i].shift, 0.0);
        EXPECT_EQ(t.bins[i].bp, r.bins[i]);
        EXPECT_DOUBLE_EQ(t.map_estimate(Eigen::Index(i)), r.map_estimate(Eigen::Index(i)));
    }
}

TEST(QoiPosterior, QuantilePushForward) {
    const ToyQoiProblem toy = toy_qoi_problem(20, 8);
    const KernelMatrix k = wendland_kernel(toy.ratio.grid, 0.75);
    QoiOptions opt;
    opt.kernel_num = &k;
    const QoiPosterior t = t_given_ab(toy.ratio.numerator, toy.ratio.denominator, toy.model, opt);
    const RatioPosterior z = ratio_estimation_permproc(toy.ratio.numerator, toy.ratio.denominator, k);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_DOUBLE_EQ(t.bins[i].shift, 10.0);
        for (double u : {0.1, 0.5, 0.9}) {
            const double qz = bp_quantile(u, z.bins[i]);
            const double expect = 5.0 * (qz * qz + 2.0);
            EXPECT_NEAR(t.bins[i].quantile(u), expect, 1e-8 * expect);
        }
    }
}

TEST(QoiPosterior, CdfPushForward) {
    const RatioPosterior r = zbetaprime(single(30), single(10));
    for (const QoiModel& m : {QoiModel{0.2, -2, 0.5}, QoiModel{3.0, 1.5, 2.0}, QoiModel{0.7, 0.0, 1.3}}) {
        const ShiftedBetaPrime t = qoi_posterior(r, m).bins[0];
        for (double x = m.support_start() + 0.01; x < m.support_start() + 60; x += 0.37)
            EXPECT_NEAR(t.cdf(x), bp_cdf(m.ratio_from_qoi(x), r.bins[0]), 1e-10);
        EXPECT_EQ(t.cdf(m.support_start() - 1.0), 0.0);
        EXPECT_EQ(t.pdf(m.support_start() - 1.0), 0.0);
    }
}

TEST(QoiPosterior, MonteCarloKs) {
    const RatioPosterior r = zbetaprime(single(30), single(10));
    const QoiModel m{0.2, -2, 0.5};
    const ShiftedBetaPrime t = qoi_posterior(r, m).bins[0];
    std::vector<double> ts;
    for (double z : bp_sample(2000, r.bins[0], 99)) ts.push_back(m.qoi_from_ratio(z));
    EXPECT_LT(oracle::ks_statistic(ts, [&](double x) { return t.cdf(x); }), oracle::ks_critical_01(ts.size()));
}

TEST(QoiPosterior, PerBinModelsAndShapes) {
    const RatioPosterior r = zbetaprime(CountData::from_vector(Vector::Constant(2, 5)),
                                        CountData::from_vector(Vector::Constant(2, 5)));
    const std::vector<QoiModel> models{{1, 0, 1}, {2, 1, 1}};
    const QoiPosterior t = qoi_posterior(r, models);
    EXPECT_DOUBLE_EQ(t.bins[1].shift, -0.5);
    EXPECT_DOUBLE_EQ(t.bins[1].bp.q, 0.5);
    const std::vector<QoiModel> three(3);
    EXPECT_THROW(qoi_posterior(r, three), ShapeError);
}

TEST(TGivenAb, DispatchAndErrors) {
    const CountData a = CountData::from_vector(Vector::Constant(4, 8));
    const CountData b = CountData::from_vector(Vector::Constant(4, 2));
    QoiOptions opt;
    EXPECT_THROW(t_given_ab(a, b, QoiModel{}, opt), ParameterError);
    EXPECT_THROW(t_given_ab(a, b, QoiModel{-1, 0, 1}, opt), UnsupportedModelError);
    opt.spatial = false;
    const QoiPosterior t = t_given_ab(a, b, QoiModel{}, opt);
    EXPECT_EQ(t.bins[0].bp, (GenBetaPrime{9, 3, 1, 1}));
}
