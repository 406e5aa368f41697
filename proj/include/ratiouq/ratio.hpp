#pragma once

// Posterior laws of intensity ratios Z = Lambda_a / Lambda_b and of a quantity of interest T
// linked to Z by Z = (m T + z0)^p.
//
// With independent Lambda_a ~ Gamma(alpha_a, beta_a), Lambda_b ~ Gamma(alpha_b, beta_b):
//   Z ~ BP(alpha_a, alpha_b, 1, beta_b / beta_a)
//   T ~ -z0/m + BP(alpha_a, alpha_b, p, q^(1/p) / m)

#include "ratiouq/betaprime.hpp"
#include "ratiouq/errors.hpp"
#include "ratiouq/kernel.hpp"
#include "ratiouq/permanental.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ratiouq {

/// Per-bin ratio posterior BP(alpha_a, alpha_b, 1, q).
struct RatioPosterior {
    std::vector<GenBetaPrime> bins;
    Vector map_estimate;
    std::vector<char> valid;  // zero for bins without a proper posterior
    bool numerator_converged = true;
    bool denominator_converged = true;

    std::size_t size() const noexcept { return bins.size(); }
    bool converged() const noexcept { return numerator_converged && denominator_converged; }
};

/// Forward model Z = (m T + z0)^p. Only increasing transforms (m > 0, p > 0) are supported.
struct QoiModel {
    double m = 1.0;
    double z0 = 0.0;
    double p = 1.0;

    void validate() const {
        if (!std::isfinite(m) || !std::isfinite(z0) || !std::isfinite(p))
            throw ParameterError("forward model coefficients must be finite");
        if (!(m > 0.0) || !(p > 0.0))
            throw UnsupportedModelError("forward model requires m > 0 and p > 0");
    }

    double ratio_from_qoi(double t) const { return std::pow(m * t + z0, p); }
    double qoi_from_ratio(double z) const { return (std::pow(z, 1.0 / p) - z0) / m; }
    double support_start() const { return -z0 / m; }
};

/// shift + BP(alpha, beta, p, q).
struct ShiftedBetaPrime {
    double shift = 0.0;
    GenBetaPrime bp;

    double pdf(double t) const { return t < shift ? 0.0 : bp_pdf(t - shift, bp); }
    double cdf(double t) const { return t <= shift ? 0.0 : bp_cdf(t - shift, bp); }
    double quantile(double u) const { return shift + bp_quantile(u, bp); }
};

struct QoiPosterior {
    std::vector<ShiftedBetaPrime> bins;
    Vector map_estimate;  // forward model inverted at the MAP ratio
    std::vector<char> valid;
    bool converged = true;

    std::size_t size() const noexcept { return bins.size(); }
};

/// Ratio posterior from two per-bin Gamma posteriors; map_estimate is left to the caller.
inline RatioPosterior ratio_from_gammas(const GammaPosterior& num, const GammaPosterior& den) {
    const auto d = num.shape.size();
    if (den.shape.size() != d || num.rate.size() != d || den.rate.size() != d)
        throw ShapeError("numerator and denominator posteriors have different bin counts");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    RatioPosterior out;
    out.bins.resize(std::size_t(d));
    out.valid.assign(std::size_t(d), 1);
    out.map_estimate = Vector::Constant(d, nan);
    for (Eigen::Index i = 0; i < d; ++i) {
        GenBetaPrime bp{num.shape(i), den.shape(i), 1.0, den.rate(i) / num.rate(i)};
        if (!(num.rate(i) > 0.0) || !(den.rate(i) > 0.0) || !bp.valid()) {
            out.valid[std::size_t(i)] = 0;
            bp = {nan, nan, 1.0, nan};
        }
        out.bins[std::size_t(i)] = bp;
    }
    return out;
}

/// Ratio posterior from two permanental fits over the same bins.
inline RatioPosterior ratio_from_fits(const PermanentalFit& num, const PermanentalFit& den) {
    RatioPosterior out = ratio_from_gammas(num.gamma_post, den.gamma_post);
    out.map_estimate = num.lambda_hat.cwiseQuotient(den.lambda_hat);
    out.numerator_converged = num.converged;
    out.denominator_converged = den.converged;
    return out;
}

struct RatioOptions {
    double c1 = 1.0;
    double c2 = 1.0;
    double g1 = 1.0;
    double g2 = 1.0;
    int maxiter = 300;
};

/// Independent permanental fits of numerator and denominator, combined per bin.
inline RatioPosterior ratio_estimation_permproc(const CountData& num, const CountData& den,
                                                const KernelMatrix& k_num, const KernelMatrix& k_den,
                                                const RatioOptions& opt = {}) {
    if (num.bins() != den.bins()) throw ShapeError("numerator and denominator bin counts differ");
    const auto fa = permprocest(num, k_num, {opt.g1, opt.c1, opt.maxiter});
    const auto fb = permprocest(den, k_den, {opt.g2, opt.c2, opt.maxiter});
    return ratio_from_fits(fa, fb);
}

inline RatioPosterior ratio_estimation_permproc(const CountData& num, const CountData& den,
                                                const KernelMatrix& k, const RatioOptions& opt = {}) {
    return ratio_estimation_permproc(num, den, k, k, opt);
}

/// Gamma(shape, rate) priors for the pointwise conjugate model; the defaults are flat.
struct ConjugatePriors {
    double a1 = 1.0;
    double b1 = 0.0;
    double a2 = 1.0;
    double b2 = 0.0;
};

/// Pointwise conjugate update: Gamma(a + S_i, b + n_i) per bin, where S_i sums the n_i present
/// realizations. Bins whose posterior rate is zero are flagged invalid. map_estimate is the ratio
/// of the two posterior modes.
inline RatioPosterior zbetaprime(const CountData& num, const CountData& den,
                                 const ConjugatePriors& pri = {}) {
    if (num.bins() != den.bins()) throw ShapeError("numerator and denominator bin counts differ");
    if (!(pri.a1 > 0.0) || !(pri.a2 > 0.0)) throw ParameterError("prior shapes must be positive");
    if (!(pri.b1 >= 0.0) || !(pri.b2 >= 0.0)) throw ParameterError("prior rates must be non-negative");
    GammaPosterior ga{(pri.a1 + num.summed().array()).matrix(),
                      (pri.b1 + num.exposure().array()).matrix()};
    GammaPosterior gb{(pri.a2 + den.summed().array()).matrix(),
                      (pri.b2 + den.exposure().array()).matrix()};
    RatioPosterior out = ratio_from_gammas(ga, gb);
    for (Eigen::Index i = 0; i < ga.shape.size(); ++i) {
        if (!out.valid[std::size_t(i)]) continue;
        const double mode_a = std::max(ga.shape(i) - 1.0, 0.0) / ga.rate(i);
        const double mode_b = std::max(gb.shape(i) - 1.0, 0.0) / gb.rate(i);
        out.map_estimate(i) = mode_b > 0.0 ? mode_a / mode_b
                                           : (mode_a > 0.0 ? std::numeric_limits<double>::infinity()
                                                           : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

/// Push a ratio posterior through the forward model. `models` holds one shared model or one per
/// bin.
inline QoiPosterior qoi_posterior(const RatioPosterior& ratio, std::span<const QoiModel> models) {
    const auto d = ratio.size();
    if (models.size() != 1 && models.size() != d)
        throw ShapeError("forward model must be shared or given per bin");
    for (const auto& m : models) m.validate();
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    QoiPosterior out;
    out.bins.resize(d);
    out.valid = ratio.valid;
    out.map_estimate = Vector::Constant(Eigen::Index(d), nan);
    out.converged = ratio.converged();
    for (std::size_t i = 0; i < d; ++i) {
        const QoiModel& m = models.size() == 1 ? models[0] : models[i];
        const GenBetaPrime& z = ratio.bins[i];
        out.bins[i].shift = m.support_start();
        out.bins[i].bp = {z.alpha, z.beta, m.p, std::pow(z.q, 1.0 / m.p) / m.m};
        if (!out.valid[i]) continue;
        const double zm = ratio.map_estimate(Eigen::Index(i));
        if (std::isfinite(zm) && zm >= 0.0) out.map_estimate(Eigen::Index(i)) = m.qoi_from_ratio(zm);
    }
    return out;
}

inline QoiPosterior qoi_posterior(const RatioPosterior& ratio, const QoiModel& model) {
    return qoi_posterior(ratio, std::span<const QoiModel>(&model, 1));
}

struct QoiOptions {
    bool spatial = true;
    // Spatial (permanental) path. kernel_den defaults to kernel_num.
    const KernelMatrix* kernel_num = nullptr;
    const KernelMatrix* kernel_den = nullptr;
    RatioOptions permanental{};
    // Pointwise path.
    ConjugatePriors priors{};
};

/// Posterior of the quantity of interest: permanental ratio fit when `spatial`, pointwise
/// conjugate otherwise, then the shifted Beta Prime push-forward.
inline QoiPosterior t_given_ab(const CountData& num, const CountData& den,
                               std::span<const QoiModel> models, const QoiOptions& opt = {}) {
    for (const auto& m : models) m.validate();
    if (opt.spatial) {
        if (!opt.kernel_num) throw ParameterError("spatial estimation requires a kernel matrix");
        const KernelMatrix& k2 = opt.kernel_den ? *opt.kernel_den : *opt.kernel_num;
        return qoi_posterior(ratio_estimation_permproc(num, den, *opt.kernel_num, k2, opt.permanental),
                             models);
    }
    return qoi_posterior(zbetaprime(num, den, opt.priors), models);
}

inline QoiPosterior t_given_ab(const CountData& num, const CountData& den, const QoiModel& model,
                               const QoiOptions& opt = {}) {
    return t_given_ab(num, den, std::span<const QoiModel>(&model, 1), opt);
}

}  // namespace ratiouq
