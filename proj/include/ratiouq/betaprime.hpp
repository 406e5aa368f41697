#pragma once

// Generalized Beta Prime distribution BP(alpha, beta, p, q) on [0, inf).
//
//   pdf(x) = p x^(alpha p - 1) / (q^(alpha p) B(alpha, beta) (1 + (x/q)^p)^(alpha + beta))
//
// If X ~ BP(alpha, beta, p, q) then Y = (X/q)^p ~ BP(alpha, beta, 1, 1) and
// Y / (1 + Y) ~ Beta(alpha, beta), which gives the CDF, quantile and sampler.

#include "ratiouq/errors.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace ratiouq {

struct GenBetaPrime {
    double alpha = 1.0;  // first shape
    double beta = 1.0;   // second shape
    double p = 1.0;      // power
    double q = 1.0;      // scale

    bool valid() const noexcept {
        return alpha > 0 && beta > 0 && p > 0 && q > 0 && std::isfinite(alpha) &&
               std::isfinite(beta) && std::isfinite(p) && std::isfinite(q);
    }

    void validate() const {
        if (!valid()) {
            std::ostringstream os;
            os << "invalid generalized Beta Prime parameters (alpha=" << alpha << ", beta=" << beta
               << ", p=" << p << ", q=" << q << ")";
            throw ParameterError(os.str());
        }
    }

    friend bool operator==(const GenBetaPrime&, const GenBetaPrime&) = default;
};

namespace detail {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// log(1 + e^t) without overflow.
inline double log1p_exp(double t) {
    if (t > 35.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

inline void check_support(double x) {
    if (!(x >= 0.0)) throw DomainError("generalized Beta Prime argument must be >= 0");
}

// Beta-law coordinates of x: z = x^p / (q^p + x^p) and its complement 1 - z, both
// computed without cancellation.
struct BetaCoord {
    double z;
    double zc;
};

inline BetaCoord beta_coord(double x, const GenBetaPrime& d) {
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    const double t = d.p * (std::log(x) - std::log(d.q));
    // z = 1/(1+e^-t), 1-z = 1/(1+e^t)
    return {std::exp(-log1p_exp(-t)), std::exp(-log1p_exp(t))};
}

}  // namespace detail

/// Log density. Returns -inf where the density is zero and +inf at x = 0 when alpha*p < 1.
inline double bp_logpdf(double x, const GenBetaPrime& d) {
    d.validate();
    detail::check_support(x);
    const double ap = d.alpha * d.p;
    const double lognorm = std::log(d.p) - ap * std::log(d.q) - detail::log_beta(d.alpha, d.beta);
    if (x == 0.0) {
        if (ap > 1.0) return -std::numeric_limits<double>::infinity();
        if (ap < 1.0) return std::numeric_limits<double>::infinity();
        return lognorm;
    }
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    const double logx = std::log(x);
    const double t = d.p * (logx - std::log(d.q));
    return lognorm + (ap - 1.0) * logx - (d.alpha + d.beta) * detail::log1p_exp(t);
}

/// Density, accumulated in log space. At x = 0 the boundary limit is returned:
/// 0 for alpha*p > 1, p / (q B(alpha, beta)) for alpha*p = 1 and +inf for alpha*p < 1.
inline double bp_pdf(double x, const GenBetaPrime& d) { return std::exp(bp_logpdf(x, d)); }

/// CDF via the regularized incomplete Beta function I_z(alpha, beta).
inline double bp_cdf(double x, const GenBetaPrime& d) {
    d.validate();
    detail::check_support(x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const auto [z, zc] = detail::beta_coord(x, d);
    if (z <= 0.5) return boost::math::ibeta(d.alpha, d.beta, z);
    return 1.0 - boost::math::ibeta(d.beta, d.alpha, zc);
}

/// Upper tail 1 - F(x), accurate where F(x) is close to one.
inline double bp_ccdf(double x, const GenBetaPrime& d) {
    d.validate();
    detail::check_support(x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const auto [z, zc] = detail::beta_coord(x, d);
    if (z <= 0.5) return 1.0 - boost::math::ibeta(d.alpha, d.beta, z);
    return boost::math::ibeta(d.beta, d.alpha, zc);
}

/// Quantile function. u = 1 returns +inf rather than throwing so that quantile grids over
/// [0, 1] stay total.
inline double bp_quantile(double u, const GenBetaPrime& d) {
    d.validate();
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return std::numeric_limits<double>::infinity();
    double wc = 0.0;
    const double w = boost::math::ibeta_inv(d.alpha, d.beta, u, &wc);
    if (wc <= 0.0) return std::numeric_limits<double>::infinity();
    if (w <= 0.0) return 0.0;
    return d.q * std::exp((std::log(w) - std::log(wc)) / d.p);
}

/// Mean, finite only when beta > 1/p.
inline double bp_mean(const GenBetaPrime& d) {
    d.validate();
    if (d.beta * d.p <= 1.0) return std::numeric_limits<double>::infinity();
    const double k = 1.0 / d.p;
    return d.q * std::exp(std::lgamma(d.alpha + k) + std::lgamma(d.beta - k) - std::lgamma(d.alpha) -
                          std::lgamma(d.beta));
}

/// Median, i.e. bp_quantile(0.5, d).
inline double bp_median(const GenBetaPrime& d) { return bp_quantile(0.5, d); }

/// Mode of the density (0 when alpha*p <= 1).
inline double bp_mode(const GenBetaPrime& d) {
    d.validate();
    const double ap = d.alpha * d.p;
    if (ap <= 1.0) return 0.0;
    return d.q * std::pow((ap - 1.0) / (d.beta * d.p + 1.0), 1.0 / d.p);
}

/// Draws n variates as q (Z / (1 - Z))^(1/p) with Z ~ Beta(alpha, beta). Z is built from two
/// Gamma draws G_a, G_b so that Z / (1 - Z) = G_a / G_b is formed without cancellation.
/// The generator is seeded per call; the same seed always reproduces the same draws.
inline std::vector<double> bp_sample(std::size_t n, const GenBetaPrime& d, std::uint64_t seed) {
    d.validate();
    std::vector<double> out;
    out.reserve(n);
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> ga(d.alpha, 1.0);
    std::gamma_distribution<double> gb(d.beta, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = ga(rng);
        const double b = gb(rng);
        out.push_back(d.q * std::pow(a / b, 1.0 / d.p));
    }
    return out;
}

}  // namespace ratiouq
