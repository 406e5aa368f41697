#pragma once

// Scoring and credible sets on gridded predictive distributions.
//
// CRPS(F | x) = int (F(y) - H(y - x))^2 dy with H the Heaviside step (H(0) = 1). Gridded inputs
// use the trapezoid rule; a density is first integrated to a CDF by cumulative trapezoid and
// normalized by its final value.
//
// The alpha-HPD set {f >= h} solves int_{f >= h} f dx = alpha for the threshold h.

#include "ratiouq/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace ratiouq {

enum class GridKind { density, cdf };

/// Values of a pdf or cdf on a strictly increasing grid.
struct GriddedDensity {
    std::vector<double> grid;
    std::vector<double> values;
    GridKind kind = GridKind::density;

    void validate() const {
        if (grid.empty()) throw DomainError("gridded distribution has an empty grid");
        if (values.size() != grid.size()) throw ShapeError("grid and values differ in length");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!std::isfinite(grid[i])) throw DomainError("grid points must be finite");
            if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
            if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
                throw DomainError("gridded values must be finite and non-negative");
        }
    }
};

namespace detail {

// Trapezoid weights, so that sum_i w_i f_i is the trapezoid integral of f.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_quantile(double u) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace detail

/// Tolerance on the integral of a density before renormalization is flagged.
inline constexpr double kNormalizationTolerance = 1e-3;

/// Cumulative-trapezoid CDF of a gridded density, normalized by its final value and clamped to
/// [0, 1]. `mass` receives the un-normalized total.
inline std::vector<double> cdf_from_density(const GriddedDensity& g, double* mass = nullptr) {
    g.validate();
    std::vector<double> F(g.grid.size(), 0.0);
    for (std::size_t i = 1; i < g.grid.size(); ++i)
        F[i] = F[i - 1] + 0.5 * (g.values[i] + g.values[i - 1]) * (g.grid[i] - g.grid[i - 1]);
    const double total = F.back();
    if (mass) *mass = total;
    if (total > 0.0)
        for (double& v : F) v = std::clamp(v / total, 0.0, 1.0);
    return F;
}

struct CrpsResult {
    double value = 0.0;
    bool truncated = false;     // cdf does not reach ~0 / ~1 at the grid ends
    bool renormalized = false;  // density mass differed from 1 by more than the tolerance
    std::string warning;
};

inline CrpsResult crps(const GriddedDensity& g, double xhat) {
    g.validate();
    if (!std::isfinite(xhat)) throw DomainError("CRPS needs a finite observation");
    CrpsResult out;
    std::vector<double> F;
    if (g.kind == GridKind::density) {
        double mass = 0.0;
        F = cdf_from_density(g, &mass);
        if (!(mass > 0.0)) throw DomainError("density has zero mass on the grid");
        if (std::abs(mass - 1.0) > kNormalizationTolerance) {
            out.renormalized = true;
            out.warning = "density integrates to " + std::to_string(mass) + "; renormalized";
        }
    } else {
        F = g.values;
        for (double& v : F) v = std::clamp(v, 0.0, 1.0);
        for (std::size_t i = 1; i < F.size(); ++i)
            if (F[i] < F[i - 1] - 1e-12) throw DomainError("cdf values must be non-decreasing");
        if (F.front() > kNormalizationTolerance || F.back() < 1.0 - kNormalizationTolerance) {
            out.truncated = true;
            out.warning = "cdf does not span [0, 1] on the grid";
        }
    }

    const auto& y = g.grid;
    auto integrand = [&](std::size_t i) {
        const double h = y[i] >= xhat ? 1.0 : 0.0;
        return (F[i] - h) * (F[i] - h);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i)
        total += 0.5 * (integrand(i) + integrand(i + 1)) * (y[i + 1] - y[i]);
    // Observation beyond the grid: F is constant out there.
    if (xhat > y.back()) total += (xhat - y.back()) * F.back() * F.back();
    if (xhat < y.front()) total += (y.front() - xhat) * (1.0 - F.front()) * (1.0 - F.front());
    out.value = total;
    return out;
}

/// Closed-form CRPS of N(mu, sigma^2): sigma [z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)].
inline double crps_gaussian(double mu, double sigma, double xhat) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
    const double z = (xhat - mu) / sigma;
    return sigma * (z * (2.0 * detail::normal_cdf(z) - 1.0) + 2.0 * detail::normal_pdf(z) -
                    1.0 / std::sqrt(std::numbers::pi));
}

struct HpdSet {
    std::vector<std::size_t> members;  // grid indices, ascending
    std::vector<double> member_points;
    std::vector<std::pair<double, double>> intervals;
    double threshold = 0.0;
    double achieved_mass = 0.0;
    bool renormalized = false;
    std::string warning;

    double lower() const { return intervals.empty() ? std::nan("") : intervals.front().first; }
    double upper() const { return intervals.empty() ? std::nan("") : intervals.back().second; }
    bool contains(double x) const {
        for (const auto& [a, b] : intervals)
            if (x >= a && x <= b) return true;
        return false;
    }
};

/// Highest-density set of mass alpha on a gridded density.
///
/// The threshold is found by bisection of g(h) = mass{f >= h} - alpha on [0, max f], keeping
/// g(lo) >= 0 > g(hi), then snapped to the smallest member density. On plateaus (ties at the
/// threshold that would overshoot alpha by more than the grid tolerance) tied points are added
/// left to right until the mass reaches alpha.
inline HpdSet hpd_set(const GriddedDensity& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("HPD mass must lie in (0, 1)");
    if (g.kind != GridKind::density) throw DomainError("HPD sets need a density");
    g.validate();
    HpdSet out;
    const std::size_t n = g.grid.size();
    const auto w = detail::trapezoid_weights(g.grid);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w[i] * g.values[i];
    if (!(total > 0.0)) throw DomainError("density has zero mass on the grid");
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
        out.renormalized = true;
        out.warning = "density integrates to " + std::to_string(total) + "; renormalized";
    }
    std::vector<double> f(g.values);
    for (double& v : f) v /= total;
    const double fmax = *std::max_element(f.begin(), f.end());

    auto mass_above = [&](double h) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (f[i] >= h) m += w[i] * f[i];
        return m;
    };

    double h = fmax;
    if (mass_above(fmax) < alpha) {
        double lo = 0.0, hi = fmax;
        while (hi - lo > 1e-10 * fmax) {
            const double mid = 0.5 * (lo + hi);
            (mass_above(mid) >= alpha ? lo : hi) = mid;
        }
        h = fmax;
        for (double v : f)
            if (v >= lo && v < h) h = v;
    }

    const double tie = 1e-12 * fmax;
    const double slack = std::max(kNormalizationTolerance,
                                  2.0 * fmax * (g.grid.back() - g.grid.front()) / double(std::max<std::size_t>(n - 1, 1)));
    std::vector<char> in(n, 0);
    double strict_mass = 0.0, tied_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (f[i] > h + tie) {
            in[i] = 1;
            strict_mass += w[i] * f[i];
        } else if (f[i] >= h - tie) {
            tied_mass += w[i] * f[i];
        }
    }
    const bool plateau = strict_mass + tied_mass - alpha > slack;
    double mass = strict_mass;
    for (std::size_t i = 0; i < n; ++i) {
        if (in[i] || f[i] < h - tie || f[i] > h + tie) continue;
        if (plateau && mass >= alpha) break;
        in[i] = 1;
        mass += w[i] * f[i];
    }

    out.threshold = h * total;
    out.achieved_mass = mass;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in[i]) continue;
        out.members.push_back(i);
        out.member_points.push_back(g.grid[i]);
        if (i > 0 && in[i - 1])
            out.intervals.back().second = g.grid[i];
        else
            out.intervals.emplace_back(g.grid[i], g.grid[i]);
    }
    return out;
}

/// Central (= HPD) interval of N(mu, sigma^2): mu + sigma Phi^-1((1 -+ alpha) / 2).
inline HpdSet hpd_interval_gaussian(double mu, double sigma, double alpha) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("HPD mass must lie in (0, 1)");
    const double z = detail::normal_quantile(0.5 * (1.0 + alpha));
    HpdSet out;
    out.intervals.emplace_back(mu - sigma * z, mu + sigma * z);
    out.threshold = detail::normal_pdf(z) / sigma;
    out.achieved_mass = alpha;
    return out;
}

}  // namespace ratiouq
