#pragma once

// Preconditioned nonlinear conjugate gradient (Polak-Ribiere+, Powell restarts) with a
// strong-Wolfe line search. The objective may return +inf to mark infeasible points; the line
// search treats those as overshoots and backtracks. Near the optimum, where value differences
// drop below roundoff, the approximate Wolfe test of Hager and Zhang (CG_DESCENT) is used.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ratiouq {

struct NcgOptions {
    int max_iterations = 300;
    double gradient_tolerance = 1e-6;  // absolute, max-norm
    double armijo = 1e-4;
    double curvature = 0.1;
    int max_line_search = 40;
    double value_noise = 1e-12;  // relative roundoff allowance on the objective
};

struct NcgResult {
    Eigen::VectorXd x;
    Eigen::VectorXd gradient;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string status;
};

namespace detail {

// Minimizer of the quadratic through (a, fa) with slope da at a and value fb at b.
inline double quadratic_step(double a, double fa, double da, double b, double fb) {
    const double h = b - a;
    const double denom = 2.0 * (fb - fa - da * h);
    if (!(denom > 0.0)) return 0.5 * (a + b);
    return a - da * h * h / denom;
}

}  // namespace detail

/// Minimizes f. `fg(x, grad)` returns f(x) and writes the gradient (grad may be left untouched
/// when the value is +inf). `precondition(g)` returns M^-1 g for an SPD approximation M of the
/// Hessian; pass an identity lambda for plain NCG.
template <typename ValueGrad, typename Preconditioner>
NcgResult minimize_ncg(ValueGrad&& fg, Preconditioner&& precondition, Eigen::VectorXd x0,
                       const NcgOptions& opt = {}) {
    using Eigen::VectorXd;
    constexpr double inf = std::numeric_limits<double>::infinity();

    NcgResult res;
    res.x = std::move(x0);
    res.gradient.resize(res.x.size());
    res.value = fg(res.x, res.gradient);
    ++res.evaluations;
    if (!std::isfinite(res.value)) {
        res.status = "objective not finite at the starting point";
        return res;
    }

    VectorXd z = precondition(res.gradient);
    VectorXd dir = -z;
    double gz = res.gradient.dot(z);
    const auto n = res.x.size();

    VectorXd xt(n), gt(n);
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        if (res.gradient.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance) {
            res.converged = true;
            res.status = "gradient tolerance met";
            return res;
        }
        double slope = res.gradient.dot(dir);
        if (!(slope < 0.0)) {
            dir = -z;
            slope = -gz;
            if (!(slope < 0.0)) {
                res.status = "no descent direction";
                return res;
            }
        }

        // Strong-Wolfe line search along dir.
        const double f0 = res.value;
        auto phi = [&](double t, double& dphi) {
            xt = res.x + t * dir;
            const double v = fg(xt, gt);
            ++res.evaluations;
            dphi = std::isfinite(v) ? gt.dot(dir) : inf;
            return std::isfinite(v) ? v : inf;
        };
        auto sufficient = [&](double t, double v) { return v <= f0 + opt.armijo * t * slope; };
        auto curvature_ok = [&](double d) { return std::abs(d) <= -opt.curvature * slope; };
        const double noise = opt.value_noise * std::max(1.0, std::abs(f0));
        // Value equal to f0 within roundoff with a flat enough slope.
        auto approx_wolfe = [&](double v, double d) {
            return v <= f0 + noise && curvature_ok(d) && d <= (1.0 - 2.0 * opt.armijo) * -slope;
        };

        double t_lo = 0.0, f_lo = f0, d_lo = slope;
        double t_hi = inf, f_hi = inf;
        double t = 1.0;
        bool accepted = false;
        double accepted_value = f0;
        double best_t = 0.0, best_f = f0;
        VectorXd best_x, best_g;
        for (int ls = 0; ls < opt.max_line_search; ++ls) {
            double d = 0.0;
            const double v = phi(t, d);
            if (std::isfinite(v) && sufficient(t, v) && v < best_f) {
                best_t = t;
                best_f = v;
                best_x = xt;
                best_g = gt;
            }
            if (std::isfinite(v) && approx_wolfe(v, d)) {
                accepted = true;
                accepted_value = v;
                break;
            }
            const bool level = std::isfinite(v) && std::abs(v - f_lo) <= noise;
            const bool overshoot = level ? d >= 0.0 && !curvature_ok(d) : !sufficient(t, v) || v >= f_lo;
            if (!std::isfinite(v) || overshoot) {
                t_hi = t;
                f_hi = v;
            } else if (curvature_ok(d)) {
                accepted = true;
                accepted_value = v;
                break;
            } else if (std::isfinite(t_hi) ? d * (t_hi - t_lo) >= 0.0 : d >= 0.0) {
                t_hi = t_lo;
                f_hi = f_lo;
                t_lo = t;
                f_lo = v;
                d_lo = d;
            } else {
                t_lo = t;
                f_lo = v;
                d_lo = d;
            }
            if (std::isfinite(t_hi)) {
                const double lo = std::min(t_lo, t_hi), hi = std::max(t_lo, t_hi);
                double trial = std::isfinite(f_hi) ? detail::quadratic_step(t_lo, f_lo, d_lo, t_hi, f_hi)
                                                   : 0.5 * (t_lo + t_hi);
                const double margin = 0.1 * (hi - lo);
                trial = std::clamp(trial, lo + margin, hi - margin);
                if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
                t = trial;
            } else {
                t *= 4.0;
            }
        }

        if (!accepted) {
            if (best_t == 0.0) {
                res.status = "line search failed";
                return res;
            }
            xt = best_x;
            gt = best_g;
        }
        const double f_accept = accepted ? accepted_value : best_f;

        VectorXd g_old = res.gradient;
        const double gz_old = gz;
        res.x = xt;
        res.gradient = gt;
        res.value = f_accept;
        z = precondition(res.gradient);
        gz = res.gradient.dot(z);

        // Polak-Ribiere+ with Powell restart on loss of conjugacy.
        double beta = gz_old > 0.0 ? z.dot(res.gradient - g_old) / gz_old : 0.0;
        if (beta < 0.0 || std::abs(z.dot(g_old)) >= 0.2 * gz ||
            (res.iterations + 1) % std::max<Eigen::Index>(n, 1) == 0)
            beta = 0.0;
        dir = -z + beta * dir;
    }

    if (res.gradient.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance) {
        res.converged = true;
        res.status = "gradient tolerance met";
    } else {
        res.status = "iteration limit reached";
    }
    return res;
}

}  // namespace ratiouq
