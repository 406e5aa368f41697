#pragma once

// MAP estimation of a binned Poisson intensity under a permanental-process prior.
//
// Counts a_i ~ Poisson(Lambda_i), Lambda_i = (c/2) f_i^2, f ~ N(0, K / gamma). With the
// equivalent kernel Ktilde and the representer form f = Ktilde psi the log posterior is
//
//   l(psi) = sum_i a_i log((c/2) (Ktilde psi)_i^2) - 1/2 psi^T Ktilde psi
//   grad   = -Ktilde psi + 2 Ktilde (a ./ Ktilde psi)
//
// The Laplace covariance of f at the MAP is (Ktilde^-1 + W)^-1 with W = diag(2 a_i / f_i^2),
// and each Lambda_i is moment-matched to a Gamma law.

#include "ratiouq/errors.hpp"
#include "ratiouq/kernel.hpp"
#include "ratiouq/ncg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace ratiouq {

/// Bins x realizations count matrix. Missing entries are NaN.
class CountData {
public:
    explicit CountData(Matrix counts) : counts_(std::move(counts)) { validate(); }

    /// Single realization.
    static CountData from_vector(std::span<const double> counts) {
        Matrix m(Eigen::Index(counts.size()), 1);
        for (std::size_t i = 0; i < counts.size(); ++i) m(Eigen::Index(i), 0) = counts[i];
        return CountData(std::move(m));
    }
    static CountData from_vector(const Vector& counts) { return CountData(Matrix(counts)); }

    std::size_t bins() const noexcept { return std::size_t(counts_.rows()); }
    std::size_t realizations() const noexcept { return std::size_t(counts_.cols()); }
    const Matrix& matrix() const noexcept { return counts_; }

    bool present(std::size_t bin, std::size_t r) const {
        return !std::isnan(counts_(Eigen::Index(bin), Eigen::Index(r)));
    }

    bool has_missing() const { return counts_.array().isNaN().any(); }

    /// Sum of present counts per bin.
    Vector summed() const {
        Vector s = Vector::Zero(counts_.rows());
        for (Eigen::Index i = 0; i < counts_.rows(); ++i)
            for (Eigen::Index r = 0; r < counts_.cols(); ++r)
                if (!std::isnan(counts_(i, r))) s(i) += counts_(i, r);
        return s;
    }

    /// Number of present realizations per bin.
    Vector exposure() const {
        Vector n = Vector::Zero(counts_.rows());
        for (Eigen::Index i = 0; i < counts_.rows(); ++i)
            for (Eigen::Index r = 0; r < counts_.cols(); ++r)
                if (!std::isnan(counts_(i, r))) n(i) += 1.0;
        return n;
    }

    friend bool operator==(const CountData& a, const CountData& b) {
        if (a.counts_.rows() != b.counts_.rows() || a.counts_.cols() != b.counts_.cols()) return false;
        const auto an = a.counts_.array().isNaN(), bn = b.counts_.array().isNaN();
        if ((an != bn).any()) return false;
        return (an || (a.counts_.array() == b.counts_.array())).all();
    }

private:
    void validate() const {
        if (counts_.rows() < 1 || counts_.cols() < 1) throw DataError("count data is empty");
        for (Eigen::Index r = 0; r < counts_.cols(); ++r) {
            bool any = false;
            for (Eigen::Index i = 0; i < counts_.rows(); ++i) {
                const double v = counts_(i, r);
                if (std::isnan(v)) continue;
                if (!std::isfinite(v) || v < 0.0 || std::floor(v) != v)
                    throw DataError("counts must be non-negative integers or NaN");
                any = true;
            }
            if (!any) throw DataError("realization " + std::to_string(r + 1) + " has no present entries");
        }
    }

    Matrix counts_;
};

/// Per-bin Gamma(shape, rate) laws.
struct GammaPosterior {
    Vector shape;
    Vector rate;
};

struct GammaParams {
    double shape;
    double rate;
};

/// Gamma law with the mean and variance of (c/2) f^2 for f ~ N(mu, sigma2):
/// mean (c/2)(mu^2 + sigma2), variance (c^2/2) sigma2 (2 mu^2 + sigma2).
inline GammaParams gamma_moment_match(double mu, double sigma2, double c) {
    if (!(sigma2 > 0.0)) throw ParameterError("moment matching needs a positive variance");
    if (!(c > 0.0)) throw ParameterError("scaling c must be positive");
    const double m2 = mu * mu;
    const double s = m2 + sigma2;
    const double t = 2.0 * m2 + sigma2;
    return {s * s / (2.0 * sigma2 * t), s / (sigma2 * c * t)};
}

/// Log posterior in representer coordinates. Returns -inf when (Ktilde psi)_i = 0 at a bin with
/// a_i > 0.
inline double log_posterior(const Vector& psi, const Vector& counts, const EquivalentKernel& eq,
                            double c) {
    if (psi.size() != counts.size() || std::size_t(psi.size()) != eq.size())
        throw ShapeError("log_posterior: dimension mismatch");
    const Vector f = eq.ktilde * psi;
    double like = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (counts(i) == 0.0) continue;
        if (f(i) == 0.0) return -std::numeric_limits<double>::infinity();
        like += counts(i) * std::log(0.5 * c * f(i) * f(i));
    }
    return like - 0.5 * psi.dot(f);
}

/// Analytic gradient -Ktilde psi + 2 Ktilde (a ./ Ktilde psi). Throws NumericalError when the
/// division is undefined.
inline Vector log_posterior_gradient(const Vector& psi, const Vector& counts,
                                     const EquivalentKernel& eq) {
    if (psi.size() != counts.size() || std::size_t(psi.size()) != eq.size())
        throw ShapeError("log_posterior_gradient: dimension mismatch");
    const Vector f = eq.ktilde * psi;
    Vector r(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (counts(i) == 0.0) {
            r(i) = 0.0;
            continue;
        }
        if (f(i) == 0.0) throw NumericalError("gradient undefined: latent value is zero at a bin with counts");
        r(i) = 2.0 * counts(i) / f(i);
    }
    return eq.ktilde * (r - psi);
}

/// Laplace covariance (Ktilde^-1 + W)^-1, W = diag(2 a_i / f_i^2), evaluated as
/// Ktilde - Ktilde S (I + S Ktilde S)^-1 S Ktilde with S = W^(1/2). Bins without counts have
/// W_ii = 0.
inline Matrix laplace_covariance(const EquivalentKernel& eq, const Vector& f, const Vector& counts) {
    const auto n = f.size();
    Vector s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (counts(i) == 0.0) {
            s(i) = 0.0;
        } else {
            if (f(i) == 0.0) throw NumericalError("Laplace covariance undefined at a zero latent value");
            s(i) = std::sqrt(2.0 * counts(i)) / std::abs(f(i));
        }
    }
    const Matrix& kt = eq.ktilde;
    Matrix b = s.asDiagonal() * kt * s.asDiagonal();
    b.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success) throw NumericalError("Laplace system is not positive definite");
    Matrix v = s.asDiagonal() * kt;
    llt.matrixL().solveInPlace(v);
    Matrix sigma = kt;
    sigma.noalias() -= v.transpose() * v;
    return 0.5 * (sigma + sigma.transpose());
}

struct PermanentalOptions {
    double gamma = 1.0;  // marginal precision g
    double c = 1.0;      // scaling
    int maxiter = 300;
    double gradient_tolerance = 1e-6;  // relative to 1 + |Ktilde a|_inf
};

struct PermanentalFit {
    Vector psi_hat;
    Vector f_hat;
    Vector lambda_hat;  // (c/2) f_hat^2, per realization
    Matrix sigma_hat;   // Laplace covariance of f
    Vector mu;
    Vector sigma2;
    GammaPosterior gamma_post;
    EquivalentKernel eq;
    Vector counts;  // summed over realizations
    std::size_t realizations = 1;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;
    double log_posterior = 0.0;
    std::string status;
};

/// MAP fit of the permanental model by preconditioned nonlinear conjugate gradient.
///
/// Multiple realizations share one intensity: counts are summed and the exposure term scales
/// with the number of present realizations per bin (c R in the equivalent kernel when nothing is
/// missing). Optimizer failure is reported through `converged`/`status`, not by throwing.
inline PermanentalFit permprocest(const CountData& data, const KernelMatrix& km,
                                  const PermanentalOptions& opt = {}) {
    if (data.bins() != km.size())
        throw ShapeError("count data has " + std::to_string(data.bins()) + " bins but the kernel is " +
                         std::to_string(km.size()) + "x" + std::to_string(km.size()));
    if (opt.maxiter < 1) throw ParameterError("maxiter must be at least 1");
    const double c = opt.c;

    PermanentalFit fit;
    fit.realizations = data.realizations();
    fit.counts = data.summed();
    const Vector exposure = data.exposure();
    fit.eq = equivalent_kernel(km, c, opt.gamma, exposure);
    const Vector& a = fit.counts;
    const EquivalentKernel& eq = fit.eq;
    const auto d = a.size();

    // Count-anchored start: f0 = sqrt(2 (rate + 1/2) / c), psi0 = 2 a ./ f0 (the fixed point of
    // the gradient equation).
    const double total_exposure = exposure.sum();
    const double mean_rate = total_exposure > 0.0 ? a.sum() / total_exposure : 0.0;
    Vector f0(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double rate = exposure(i) > 0.0 ? a(i) / exposure(i) : mean_rate;
        f0(i) = std::sqrt(2.0 * (rate + 0.5) / c);
    }
    Vector psi0 = 2.0 * a.cwiseQuotient(f0);

    auto feasible = [&](const Vector& f) {
        for (Eigen::Index i = 0; i < d; ++i)
            if (a(i) > 0.0 && !(f(i) > 0.0)) return false;
        return true;
    };
    if (!feasible(eq.ktilde * psi0)) {
        // Truncated spectral solve of Ktilde psi = f0 over the well-conditioned modes.
        const double hmax = eq.spectrum.maxCoeff();
        Vector inv = Vector::Zero(d);
        for (Eigen::Index j = 0; j < d; ++j)
            if (eq.spectrum(j) > 1e-6 * hmax) inv(j) = 1.0 / eq.spectrum(j);
        psi0 = eq.basis * inv.asDiagonal() * (eq.basis.transpose() * f0);
    }

    auto objective = [&](const Vector& psi, Vector& grad) {
        const Vector f = eq.ktilde * psi;
        if (!feasible(f)) return std::numeric_limits<double>::infinity();
        double like = 0.0;
        Vector r(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (a(i) == 0.0) {
                r(i) = 0.0;
            } else {
                like += a(i) * std::log(0.5 * c * f(i) * f(i));
                r(i) = 2.0 * a(i) / f(i);
            }
        }
        grad.noalias() = eq.ktilde * (psi - r);
        return -(like - 0.5 * psi.dot(f));
    };

    // Hessian of the negative log posterior is Ktilde + Ktilde W Ktilde; with W replaced by its
    // mean at the start it is diagonal in the Ktilde eigenbasis.
    double wbar = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) wbar += 2.0 * a(i) / (f0(i) * f0(i));
    wbar /= double(d);
    const double hfloor = kEigenJitter * eq.spectrum.maxCoeff();
    const Vector h = eq.spectrum.cwiseMax(hfloor);
    const Vector pinv = (h.array() + wbar * h.array().square()).inverse();
    auto precondition = [&](const Vector& g) -> Vector {
        return eq.basis * pinv.asDiagonal() * (eq.basis.transpose() * g);
    };

    NcgOptions nopt;
    nopt.max_iterations = opt.maxiter;
    nopt.gradient_tolerance =
        opt.gradient_tolerance * (1.0 + (eq.ktilde * a).lpNorm<Eigen::Infinity>());
    NcgResult res = minimize_ncg(objective, precondition, psi0, nopt);

    fit.psi_hat = res.x;
    fit.f_hat = eq.ktilde * fit.psi_hat;
    fit.lambda_hat = 0.5 * c * fit.f_hat.array().square();
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    fit.gradient_norm = res.gradient.lpNorm<Eigen::Infinity>();
    fit.log_posterior = -res.value;
    fit.status = res.status;

    fit.sigma_hat = laplace_covariance(eq, fit.f_hat, a);
    fit.mu = fit.f_hat;
    fit.sigma2 = fit.sigma_hat.diagonal();
    fit.gamma_post.shape.resize(d);
    fit.gamma_post.rate.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        // Roundoff guard; the exact diagonal is bounded below by 1 / (Ktilde^-1 + W)_ii > 0.
        double s2 = fit.sigma2(i);
        const double floor = 1e-14 * std::max(eq.ktilde(i, i), std::numeric_limits<double>::min());
        if (!(s2 > floor)) s2 = floor;
        fit.sigma2(i) = s2;
        const auto g = gamma_moment_match(fit.mu(i), s2, c);
        fit.gamma_post.shape(i) = g.shape;
        fit.gamma_post.rate(i) = g.rate;
    }
    return fit;
}

}  // namespace ratiouq
