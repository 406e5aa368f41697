#pragma once

// Prior kernel matrices over bin centers and the equivalent kernel
//
//   Ktilde = (c I + gamma K^-1)^-1 = Phi diag(eta_j / (c eta_j + gamma)) Phi^T
//
// built from the eigendecomposition K = Phi diag(eta) Phi^T.

#include "ratiouq/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ratiouq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Spatial bins: one center per row (1-D grids have a single column) and a positive measure
/// per bin.
class BinGrid {
public:
    BinGrid(Matrix centers, Vector widths) : centers_(std::move(centers)), widths_(std::move(widths)) {
        validate();
    }

    /// 1-D grid from bin centers and widths.
    BinGrid(std::span<const double> centers, std::span<const double> widths)
        : BinGrid(Eigen::Map<const Vector>(centers.data(), Eigen::Index(centers.size())),
                  Eigen::Map<const Vector>(widths.data(), Eigen::Index(widths.size()))) {}

    /// n equal subdivisions of [lo, hi] with centers at the midpoints.
    static BinGrid uniform(double lo, double hi, std::size_t n) {
        if (n < 2) throw ParameterError("a bin grid needs at least 2 bins");
        if (!(hi > lo)) throw ParameterError("uniform grid requires hi > lo");
        const double w = (hi - lo) / double(n);
        Matrix c(Eigen::Index(n), 1);
        for (std::size_t i = 0; i < n; ++i) c(Eigen::Index(i), 0) = lo + (double(i) + 0.5) * w;
        return BinGrid(std::move(c), Vector::Constant(Eigen::Index(n), w));
    }

    std::size_t size() const noexcept { return std::size_t(centers_.rows()); }
    Eigen::Index dim() const noexcept { return centers_.cols(); }
    const Matrix& centers() const noexcept { return centers_; }
    const Vector& widths() const noexcept { return widths_; }

    double distance(std::size_t i, std::size_t j) const {
        return (centers_.row(Eigen::Index(i)) - centers_.row(Eigen::Index(j))).norm();
    }

private:
    void validate() const {
        if (centers_.rows() < 2) throw ParameterError("a bin grid needs at least 2 bins");
        if (centers_.cols() < 1) throw ParameterError("bin centers need at least one coordinate");
        if (widths_.size() != centers_.rows())
            throw ShapeError("bin widths and centers disagree in length");
        if (!(widths_.array() > 0.0).all()) throw ParameterError("bin widths must be positive");
        for (Eigen::Index i = 0; i < centers_.rows(); ++i)
            for (Eigen::Index j = i + 1; j < centers_.rows(); ++j)
                if ((centers_.row(i) - centers_.row(j)).squaredNorm() == 0.0)
                    throw ParameterError("bin centers must be pairwise distinct");
    }

    Matrix centers_;
    Vector widths_;
};

/// Symmetric PSD kernel matrix with its eigendecomposition (eigenvalues descending).
class KernelMatrix {
public:
    /// Validates symmetry (relative tolerance 1e-12), symmetrizes exactly and decomposes.
    explicit KernelMatrix(Matrix k) : k_(std::move(k)) {
        if (k_.rows() != k_.cols()) throw ShapeError("kernel matrix must be square");
        if (k_.rows() < 1) throw ShapeError("kernel matrix is empty");
        if (!k_.allFinite()) throw ParameterError("kernel matrix has non-finite entries");
        const double scale = std::max(1.0, k_.cwiseAbs().maxCoeff());
        if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ParameterError("kernel matrix is not symmetric");
        k_ = 0.5 * (k_ + k_.transpose()).eval();

        Eigen::SelfAdjointEigenSolver<Matrix> es(k_);
        if (es.info() != Eigen::Success) throw NumericalError("kernel eigendecomposition failed");
        // Eigen returns ascending order.
        eigenvalues_ = es.eigenvalues().reverse();
        eigenvectors_ = es.eigenvectors().rowwise().reverse();
        if (eigenvalues_.minCoeff() < -1e-10 * eigenvalues_.cwiseAbs().maxCoeff())
            throw ParameterError("kernel matrix is not positive semidefinite");
    }

    std::size_t size() const noexcept { return std::size_t(k_.rows()); }
    const Matrix& matrix() const noexcept { return k_; }
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    const Matrix& eigenvectors() const noexcept { return eigenvectors_; }

private:
    Matrix k_;
    Vector eigenvalues_;
    Matrix eigenvectors_;
};

/// Wendland C2 kernel K_ij = variance (1 - r/rho)_+^4 (4 r/rho + 1), r = |x_i - x_j|.
inline double wendland_c2(double r, double support_width, double variance = 1.0) {
    const double t = r / support_width;
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    return variance * (u * u) * (u * u) * (4.0 * t + 1.0);
}

inline KernelMatrix wendland_kernel(const BinGrid& grid, double support_width, double variance = 1.0) {
    if (!(support_width > 0.0)) throw ParameterError("Wendland support width must be positive");
    if (!(variance > 0.0)) throw ParameterError("kernel variance must be positive");
    const auto n = Eigen::Index(grid.size());
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = wendland_c2(grid.distance(std::size_t(i), std::size_t(j)), support_width,
                                         variance);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return KernelMatrix(std::move(k));
}

/// Equivalent kernel for a given scaling c and marginal precision gamma.
struct EquivalentKernel {
    Matrix ktilde;
    Matrix basis;     // orthonormal eigenvectors of ktilde
    Vector spectrum;  // matching eigenvalues of ktilde
    double c = 1.0;
    double gamma = 1.0;
    std::size_t floored = 0;  // eigenvalues raised to the jitter floor

    std::size_t size() const noexcept { return std::size_t(ktilde.rows()); }
};

inline constexpr double kEigenJitter = 1e-10;

namespace detail {

inline Vector floored_eigenvalues(const KernelMatrix& km, std::size_t& floored) {
    const Vector& eta = km.eigenvalues();
    if (!(eta(0) > 0.0)) throw DegenerateKernelError("kernel matrix has no positive eigenvalue");
    const double floor = kEigenJitter * eta(0);
    Vector out = eta;
    floored = 0;
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        if (out(j) < floor) {
            out(j) = floor;
            ++floored;
        }
    }
    return out;
}

inline void check_scales(double c, double gamma) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("scaling c must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ParameterError("marginal precision gamma must be positive");
}

}  // namespace detail

/// Ktilde = Phi diag(eta_j / (c eta_j + gamma)) Phi^T, eigenvalues floored at 1e-10 eta_1.
inline EquivalentKernel equivalent_kernel(const KernelMatrix& km, double c, double gamma) {
    detail::check_scales(c, gamma);
    EquivalentKernel eq;
    eq.c = c;
    eq.gamma = gamma;
    const Vector eta = detail::floored_eigenvalues(km, eq.floored);
    eq.spectrum = eta.array() / (c * eta.array() + gamma);
    eq.basis = km.eigenvectors();
    eq.ktilde = eq.basis * eq.spectrum.asDiagonal() * eq.basis.transpose();
    eq.ktilde = 0.5 * (eq.ktilde + eq.ktilde.transpose()).eval();
    return eq;
}

/// Equivalent kernel with per-bin exposure n_i, Ktilde = (c diag(n) + gamma K^-1)^-1.
/// Formed as (Phi S) (gamma I + c S Phi^T N Phi S)^-1 (Phi S)^T with S = diag(sqrt(eta)), which
/// stays well defined for bins with zero exposure. Reduces to equivalent_kernel(km, c n, gamma)
/// when the exposure is constant.
inline EquivalentKernel equivalent_kernel(const KernelMatrix& km, double c, double gamma,
                                          const Vector& exposure) {
    detail::check_scales(c, gamma);
    if (std::size_t(exposure.size()) != km.size())
        throw ShapeError("exposure length does not match the kernel dimension");
    if (!(exposure.array() >= 0.0).all()) throw ParameterError("exposure must be non-negative");
    if (exposure.size() > 0 && (exposure.array() == exposure(0)).all() && exposure(0) > 0.0)
        return equivalent_kernel(km, c * exposure(0), gamma);

    EquivalentKernel eq;
    eq.c = c;
    eq.gamma = gamma;
    const Vector eta = detail::floored_eigenvalues(km, eq.floored);
    const Matrix phis = km.eigenvectors() * eta.cwiseSqrt().asDiagonal();
    Matrix m = c * phis.transpose() * exposure.asDiagonal() * phis;
    m.diagonal().array() += gamma;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("exposure-weighted kernel is not SPD");
    eq.ktilde = phis * llt.solve(phis.transpose());
    eq.ktilde = 0.5 * (eq.ktilde + eq.ktilde.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(eq.ktilde);
    if (es.info() != Eigen::Success) throw NumericalError("equivalent kernel eigendecomposition failed");
    eq.spectrum = es.eigenvalues().cwiseMax(0.0);
    eq.basis = es.eigenvectors();
    return eq;
}

}  // namespace ratiouq
