#pragma once

// Synthetic binned-Poisson data: the sin^2/cos^2 ratio toy problem on [-1, 1], its nonlinear
// quantity-of-interest variant T = 5 (Z^2 + 2), and generic per-bin Poisson simulation.

#include "ratiouq/errors.hpp"
#include "ratiouq/kernel.hpp"
#include "ratiouq/permanental.hpp"
#include "ratiouq/ratio.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace ratiouq {

/// Independent Poisson draws, one column per realization. Deterministic given the seed.
inline CountData simulate_binned_poisson(const Vector& intensity, std::size_t realizations,
                                         std::uint64_t seed) {
    if (realizations < 1) throw ParameterError("need at least one realization");
    if (intensity.size() < 1) throw ParameterError("intensity vector is empty");
    if (!(intensity.array() >= 0.0).all() || !intensity.allFinite())
        throw ParameterError("intensities must be finite and non-negative");
    std::mt19937_64 rng(seed);
    Matrix counts(intensity.size(), Eigen::Index(realizations));
    for (Eigen::Index r = 0; r < counts.cols(); ++r) {
        for (Eigen::Index i = 0; i < counts.rows(); ++i) {
            if (intensity(i) == 0.0) {
                counts(i, r) = 0.0;
                continue;
            }
            std::poisson_distribution<long long> pois(intensity(i));
            counts(i, r) = double(pois(rng));
        }
    }
    return CountData(std::move(counts));
}

inline double toy_numerator_mean(double x) {
    const double s = std::sin(0.5 * std::numbers::pi * x);
    return 25.0 * s * s + 10.0;
}

inline double toy_denominator_mean(double x) {
    const double c = std::cos(0.5 * std::numbers::pi * x);
    return 8.0 * c * c + 10.0;
}

inline double toy_ratio(double x) { return toy_numerator_mean(x) / toy_denominator_mean(x); }

/// Quantity of interest with Z = (m T + z0)^p, m = 1/5, z0 = -2, p = 1/2.
inline double toy_qoi(double x) {
    const double z = toy_ratio(x);
    return 5.0 * (z * z + 2.0);
}

inline QoiModel toy_qoi_model() { return {0.2, -2.0, 0.5}; }

struct ToyProblem {
    BinGrid grid;
    CountData numerator;
    CountData denominator;
    Vector true_ratio;
    std::uint64_t seed = 0;
};

struct ToyQoiProblem {
    ToyProblem ratio;
    Vector true_qoi;
    QoiModel model;
};

/// [-1, 1] split into n equal bins; Poisson means are the numerator/denominator functions at
/// the bin centers, one draw per bin per process.
inline ToyProblem toy_ratio_problem(std::size_t n_bins, std::uint64_t seed) {
    if (n_bins < 2) throw ParameterError("toy problem needs at least 2 bins");
    BinGrid grid = BinGrid::uniform(-1.0, 1.0, n_bins);
    const auto n = Eigen::Index(n_bins);
    Vector num(n), den(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = grid.centers()(i, 0);
        num(i) = toy_numerator_mean(x);
        den(i) = toy_denominator_mean(x);
        z(i) = num(i) / den(i);
    }
    // Independent streams for the two processes.
    std::seed_seq sq{seed, std::uint64_t(0x9e3779b97f4a7c15ULL)};
    std::uint64_t seeds[2];
    {
        std::uint32_t raw[4];
        sq.generate(raw, raw + 4);
        seeds[0] = (std::uint64_t(raw[0]) << 32) | raw[1];
        seeds[1] = (std::uint64_t(raw[2]) << 32) | raw[3];
    }
    return ToyProblem{std::move(grid), simulate_binned_poisson(num, 1, seeds[0]),
                      simulate_binned_poisson(den, 1, seeds[1]), std::move(z), seed};
}

inline ToyQoiProblem toy_qoi_problem(std::size_t n_bins, std::uint64_t seed) {
    ToyProblem base = toy_ratio_problem(n_bins, seed);
    Vector t = 5.0 * (base.true_ratio.array().square() + 2.0);
    return ToyQoiProblem{std::move(base), std::move(t), toy_qoi_model()};
}

}  // namespace ratiouq
