#pragma once

// Gridded summaries of (shifted) Beta Prime posteriors: CRPS against a reference value and HPD
// bounds, both through the generic gridded routines in uq.hpp.

#include "ratiouq/betaprime.hpp"
#include "ratiouq/ratio.hpp"
#include "ratiouq/uq.hpp"

#include <algorithm>
#include <cmath>

namespace ratiouq {

struct GridOptions {
    std::size_t points = 4001;
    double tail = 1e-8;  // probability left outside each end of the grid
};

/// Density of shift + BP on an even grid between the tail quantiles, widened to cover `include`
/// when given.
inline GriddedDensity discretize(const ShiftedBetaPrime& d, const GridOptions& opt = {},
                                 double include = std::nan("")) {
    d.bp.validate();
    double lo = d.quantile(opt.tail);
    double hi = d.quantile(1.0 - opt.tail);
    if (std::isfinite(include)) {
        lo = std::min(lo, include);
        hi = std::max(hi, include);
    }
    lo = std::max(lo, d.shift);
    if (!(hi > lo)) hi = lo + 1e-12 * std::max(1.0, std::abs(lo));
    const std::size_t n = std::max<std::size_t>(opt.points, 3);
    GriddedDensity g;
    g.kind = GridKind::density;
    g.grid.resize(n);
    g.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * double(i) / double(n - 1);
        g.grid[i] = x;
        const double v = d.pdf(x);
        g.values[i] = std::isfinite(v) ? v : 0.0;
    }
    return g;
}

inline GriddedDensity discretize(const GenBetaPrime& d, const GridOptions& opt = {},
                                 double include = std::nan("")) {
    return discretize(ShiftedBetaPrime{0.0, d}, opt, include);
}

inline double crps_betaprime(const ShiftedBetaPrime& d, double xhat, const GridOptions& opt = {}) {
    return crps(discretize(d, opt, xhat), xhat).value;
}

inline double crps_betaprime(const GenBetaPrime& d, double xhat, const GridOptions& opt = {}) {
    return crps_betaprime(ShiftedBetaPrime{0.0, d}, xhat, opt);
}

inline HpdSet hpd_betaprime(const ShiftedBetaPrime& d, double alpha, const GridOptions& opt = {}) {
    return hpd_set(discretize(d, opt), alpha);
}

inline HpdSet hpd_betaprime(const GenBetaPrime& d, double alpha, const GridOptions& opt = {}) {
    return hpd_betaprime(ShiftedBetaPrime{0.0, d}, alpha, opt);
}

}  // namespace ratiouq
