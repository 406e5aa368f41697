#pragma once

// Subcommands of the `ratiouq` tool: estimate, synth, score, bench. Each returns a process exit
// code (see ExitCode) and reports problems on the supplied log stream.

#include "ratiouq/cli/csv_io.hpp"
#include "ratiouq/ratiouq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ratiouq::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

enum class Estimator { permanental, pointwise };
enum class KernelKind { wendland, matrix };

struct RunConfig {
    Estimator estimator = Estimator::permanental;
    KernelKind kernel = KernelKind::wendland;
    double support_width = 0.75;
    double kernel_variance = 1.0;
    std::string kernel_file;      // numerator (and default denominator) kernel
    std::string kernel_file_den;  // optional separate denominator kernel
    double c1 = 1.0, c2 = 1.0, g1 = 1.0, g2 = 1.0;
    double a1 = 1.0, b1 = 0.0, a2 = 1.0, b2 = 0.0;
    int maxiter = 300;
    std::optional<QoiModel> qoi;
    double hpd_alpha = 0.95;
    std::uint64_t seed = 0;
    std::size_t grid_points = 4001;
};

/// Maps library exceptions onto exit codes, writing the message to `log`.
inline int run_guarded(const std::function<int()>& body, std::ostream& log) {
    try {
        return body();
    } catch (const DataError& e) {
        log << "error: " << e.what() << '\n';
        return kData;
    } catch (const ShapeError& e) {
        log << "error: " << e.what() << '\n';
        return kData;
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const DegenerateKernelError& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::domain_error& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}

struct EstimateResult {
    std::vector<double> centers;
    RatioPosterior ratio;
    std::vector<HpdSet> hpd;
    std::optional<QoiPosterior> qoi;
    std::vector<HpdSet> qoi_hpd;
};

namespace detail {

inline KernelMatrix load_kernel(const std::string& path, std::size_t bins) {
    Matrix k = read_kernel_matrix(path);
    if (std::size_t(k.rows()) != bins)
        throw DataError(path + ": kernel is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                        " but the count files have " + std::to_string(bins) + " bins");
    try {
        return KernelMatrix(std::move(k));
    } catch (const ParameterError& e) {
        throw DataError(path + ": " + e.what());
    }
}

inline BinGrid grid_from_centers(const std::vector<double>& centers) {
    const std::size_t n = centers.size();
    std::vector<double> widths(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? centers[i] - centers[i - 1] : centers[1] - centers[0];
        const double right = i + 1 < n ? centers[i + 1] - centers[i] : centers[n - 1] - centers[n - 2];
        widths[i] = 0.5 * (std::abs(left) + std::abs(right));
    }
    try {
        return BinGrid(std::span<const double>(centers), std::span<const double>(widths));
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("bin centers: ") + e.what());
    }
}

inline bool same_centers(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-6 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

inline void put(std::ostream& out, double v) {
    if (std::isnan(v))
        out << "NaN";
    else
        out << v;
}

}  // namespace detail

/// In-memory estimate: ratio posterior, its HPD sets and optionally the QoI posterior.
inline EstimateResult estimate(const RunConfig& cfg, const CountFile& num, const CountFile& den) {
    if (num.counts.bins() != den.counts.bins())
        throw DataError("numerator has " + std::to_string(num.counts.bins()) + " bins, denominator " +
                        std::to_string(den.counts.bins()));
    if (!detail::same_centers(num.centers, den.centers))
        throw DataError("numerator and denominator bin centers differ");
    if (!(cfg.hpd_alpha > 0.0 && cfg.hpd_alpha < 1.0)) throw ParameterError("hpd alpha must lie in (0, 1)");
    if (cfg.qoi) cfg.qoi->validate();

    EstimateResult res;
    res.centers = num.centers;
    if (cfg.estimator == Estimator::pointwise) {
        res.ratio = zbetaprime(num.counts, den.counts, {cfg.a1, cfg.b1, cfg.a2, cfg.b2});
    } else {
        const RatioOptions ropt{cfg.c1, cfg.c2, cfg.g1, cfg.g2, cfg.maxiter};
        if (cfg.kernel == KernelKind::matrix) {
            if (cfg.kernel_file.empty()) throw ParameterError("--kernel-file is required for a matrix kernel");
            const KernelMatrix k1 = detail::load_kernel(cfg.kernel_file, num.counts.bins());
            if (cfg.kernel_file_den.empty()) {
                res.ratio = ratio_estimation_permproc(num.counts, den.counts, k1, ropt);
            } else {
                const KernelMatrix k2 = detail::load_kernel(cfg.kernel_file_den, num.counts.bins());
                res.ratio = ratio_estimation_permproc(num.counts, den.counts, k1, k2, ropt);
            }
        } else {
            const KernelMatrix k = wendland_kernel(detail::grid_from_centers(num.centers),
                                                   cfg.support_width, cfg.kernel_variance);
            res.ratio = ratio_estimation_permproc(num.counts, den.counts, k, ropt);
        }
    }

    const GridOptions gopt{cfg.grid_points};
    res.hpd.resize(res.ratio.size());
    for (std::size_t i = 0; i < res.ratio.size(); ++i)
        if (res.ratio.valid[i]) res.hpd[i] = hpd_betaprime(res.ratio.bins[i], cfg.hpd_alpha, gopt);

    if (cfg.qoi) {
        res.qoi = qoi_posterior(res.ratio, *cfg.qoi);
        res.qoi_hpd.resize(res.qoi->size());
        for (std::size_t i = 0; i < res.qoi->size(); ++i)
            if (res.qoi->valid[i]) res.qoi_hpd[i] = hpd_betaprime(res.qoi->bins[i], cfg.hpd_alpha, gopt);
    }
    return res;
}

inline void write_results(std::ostream& out, const EstimateResult& r) {
    const auto& cols = results_columns();
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
    if (r.qoi)
        for (const auto& c : qoi_columns()) out << ',' << c;
    out << '\n' << std::setprecision(9);
    const bool converged = r.ratio.converged();
    for (std::size_t i = 0; i < r.ratio.size(); ++i) {
        const auto& bp = r.ratio.bins[i];
        const bool ok = r.ratio.valid[i];
        out << r.centers[i] << ',';
        detail::put(out, r.ratio.map_estimate(Eigen::Index(i)));
        for (double v : {bp.alpha, bp.beta, bp.p, bp.q}) {
            out << ',';
            detail::put(out, v);
        }
        out << ',';
        detail::put(out, ok ? r.hpd[i].lower() : std::nan(""));
        out << ',';
        detail::put(out, ok ? r.hpd[i].upper() : std::nan(""));
        out << ',' << (ok ? 1 : 0) << ',' << (converged ? 1 : 0);
        if (r.qoi) {
            const auto& sb = r.qoi->bins[i];
            for (double v : {sb.shift, sb.bp.alpha, sb.bp.beta, sb.bp.p, sb.bp.q,
                             double(r.qoi->map_estimate(Eigen::Index(i))),
                             ok ? r.qoi_hpd[i].lower() : std::nan(""),
                             ok ? r.qoi_hpd[i].upper() : std::nan("")}) {
                out << ',';
                detail::put(out, v);
            }
        }
        out << '\n';
    }
}

inline int cmd_estimate(const RunConfig& cfg, const std::string& num_path, const std::string& den_path,
                        std::ostream& out, std::ostream& log) {
    return run_guarded(
        [&] {
            const CountFile num = read_counts(num_path);
            const CountFile den = read_counts(den_path);
            const EstimateResult res = estimate(cfg, num, den);
            write_results(out, res);
            if (!res.ratio.converged())
                log << "warning: optimizer did not converge (see the converged column)\n";
            for (std::size_t i = 0; i < res.ratio.size(); ++i)
                if (!res.ratio.valid[i]) log << "warning: bin " << (i + 1) << " has no proper posterior\n";
            return int(kOk);
        },
        log);
}

inline int cmd_estimate(const RunConfig& cfg, const std::string& num_path, const std::string& den_path,
                        const std::string& out_path, std::ostream& log) {
    return run_guarded(
        [&] {
            auto out = detail::open_out(out_path);
            return cmd_estimate(cfg, num_path, den_path, out, log);
        },
        log);
}

enum class SynthProblem { ratio, qoi };

/// Writes <prefix>_num.csv, <prefix>_den.csv and <prefix>_truth.csv.
inline int cmd_synth(SynthProblem problem, std::size_t n_bins, std::uint64_t seed,
                     const std::string& prefix, std::ostream& log) {
    return run_guarded(
        [&] {
            const ToyProblem toy = toy_ratio_problem(n_bins, seed);
            std::vector<double> centers(toy.grid.size());
            for (std::size_t i = 0; i < centers.size(); ++i) centers[i] = toy.grid.centers()(Eigen::Index(i), 0);
            write_counts(prefix + "_num.csv", centers, toy.numerator);
            write_counts(prefix + "_den.csv", centers, toy.denominator);
            TruthFile truth{centers, std::vector<double>(toy.true_ratio.data(),
                                                         toy.true_ratio.data() + toy.true_ratio.size()),
                            {}};
            if (problem == SynthProblem::qoi)
                for (double c : centers) truth.t_true.push_back(toy_qoi(c));
            auto out = detail::open_out(prefix + "_truth.csv");
            write_truth(out, truth);
            log << "wrote " << prefix << "_num.csv, " << prefix << "_den.csv, " << prefix << "_truth.csv\n";
            return int(kOk);
        },
        log);
}

enum class ScoreTarget { ratio, qoi };

struct ScoreReport {
    std::vector<double> crps;
    std::vector<double> abs_rel_error;
    std::vector<char> covered;
    double mean_crps = 0.0;
    double rel_mae = 0.0;
    double coverage = 0.0;
    std::size_t scored = 0;
};

/// Mean CRPS of the per-bin posteriors against truth, mean |MAP - truth| / |truth| and the
/// fraction of truths inside the HPD bounds. Invalid bins are skipped.
inline ScoreReport score(const ResultsTable& res, const TruthFile& truth, ScoreTarget target,
                         const GridOptions& gopt = {}) {
    if (res.rows.size() != truth.centers.size())
        throw DataError("results have " + std::to_string(res.rows.size()) + " bins, truth has " +
                        std::to_string(truth.centers.size()));
    const bool qoi = target == ScoreTarget::qoi;
    if (qoi && truth.t_true.empty()) throw DataError("truth file has no t_true column");
    auto col = [&](const std::string& name) {
        const auto j = res.column(name);
        if (j < 0) throw DataError("results file lacks column '" + name + "'");
        return std::size_t(j);
    };
    const std::string pre = qoi ? "qoi_" : "";
    const std::size_t c_center = col("bin_center"), c_valid = col("valid");
    const std::size_t c_alpha = col(qoi ? "qoi_alpha" : "alpha_a"), c_beta = col(qoi ? "qoi_beta" : "alpha_b");
    const std::size_t c_p = col(pre + "p"), c_q = col(pre + "q"), c_map = col(qoi ? "qoi_map" : "map_ratio");
    const std::size_t c_lo = col(pre + "hpd_lower"), c_hi = col(pre + "hpd_upper");
    const std::optional<std::size_t> c_shift = qoi ? std::optional(col("qoi_shift")) : std::nullopt;

    ScoreReport rep;
    const auto n = res.rows.size();
    rep.crps.assign(n, std::nan(""));
    rep.abs_rel_error.assign(n, std::nan(""));
    rep.covered.assign(n, 0);
    double sum_crps = 0.0, sum_err = 0.0, sum_cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = res.rows[i];
        if (std::abs(r[c_center] - truth.centers[i]) > 1e-6 * std::max(1.0, std::abs(truth.centers[i])))
            throw DataError("bin centers of results and truth differ", res.lines[i]);
        if (r[c_valid] == 0.0) continue;
        const double x = qoi ? truth.t_true[i] : truth.z_true[i];
        const ShiftedBetaPrime d{c_shift ? r[*c_shift] : 0.0, {r[c_alpha], r[c_beta], r[c_p], r[c_q]}};
        rep.crps[i] = crps_betaprime(d, x, gopt);
        rep.abs_rel_error[i] = std::abs(r[c_map] - x) / std::abs(x);
        rep.covered[i] = x >= r[c_lo] && x <= r[c_hi];
        sum_crps += rep.crps[i];
        sum_err += rep.abs_rel_error[i];
        sum_cov += rep.covered[i];
        ++rep.scored;
    }
    if (rep.scored == 0) throw DataError("no valid bins to score");
    rep.mean_crps = sum_crps / double(rep.scored);
    rep.rel_mae = sum_err / double(rep.scored);
    rep.coverage = sum_cov / double(rep.scored);
    return rep;
}

inline void write_score_report(std::ostream& out, const ScoreReport& rep, const TruthFile& truth) {
    out << "bin_center,crps,abs_rel_error,covered\n" << std::setprecision(9);
    for (std::size_t i = 0; i < rep.crps.size(); ++i) {
        out << truth.centers[i] << ',';
        detail::put(out, rep.crps[i]);
        out << ',';
        detail::put(out, rep.abs_rel_error[i]);
        out << ',' << int(rep.covered[i]) << '\n';
    }
}

inline int cmd_score(const std::string& results_path, const std::string& truth_path, ScoreTarget target,
                     const std::string& per_bin_path, std::ostream& out, std::ostream& log) {
    return run_guarded(
        [&] {
            const ResultsTable res = read_results(results_path);
            const TruthFile truth = read_truth(truth_path);
            const ScoreReport rep = score(res, truth, target);
            if (!per_bin_path.empty()) {
                auto f = detail::open_out(per_bin_path);
                write_score_report(f, rep, truth);
            }
            out << std::setprecision(9) << "bins_scored=" << rep.scored << '\n'
                << "mean_crps=" << rep.mean_crps << '\n'
                << "relative_mae=" << rep.rel_mae << '\n'
                << "hpd_coverage=" << rep.coverage << '\n';
            return int(kOk);
        },
        log);
}

struct BenchRow {
    std::size_t bins = 0;
    std::vector<double> seconds;
    double mean() const {
        return seconds.empty() ? 0.0 : std::accumulate(seconds.begin(), seconds.end(), 0.0) / double(seconds.size());
    }
};

/// 10 to 1000 bins, logarithmically spaced.
inline std::vector<std::size_t> default_bench_bins() { return {10, 22, 46, 100, 215, 464, 1000}; }

/// Times the full ratio posterior (kernel, both fits, Beta Prime parameters) on fresh toy data.
/// Trials run sequentially.
inline std::vector<BenchRow> bench(const std::vector<std::size_t>& bin_counts, std::size_t trials,
                                   std::uint64_t seed, const RunConfig& cfg = {}) {
    if (trials < 1) throw ParameterError("bench needs at least one trial");
    std::vector<BenchRow> rows;
    for (std::size_t n : bin_counts) {
        BenchRow row{n, {}};
        for (std::size_t t = 0; t < trials; ++t) {
            const ToyProblem toy = toy_ratio_problem(n, seed + 1000003 * n + t);
            const auto start = std::chrono::steady_clock::now();
            const KernelMatrix k = wendland_kernel(toy.grid, cfg.support_width, cfg.kernel_variance);
            const RatioPosterior post = ratio_estimation_permproc(
                toy.numerator, toy.denominator, k, {cfg.c1, cfg.c2, cfg.g1, cfg.g2, cfg.maxiter});
            const auto stop = std::chrono::steady_clock::now();
            if (post.size() != n) throw NumericalError("bench produced a malformed posterior");
            row.seconds.push_back(std::chrono::duration<double>(stop - start).count());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline int cmd_bench(const std::vector<std::size_t>& bin_counts, std::size_t trials, std::uint64_t seed,
                     const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    return run_guarded(
        [&] {
            const auto rows = bench(bin_counts, trials, seed, cfg);
            out << "bins,trials,mean_seconds,min_seconds,max_seconds\n" << std::setprecision(6);
            for (const auto& r : rows)
                out << r.bins << ',' << r.seconds.size() << ',' << r.mean() << ','
                    << *std::min_element(r.seconds.begin(), r.seconds.end()) << ','
                    << *std::max_element(r.seconds.begin(), r.seconds.end()) << '\n';
            return int(kOk);
        },
        log);
}

}  // namespace ratiouq::cli
