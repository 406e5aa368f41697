// ratiouq: estimate, synth, score and bench subcommands.

#include "ratiouq/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace ratiouq;
using namespace ratiouq::cli;

constexpr const char* kResultsHelp =
    "Results CSV columns, in order:\n"
    "  bin_center, map_ratio, alpha_a, alpha_b, p, q, hpd_lower, hpd_upper, valid, converged\n"
    "and, when a forward model is given (--qoi-m/--qoi-z0/--qoi-p):\n"
    "  qoi_shift, qoi_alpha, qoi_beta, qoi_p, qoi_q, qoi_map, qoi_hpd_lower, qoi_hpd_upper\n"
    "The ratio posterior in each row is BP(alpha_a, alpha_b, p, q); the QoI posterior is\n"
    "qoi_shift + BP(qoi_alpha, qoi_beta, qoi_p, qoi_q). Numbers carry 9 significant digits;\n"
    "bins without a proper posterior have valid=0 and NaN entries.";

// Fills options of `sub` not given on the command line from a key=value file. Keys are the long
// option names without dashes; '#' starts a comment.
void apply_config(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = line.substr(0, line.find('#'));
        const auto eq = line.find('=');
        const std::string key = CLI::detail::trim_copy(line.substr(0, eq));
        if (key.empty()) continue;
        if (eq == std::string::npos)
            throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key=value");
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt || key == "config")
            throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        std::vector<std::string> values;
        std::istringstream vs(CLI::detail::trim_copy(line.substr(eq + 1)));
        for (std::string v; vs >> v;) values.push_back(v);
        for (const auto& v : values) opt->add_result(v);
        opt->run_callback();
    }
}

void require(const CLI::App& sub, const std::vector<std::string>& names) {
    for (const auto& n : names)
        if (sub.get_option(n)->count() == 0) throw CLI::RequiredError(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian ratio estimation for binned Poisson counts"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.");

    // estimate
    RunConfig cfg;
    std::string num_path, den_path, out_path = "-", estimator = "permanental", kernel = "wendland";
    double qoi_m = 0.0, qoi_z0 = 0.0, qoi_p = 0.0;
    auto* est = app.add_subcommand("estimate", "Posterior of the intensity ratio per bin");
    std::string est_config, syn_config, sc_config, be_config;
    constexpr const char* kConfigHelp = "key=value file of long option names; command-line flags win";
    est->add_option("--config", est_config, kConfigHelp);
    est->footer(kResultsHelp);
    est->add_option("--numerator", num_path, "Numerator count CSV")->check(CLI::ExistingFile);
    est->add_option("--denominator", den_path, "Denominator count CSV")->check(CLI::ExistingFile);
    est->add_option("-o,--output", out_path, "Results CSV ('-' for stdout)")->capture_default_str();
    est->add_option("--estimator", estimator, "permanental or pointwise")
        ->check(CLI::IsMember({"permanental", "pointwise"}))
        ->capture_default_str();
    est->add_option("--kernel", kernel, "wendland or matrix")
        ->check(CLI::IsMember({"wendland", "matrix"}))
        ->capture_default_str();
    est->add_option("--support-width", cfg.support_width, "Wendland support radius")->capture_default_str();
    est->add_option("--kernel-variance", cfg.kernel_variance, "Wendland variance")->capture_default_str();
    est->add_option("--kernel-file", cfg.kernel_file, "Headerless d x d kernel CSV (numerator)");
    est->add_option("--kernel-file-den", cfg.kernel_file_den, "Denominator kernel CSV (default: same)");
    est->add_option("--c1", cfg.c1, "Numerator intensity scale")->capture_default_str();
    est->add_option("--c2", cfg.c2, "Denominator intensity scale")->capture_default_str();
    est->add_option("--g1", cfg.g1, "Numerator regularization")->capture_default_str();
    est->add_option("--g2", cfg.g2, "Denominator regularization")->capture_default_str();
    est->add_option("--a1", cfg.a1, "Numerator prior shape (pointwise)")->capture_default_str();
    est->add_option("--b1", cfg.b1, "Numerator prior rate (pointwise)")->capture_default_str();
    est->add_option("--a2", cfg.a2, "Denominator prior shape (pointwise)")->capture_default_str();
    est->add_option("--b2", cfg.b2, "Denominator prior rate (pointwise)")->capture_default_str();
    est->add_option("--maxiter", cfg.maxiter, "Optimizer iteration limit")->capture_default_str();
    auto* om = est->add_option("--qoi-m", qoi_m, "Forward model Z = (m T + z0)^p: m");
    auto* oz = est->add_option("--qoi-z0", qoi_z0, "Forward model: z0");
    auto* op = est->add_option("--qoi-p", qoi_p, "Forward model: p");
    est->add_option("--hpd-alpha", cfg.hpd_alpha, "HPD mass")->capture_default_str();
    est->add_option("--grid-points", cfg.grid_points, "Grid size for HPD computation")->capture_default_str();
    est->add_option("--seed", cfg.seed, "Seed (recorded for reproducibility)");

    // synth
    std::string problem = "ratio", prefix;
    std::size_t n_bins = 50;
    std::uint64_t synth_seed = 1;
    auto* syn = app.add_subcommand("synth", "Generate the toy problem: <prefix>_num/_den/_truth.csv");
    syn->add_option("--config", syn_config, kConfigHelp);
    syn->add_option("--problem", problem, "ratio or qoi")
        ->check(CLI::IsMember({"ratio", "qoi"}))
        ->capture_default_str();
    syn->add_option("--bins", n_bins, "Number of bins")->check(CLI::PositiveNumber)->capture_default_str();
    syn->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
    syn->add_option("--prefix", prefix, "Output path prefix");

    // score
    std::string results_path, truth_path, target = "ratio", per_bin;
    auto* sc = app.add_subcommand("score", "Mean CRPS, relative MAE and HPD coverage against truth");
    sc->add_option("--config", sc_config, kConfigHelp);
    sc->add_option("--results", results_path, "Results CSV from estimate")->check(CLI::ExistingFile);
    sc->add_option("--truth", truth_path, "Truth CSV from synth")->check(CLI::ExistingFile);
    sc->add_option("--target", target, "ratio or qoi")
        ->check(CLI::IsMember({"ratio", "qoi"}))
        ->capture_default_str();
    sc->add_option("--per-bin", per_bin, "Write per-bin scores to this CSV");

    // bench
    std::vector<std::size_t> bench_bins = default_bench_bins();
    std::size_t trials = 5;
    std::uint64_t bench_seed = 1;
    RunConfig bench_cfg;
    auto* be = app.add_subcommand("bench", "Walltime of the full ratio posterior on toy data");
    be->add_option("--config", be_config, kConfigHelp);
    be->add_option("--bins", bench_bins, "Bin counts")->capture_default_str();
    be->add_option("--trials", trials, "Trials per bin count")->check(CLI::PositiveNumber)->capture_default_str();
    be->add_option("--seed", bench_seed, "Base seed")->capture_default_str();
    be->add_option("--support-width", bench_cfg.support_width, "Wendland support radius")->capture_default_str();
    be->add_option("--kernel-variance", bench_cfg.kernel_variance, "Wendland variance")->capture_default_str();

    try {
        app.parse(argc, argv);
        if (!est_config.empty()) apply_config(*est, est_config);
        if (!syn_config.empty()) apply_config(*syn, syn_config);
        if (!sc_config.empty()) apply_config(*sc, sc_config);
        if (!be_config.empty()) apply_config(*be, be_config);
        if (*est) require(*est, {"--numerator", "--denominator"});
        if (*est && (om->count() || op->count() || oz->count())) require(*est, {"--qoi-m", "--qoi-p"});
        if (*syn) require(*syn, {"--prefix"});
        if (*sc) require(*sc, {"--results", "--truth"});
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*est) {
        cfg.estimator = estimator == "pointwise" ? Estimator::pointwise : Estimator::permanental;
        cfg.kernel = kernel == "matrix" ? KernelKind::matrix : KernelKind::wendland;
        if (*om) cfg.qoi = QoiModel{qoi_m, qoi_z0, qoi_p};
        if (out_path == "-") return cmd_estimate(cfg, num_path, den_path, std::cout, std::cerr);
        return cmd_estimate(cfg, num_path, den_path, out_path, std::cerr);
    }
    if (*syn)
        return cmd_synth(problem == "qoi" ? SynthProblem::qoi : SynthProblem::ratio, n_bins, synth_seed, prefix,
                         std::cerr);
    if (*sc)
        return cmd_score(results_path, truth_path, target == "qoi" ? ScoreTarget::qoi : ScoreTarget::ratio,
                         per_bin, std::cout, std::cerr);
    return cmd_bench(bench_bins, trials, bench_seed, bench_cfg, std::cout, std::cerr);
}
