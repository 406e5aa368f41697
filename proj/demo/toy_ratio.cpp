// Ratio posterior on the 50-bin toy problem: prints truth, MAP and the 95% HPD band per bin,
// then the mean CRPS and relative error.

#include "ratiouq/ratiouq.hpp"

#include <cstdio>

int main() {
    using namespace ratiouq;
    const ToyProblem toy = toy_ratio_problem(50, 1);
    const KernelMatrix k = wendland_kernel(toy.grid, 0.75);
    const RatioPosterior post = ratio_estimation_permproc(toy.numerator, toy.denominator, k);

    std::printf("%9s %9s %9s %9s %9s %9s\n", "x", "true", "map", "hpd_lo", "hpd_hi", "crps");
    double crps_sum = 0.0, err_sum = 0.0;
    for (std::size_t i = 0; i < post.size(); ++i) {
        const auto j = Eigen::Index(i);
        const double truth = toy.true_ratio(j);
        const HpdSet band = hpd_betaprime(post.bins[i], 0.95);
        const double score = crps_betaprime(post.bins[i], truth);
        crps_sum += score;
        err_sum += std::abs(post.map_estimate(j) - truth) / truth;
        std::printf("%9.4f %9.4f %9.4f %9.4f %9.4f %9.4f\n", toy.grid.centers()(j, 0), truth,
                    post.map_estimate(j), band.lower(), band.upper(), score);
    }
    std::printf("converged: %s\n", post.converged() ? "yes" : "no");
    std::printf("mean CRPS %.4f, relative MAE %.2f%%\n", crps_sum / double(post.size()),
                100.0 * err_sum / double(post.size()));
}
