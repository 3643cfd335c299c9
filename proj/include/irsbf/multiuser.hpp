#pragma once

#include <cstdint>

#include "irsbf/cssca.hpp"
#include "irsbf/single_user.hpp"

namespace irsbf {

/// Treats the estimates as exact: phases maximize the noise-weighted sum of
/// mean channel gains, precoders minimize power under the deterministic SINR
/// targets. Throws std::runtime_error when those targets are infeasible.
/// The outage of the result is measured, not enforced.
MultiuserSolution non_robust_baseline(const MultiuserProblem& problem, const PddConfig& pdd, int verify_samples,
                                      std::uint64_t seed);

struct ThresholdingConfig {
  double delta_eta_db = 0.01;
  double max_inflation_db = 40.0;
  int inner_iters = 10;
  int check_samples = 20000;
  int verify_samples = 100000;
  PddConfig pdd;
};

/// Deterministic design at inflated SINR targets: alternates minimum-power
/// precoding with elementwise phase sweeps that maximize min_k SINR_k / target_k.
/// Returns an empty precoder list when the targets cannot be met.
MultiuserSolution deterministic_design(const MultiuserProblem& problem, const std::vector<double>& targets,
                                       const CVector& v0, int inner_iters);

/// Smallest common inflation of the SINR targets, on a grid of
/// `delta_eta_db`, for which the deterministic design meets every outage
/// target by Monte Carlo. The grid is searched by doubling then bisection with
/// common random numbers across checks. `iterations` counts the checks.
MultiuserSolution progressive_thresholding_mu(const MultiuserProblem& problem, const ThresholdingConfig& config,
                                              std::uint64_t seed);

}  // namespace irsbf
