#include "irsbf/multiuser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "irsbf/beamforming.hpp"

namespace irsbf {

namespace {

std::vector<CVector> effective_channels(const MultiuserProblem& problem, const CVector& v) {
  const CVector x = augment(v);
  std::vector<CVector> out;
  out.reserve(problem.K());
  for (const auto& H : problem.H_bar) out.push_back(effective_row(H, x));
  return out;
}

std::vector<double> noise_powers(const MultiuserProblem& problem) {
  std::vector<double> out;
  for (const auto& s : problem.specs) out.push_back(s.sigma2);
  return out;
}

double total_power(const std::vector<CVector>& w) {
  double p = 0.0;
  for (const auto& wk : w) p += wk.squaredNorm();
  return p;
}

CVector gain_sum_phases(const MultiuserProblem& problem, const PddConfig& pdd, std::uint64_t seed) {
  const int dim = problem.N() + 1;
  CMatrix Phi = CMatrix::Zero(dim, dim);
  for (int k = 0; k < problem.K(); ++k)
    Phi += problem.H_bar[k] * problem.H_bar[k].adjoint() / problem.specs[k].sigma2;
  Rng rng(seed);
  const CVector init = problem.alphabet.random_vector(problem.N(), rng);
  return maximize_quadratic_form(Phi, problem.alphabet, pdd, init).v;
}

double worst_scaled_sinr(const MultiuserProblem& problem, const CVector& v, const std::vector<CVector>& w,
                         const std::vector<double>& targets) {
  const std::vector<double> s = deterministic_sinr(effective_channels(problem, v), w, noise_powers(problem));
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k) worst = std::min(worst, s[k] / targets[k]);
  return worst;
}

}  // namespace

MultiuserSolution non_robust_baseline(const MultiuserProblem& problem, const PddConfig& pdd, int verify_samples,
                                      std::uint64_t seed) {
  problem.validate();
  MultiuserSolution sol;
  sol.v = gain_sum_phases(problem, pdd, derive_seed(seed, {0}));
  std::vector<double> eta;
  for (const auto& s : problem.specs) eta.push_back(s.eta);
  const BeamformingResult bf = min_power_beamforming(effective_channels(problem, sol.v), eta, noise_powers(problem));
  if (!bf.feasible) throw std::runtime_error("non_robust_baseline: SINR targets infeasible on the estimates");
  sol.precoders = bf.precoders;
  sol.power = bf.power;
  sol.iterations = bf.iterations;
  return verify_multiuser(problem, std::move(sol), verify_samples, derive_seed(seed, {1}));
}

MultiuserSolution deterministic_design(const MultiuserProblem& problem, const std::vector<double>& targets,
                                       const CVector& v0, int inner_iters) {
  const std::vector<double> sigma2 = noise_powers(problem);
  MultiuserSolution sol;
  sol.v = v0;
  BeamformingResult bf = min_power_beamforming(effective_channels(problem, sol.v), targets, sigma2);
  if (!bf.feasible) return sol;
  for (int it = 0; it < inner_iters; ++it) {
    ++sol.iterations;
    CVector trial = sol.v;
    double best = worst_scaled_sinr(problem, trial, bf.precoders, targets);
    for (int n = 0; n < problem.N(); ++n) {
      Complex choice = trial(n);
      for (int z = 0; z < problem.alphabet.size(); ++z) {
        trial(n) = problem.alphabet.element(z);
        const double value = worst_scaled_sinr(problem, trial, bf.precoders, targets);
        if (value > best * (1.0 + 1e-12)) {
          best = value;
          choice = trial(n);
        }
      }
      trial(n) = choice;
    }
    if (trial == sol.v) break;
    const BeamformingResult next = min_power_beamforming(effective_channels(problem, trial), targets, sigma2);
    if (!next.feasible || next.power >= bf.power) break;
    sol.v = trial;
    bf = next;
  }
  sol.precoders = bf.precoders;
  sol.power = bf.power;
  return sol;
}

MultiuserSolution progressive_thresholding_mu(const MultiuserProblem& problem, const ThresholdingConfig& config,
                                              std::uint64_t seed) {
  problem.validate();
  if (!(config.delta_eta_db > 0.0)) throw std::invalid_argument("progressive_thresholding_mu: step must be positive");
  const CVector v0 = gain_sum_phases(problem, config.pdd, derive_seed(seed, {0}));
  const std::uint64_t check_seed = derive_seed(seed, {1});
  int checks = 0;

  auto design_at = [&](long steps) {
    const double scale = db_to_linear(config.delta_eta_db * static_cast<double>(steps));
    std::vector<double> targets;
    for (const auto& s : problem.specs) targets.push_back(s.eta * scale);
    return deterministic_design(problem, targets, v0, config.inner_iters);
  };
  auto passes = [&](const MultiuserSolution& sol) {
    ++checks;
    if (sol.precoders.empty()) return false;
    const auto est = mc_outage(sol.precoders, sol.v, problem.H_bar, problem.models, problem.specs,
                               config.check_samples, check_seed);
    for (int k = 0; k < problem.K(); ++k)
      if (est[k].outage > problem.specs[k].epsilon) return false;
    return true;
  };

  const long max_steps = static_cast<long>(std::ceil(config.max_inflation_db / config.delta_eta_db));
  MultiuserSolution best = design_at(0);
  long hi = 0;
  long lo = -1;  // largest grid point known to fail
  if (!passes(best)) {
    lo = 0;
    hi = 1;
    for (;;) {
      if (hi > max_steps) throw std::runtime_error("progressive_thresholding_mu: inflation cap reached");
      best = design_at(hi);
      if (passes(best)) break;
      lo = hi;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      MultiuserSolution trial = design_at(mid);
      if (passes(trial)) {
        hi = mid;
        best = std::move(trial);
      } else {
        lo = mid;
      }
    }
  }
  best.power = total_power(best.precoders);
  best.iterations = checks;
  return verify_multiuser(problem, std::move(best), config.verify_samples, derive_seed(seed, {2}));
}

}  // namespace irsbf
