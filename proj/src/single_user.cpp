#include "irsbf/single_user.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace irsbf {

std::vector<double> WsmaxConfig::omega_grid() const {
  if (!(omega_step > 0.0) || omega_hi < omega_lo) throw std::invalid_argument("WsmaxConfig: invalid omega grid");
  const int count = static_cast<int>(std::floor((omega_hi - omega_lo) / omega_step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = omega_lo + i * omega_step;
  return grid;
}

QuadraticSplit split_quadratic(const CMatrix& A, const CVector& c) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(A));
  return {eig.eigenvectors(), eig.eigenvalues(), c};
}

CVector v_step_offset(const QuadraticSplit& split, const CVector& u, const CVector& lambda, double rho,
                      const CVector& anchor) {
  const CVector pos = split.U * (split.positive().asDiagonal() * (split.U.adjoint() * anchor));
  return 2.0 * rho * pos - rho * lambda + u + 2.0 * rho * split.c;
}

CVector v_of_mu(const QuadraticSplit& split, const CVector& b, double rho, double mu) {
  const RVector denom = (1.0 + mu) - 2.0 * rho * split.negative().array();
  return split.U * (denom.cwiseInverse().asDiagonal() * (split.U.adjoint() * b));
}

CVector v_step(const QuadraticSplit& split, const CVector& u, const CVector& lambda, double rho,
               const CVector& anchor) {
  const double N = static_cast<double>(u.size());
  const CVector b = v_step_offset(split, u, lambda, rho, anchor);
  if (!split.has_negative()) {
    const double nb = b.squaredNorm();
    return nb <= N ? b : CVector(b / std::sqrt(nb / N));
  }
  // Work in the eigenbasis: ||v(mu)||^2 = sum |beta_i|^2 / (1 + mu - 2 rho sigma_i)^2.
  const CVector beta = split.U.adjoint() * b;
  const RVector shift = 1.0 - 2.0 * rho * split.negative().array();
  auto norm_sq = [&](double mu) { return (beta.cwiseAbs2().array() / (shift.array() + mu).square()).sum(); };
  if (norm_sq(0.0) <= N) return v_of_mu(split, b, rho, 0.0);
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (norm_sq(hi) > N) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw std::runtime_error("v_step: could not bracket the norm multiplier");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = norm_sq(mid);
    if (g > N)
      lo = mid;
    else
      hi = mid;
    if (N - norm_sq(hi) <= 1e-8 || hi - lo <= 1e-15 * hi) break;
  }
  return v_of_mu(split, b, rho, hi);
}

CVector u_step(const CVector& v, const CVector& lambda, double rho, const PhaseAlphabet& alphabet) {
  return alphabet.project(v + rho * lambda);
}

namespace {

double quadratic_value(const CMatrix& Phi, const CVector& v) { return hermitian_form(Phi, augment(v)); }

}  // namespace

PddResult maximize_quadratic_form(const CMatrix& Phi, const PhaseAlphabet& alphabet, const PddConfig& config,
                                  const CVector& init) {
  const Eigen::Index N = Phi.rows() - 1;
  if (Phi.cols() != Phi.rows() || init.size() != N)
    throw std::invalid_argument("maximize_quadratic_form: dimension mismatch");

  PddResult result;
  CVector u = alphabet.project(init);
  result.v = u;
  result.objective = quadratic_value(Phi, u);

  // The constant entry does not influence the iterates; dropping it keeps the
  // scale a function of the reflection block and coupling only.
  CMatrix work = hermitian_part(Phi);
  work(0, 0) = 0.0;
  if (config.zero_diagonal) work.diagonal().setZero();
  Eigen::SelfAdjointEigenSolver<CMatrix> scale_eig(work, Eigen::EigenvaluesOnly);
  const double scale = scale_eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) {
    result.converged = true;
    return result;
  }
  work /= scale;
  const QuadraticSplit split = split_quadratic(work.bottomRightCorner(N, N), work.col(0).tail(N));

  auto lagrangian = [&](const CVector& v, const CVector& uu, const CVector& lambda, double rho) {
    return -quadratic_value(work, v) + (v - uu + rho * lambda).squaredNorm() / (2.0 * rho);
  };

  CVector v = u;
  CVector lambda = CVector::Zero(N);
  double rho = config.rho;
  double threshold = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < config.outer_iters; ++outer) {
    std::vector<double> trace;
    for (int inner = 0; inner < config.inner_iters; ++inner) {
      const CVector v_next = v_step(split, u, lambda, rho, v);
      trace.push_back(lagrangian(v_next, u, lambda, rho));
      const CVector u_next = u_step(v_next, lambda, rho, alphabet);
      trace.push_back(lagrangian(v_next, u_next, lambda, rho));
      const double change = (v_next - v).norm();
      const bool u_same = (u_next - u).cwiseAbs().maxCoeff() == 0.0;
      v = v_next;
      u = u_next;
      const double obj = quadratic_value(Phi, u);
      if (obj > result.objective) {
        result.objective = obj;
        result.v = u;
      }
      if (u_same && change <= 1e-12 * std::sqrt(static_cast<double>(N))) break;
    }
    result.lagrangian_trace.push_back(std::move(trace));
    result.outer_iterations = outer + 1;
    const double violation = (v - u).cwiseAbs().maxCoeff();
    result.violation = violation;
    if (violation <= config.violation_tol) {
      result.converged = true;
      break;
    }
    if (violation <= threshold)
      lambda += (v - u) / rho;
    else
      rho *= config.rho_shrink;
    threshold = config.threshold_decay * violation;
  }
  return result;
}

CMatrix weighted_sum_matrix(const CMatrix& H_bar, const ErrorModel& model, double omega) {
  return hermitian_part(H_bar * H_bar.adjoint() + omega * model.V_bar);
}

PddResult pdd_weighted_sum(const SingleUserProblem& problem, double omega, const PddConfig& config,
                           const CVector& init) {
  return maximize_quadratic_form(weighted_sum_matrix(problem.H_bar, problem.model, omega), problem.alphabet,
                                 config, init);
}

CVector initial_phases(const SingleUserProblem& problem, std::uint64_t seed) {
  Rng rng(seed);
  return problem.alphabet.random_vector(problem.N(), rng);
}

SingleUserSolution solve_power_for_phases(const SingleUserProblem& problem, const CVector& v,
                                          const BisectionConfig& config) {
  SingleUserSolution sol;
  sol.v = v;
  sol.power = bisect_power(v, problem.H_bar, problem.model, problem.spec, config);
  sol.w = mrt_precoder(v, problem.H_bar, sol.power);
  return sol;
}

WsmaxResult wsmax(const SingleUserProblem& problem, const WsmaxConfig& config, std::uint64_t seed) {
  const CVector init = initial_phases(problem, seed);
  WsmaxResult result;
  result.best.power = std::numeric_limits<double>::infinity();
  for (double omega : config.omega_grid()) {
    const PddResult pdd = pdd_weighted_sum(problem, omega, config.pdd, init);
    const SingleUserSolution sol = solve_power_for_phases(problem, pdd.v, config.bisection);
    result.trace.push_back({omega, pdd.objective, sol.power, pdd.converged});
    if (sol.power < result.best.power) {
      result.best = sol;
      result.best.converged = pdd.converged;
      result.best_omega = omega;
    }
  }
  result.best.iterations = static_cast<int>(result.trace.size());
  return result;
}

void write_omega_trace_csv(std::ostream& os, const std::vector<OmegaTracePoint>& trace) {
  const auto flags = os.flags();
  os << std::setprecision(12) << "omega,objective,power_dbm,converged\n";
  for (const auto& pt : trace)
    os << pt.omega << ',' << pt.objective << ',' << watts_to_dbm(pt.power) << ',' << (pt.converged ? 1 : 0) << '\n';
  os.flags(flags);
}

CVector msp_solve(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed) {
  return pdd_weighted_sum(problem, 0.0, config, initial_phases(problem, seed)).v;
}

CVector mpv_solve(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed) {
  return pdd_weighted_sum(problem, 1.0, config, initial_phases(problem, seed)).v;
}

double msp_variance_ratio(const SingleUserProblem& problem, const CVector& v) {
  const SignalStats stats = signal_stats(v, problem.H_bar, problem.model);
  if (!(stats.variance_term > 0.0)) return std::numeric_limits<double>::infinity();
  return stats.msp / stats.variance_term;
}

MvrResult mvr_maximize(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed) {
  const CVector init = initial_phases(problem, seed);
  MvrResult result;
  result.v = pdd_weighted_sum(problem, 0.0, config, init).v;
  result.ratio = msp_variance_ratio(problem, result.v);
  if (!std::isfinite(result.ratio)) return result;
  for (int it = 0; it < 50; ++it) {
    result.iterations = it + 1;
    const CVector candidate = pdd_weighted_sum(problem, -result.ratio, config, init).v;
    const double ratio = msp_variance_ratio(problem, candidate);
    if (!(ratio > result.ratio)) break;
    const double rel_change = (ratio - result.ratio) / result.ratio;
    result.v = candidate;
    result.ratio = ratio;
    if (rel_change < 1e-6) break;
  }
  return result;
}

int bcd_minimize_outage(const SingleUserProblem& problem, double p, CVector& v) {
  const int N = problem.N();
  const int Z = problem.alphabet.size();
  if (Z == 0) throw std::invalid_argument("bcd_minimize_outage: needs a discrete alphabet");
  double current = single_user_outage(v, problem.H_bar, problem.model, p, problem.spec);
  int sweeps = 0;
  for (bool changed = true; changed && sweeps < 1000;) {
    changed = false;
    ++sweeps;
    for (int n = 0; n < N; ++n) {
      const Complex original = v(n);
      Complex best = original;
      for (int z = 0; z < Z; ++z) {
        const Complex candidate = problem.alphabet.element(z);
        if (candidate == original) continue;
        v(n) = candidate;
        const double value = single_user_outage(v, problem.H_bar, problem.model, p, problem.spec);
        if (value < current) {
          current = value;
          best = candidate;
        }
      }
      v(n) = best;
      if (best != original) changed = true;
    }
  }
  return sweeps;
}

BcdResult bcd_baseline(const SingleUserProblem& problem, const BisectionConfig& config, std::uint64_t seed) {
  BcdResult result;
  CVector v = initial_phases(problem, seed);
  const double epsilon = problem.spec.epsilon;
  auto feasible_at = [&](double p, CVector& phases) {
    result.sweeps += bcd_minimize_outage(problem, p, phases);
    return single_user_outage(phases, problem.H_bar, problem.model, p, problem.spec) <= epsilon;
  };
  const SignalStats stats0 = signal_stats(v, problem.H_bar, problem.model);
  double p_hi = problem.spec.eta * problem.spec.sigma2 / std::max(stats0.msp, 1e-300);
  double p_lo = 0.0;
  int growths = 0;
  while (!feasible_at(p_hi, v)) {
    if (++growths > config.max_growth) throw std::runtime_error("bcd_baseline: could not reach the outage target");
    p_lo = p_hi;
    p_hi *= config.growth;
  }
  CVector v_hi = v;
  for (int it = 0; it < config.max_iter && p_hi - p_lo > config.p_rel_tol * p_hi; ++it) {
    const double mid = 0.5 * (p_lo + p_hi);
    CVector trial = v_hi;
    if (feasible_at(mid, trial)) {
      p_hi = mid;
      v_hi = trial;
    } else {
      p_lo = mid;
    }
  }
  result.solution = solve_power_for_phases(problem, v_hi, config);
  result.solution.iterations = result.sweeps;
  return result;
}

SingleUserSolution exhaustive_search(const SingleUserProblem& problem, const BisectionConfig& config, long budget) {
  const int N = problem.N();
  const int Z = problem.alphabet.size();
  if (Z == 0) throw std::invalid_argument("exhaustive_search: needs a discrete alphabet");
  if (N * std::log2(static_cast<double>(Z)) > std::log2(static_cast<double>(budget)))
    throw std::invalid_argument("exhaustive_search: search space exceeds the budget");

  std::vector<int> digits(N, 0);
  CVector v = CVector::Constant(N, problem.alphabet.element(0));
  SingleUserSolution best;
  best.power = std::numeric_limits<double>::infinity();
  long count = 0;
  while (true) {
    ++count;
    const double p = bisect_power(v, problem.H_bar, problem.model, problem.spec, config);
    if (p < best.power) {
      best.power = p;
      best.v = v;
    }
    // Most significant digit first, so the first minimizer is lexicographically smallest.
    int pos = N - 1;
    while (pos >= 0 && ++digits[pos] == Z) {
      digits[pos] = 0;
      v(pos) = problem.alphabet.element(0);
      --pos;
    }
    if (pos < 0) break;
    v(pos) = problem.alphabet.element(digits[pos]);
  }
  best.w = mrt_precoder(best.v, problem.H_bar, best.power);
  best.iterations = static_cast<int>(count);
  return best;
}

SingleUserSolution progressive_thresholding_su(const SingleUserProblem& problem, double delta_eta_db,
                                               const PddConfig& config, std::uint64_t seed, int max_steps) {
  if (!(delta_eta_db > 0.0)) throw std::invalid_argument("progressive_thresholding_su: step must be positive");
  SingleUserSolution sol;
  sol.v = msp_solve(problem, config, seed);
  const SignalStats stats = signal_stats(sol.v, problem.H_bar, problem.model);
  if (!(stats.msp > 0.0)) throw std::runtime_error("progressive_thresholding_su: zero estimated channel");
  const double base_db = linear_to_db(problem.spec.eta);
  sol.converged = false;
  for (int step = 0; step < max_steps; ++step) {
    const double target = db_to_linear(base_db + step * delta_eta_db);
    const double p = target * problem.spec.sigma2 / stats.msp;
    sol.iterations = step + 1;
    if (single_user_outage(stats, p, problem.spec) <= problem.spec.epsilon) {
      sol.power = p;
      sol.converged = true;
      break;
    }
    sol.power = p;
  }
  sol.w = mrt_precoder(sol.v, problem.H_bar, sol.power);
  return sol;
}

SingleUserSolution no_irs_baseline(const SingleUserProblem& problem, const BisectionConfig& config) {
  return solve_power_for_phases(problem, CVector::Zero(problem.N()), config);
}

}  // namespace irsbf
