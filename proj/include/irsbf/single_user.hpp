#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "irsbf/outage.hpp"
#include "irsbf/phase.hpp"
#include "irsbf/training.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

struct PddConfig {
  double rho = 10.0;
  double rho_shrink = 0.8;
  int outer_iters = 50;
  int inner_iters = 30;
  double violation_tol = 1e-6;
  double threshold_decay = 0.9;
  /// Replace the diagonal of the reflection block by zero before solving.
  /// On the unit-modulus set this only drops a constant, and it makes the
  /// iterates independent of any weight that acts on the diagonal alone.
  bool zero_diagonal = true;
};

struct WsmaxConfig {
  double omega_lo = -40.0;
  double omega_hi = 10.0;
  double omega_step = 1.0;
  PddConfig pdd;
  BisectionConfig bisection;

  std::vector<double> omega_grid() const;
};

struct SingleUserProblem {
  CMatrix H_bar;  // (N+1) x M estimate
  ErrorModel model;
  OutageSpec spec;
  PhaseAlphabet alphabet{1};

  int N() const { return static_cast<int>(H_bar.rows()) - 1; }
};

/// Eigen-split of the reflection block A = U diag(eig) U^H of a normalized
/// quadratic form, with c the coupling to the constant entry.
struct QuadraticSplit {
  CMatrix U;
  RVector eig;
  CVector c;

  RVector positive() const { return eig.cwiseMax(0.0); }
  RVector negative() const { return eig.cwiseMin(0.0); }
  bool has_negative() const { return (eig.array() < 0.0).any(); }
};

QuadraticSplit split_quadratic(const CMatrix& A, const CVector& c);

/// b = 2 rho A+ anchor - rho lambda + u + 2 rho c
CVector v_step_offset(const QuadraticSplit& split, const CVector& u, const CVector& lambda, double rho,
                      const CVector& anchor);
/// ((1 + mu) I - 2 rho A-)^{-1} b
CVector v_of_mu(const QuadraticSplit& split, const CVector& b, double rho, double mu);
/// Minimizer of the linearized penalty subproblem over ||v||^2 <= N.
CVector v_step(const QuadraticSplit& split, const CVector& u, const CVector& lambda, double rho,
               const CVector& anchor);
/// Elementwise projection of v + rho lambda onto the alphabet.
CVector u_step(const CVector& v, const CVector& lambda, double rho, const PhaseAlphabet& alphabet);

struct PddResult {
  CVector v;          // best discrete iterate
  double objective;   // x^H Phi x at v, x = [1; v]
  bool converged = false;
  double violation = 0.0;
  int outer_iterations = 0;
  /// Augmented Lagrangian after every half-step, one vector per outer iteration.
  std::vector<std::vector<double>> lagrangian_trace;
};

/// Maximizes x^H Phi x over x = [1; v], v in the alphabet, by penalty dual
/// decomposition. Phi is (N+1) x (N+1) Hermitian.
PddResult maximize_quadratic_form(const CMatrix& Phi, const PhaseAlphabet& alphabet, const PddConfig& config,
                                  const CVector& init);

/// H_bar H_bar^H + omega V_bar
CMatrix weighted_sum_matrix(const CMatrix& H_bar, const ErrorModel& model, double omega);

PddResult pdd_weighted_sum(const SingleUserProblem& problem, double omega, const PddConfig& config,
                           const CVector& init);

/// Shared random start for every PDD run of one instance.
CVector initial_phases(const SingleUserProblem& problem, std::uint64_t seed);

struct SingleUserSolution {
  CVector v;
  CVector w;
  double power = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct OmegaTracePoint {
  double omega;
  double objective;
  double power;
  bool converged;
};

struct WsmaxResult {
  SingleUserSolution best;
  double best_omega = 0.0;
  std::vector<OmegaTracePoint> trace;
};

WsmaxResult wsmax(const SingleUserProblem& problem, const WsmaxConfig& config, std::uint64_t seed);
void write_omega_trace_csv(std::ostream& os, const std::vector<OmegaTracePoint>& trace);

/// Solution with v fixed: power by bisection and the MRT precoder.
SingleUserSolution solve_power_for_phases(const SingleUserProblem& problem, const CVector& v,
                                          const BisectionConfig& config = {});

CVector msp_solve(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed);
CVector mpv_solve(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed);

struct MvrResult {
  CVector v;
  double ratio = 0.0;
  int iterations = 0;
};

/// Dinkelbach iterations on msp / variance_term starting from the MSP solution.
MvrResult mvr_maximize(const SingleUserProblem& problem, const PddConfig& config, std::uint64_t seed);
double msp_variance_ratio(const SingleUserProblem& problem, const CVector& v);

struct BcdResult {
  SingleUserSolution solution;
  int sweeps = 0;
};

/// Power bisection where each trial power runs index-order coordinate
/// sweeps over the alphabet minimizing the outage, warm-started from the
/// previous trial, until a sweep changes nothing.
BcdResult bcd_baseline(const SingleUserProblem& problem, const BisectionConfig& config, std::uint64_t seed);
/// Index-order coordinate sweeps at fixed power; returns the number of sweeps.
int bcd_minimize_outage(const SingleUserProblem& problem, double p, CVector& v);

/// Global minimum power over all Z^N configurations. The first minimizer in
/// lexicographic index order wins ties. Throws if Z^N exceeds `budget`.
SingleUserSolution exhaustive_search(const SingleUserProblem& problem, const BisectionConfig& config = {},
                                     long budget = 1L << 20);

/// MSP phases; the deterministic SNR target is raised in steps of
/// `delta_eta_db` until the outage at the matching MRT power is at most epsilon.
SingleUserSolution progressive_thresholding_su(const SingleUserProblem& problem, double delta_eta_db,
                                               const PddConfig& config, std::uint64_t seed, int max_steps = 200000);

/// Direct link only: the reflection path is not used.
SingleUserSolution no_irs_baseline(const SingleUserProblem& problem, const BisectionConfig& config = {});

}  // namespace irsbf
