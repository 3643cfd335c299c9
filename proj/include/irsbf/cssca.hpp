#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "irsbf/ball_qcqp.hpp"
#include "irsbf/outage.hpp"
#include "irsbf/phase.hpp"
#include "irsbf/training.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

/// Estimated channels, error statistics and QoS targets of a multiuser downlink.
struct MultiuserProblem {
  std::vector<CMatrix> H_bar;  // per user, (N+1) x M
  std::vector<ErrorModel> models;
  std::vector<OutageSpec> specs;
  PhaseAlphabet alphabet{1};

  int K() const { return static_cast<int>(H_bar.size()); }
  int M() const { return static_cast<int>(H_bar.front().cols()); }
  int N() const { return static_cast<int>(H_bar.front().rows()) - 1; }
  void validate() const;
};

/// Stacked variable [w_1; ...; w_K; v]. When phases are not optimized the
/// v block is absent and `fixed_v` supplies the reflection vector.
struct CompositeLayout {
  int K = 1;
  int M = 1;
  int N = 1;
  bool optimize_phases = true;
  CVector fixed_v;

  Eigen::Index size() const { return static_cast<Eigen::Index>(K) * M + (optimize_phases ? N : 0); }
  Eigen::Index w_offset(int k) const { return static_cast<Eigen::Index>(k) * M; }
  Eigen::Index v_offset() const { return static_cast<Eigen::Index>(K) * M; }

  CVector precoder(const CVector& varpi, int k) const { return varpi.segment(w_offset(k), M); }
  std::vector<CVector> precoders(const CVector& varpi) const;
  CVector phases(const CVector& varpi) const { return optimize_phases ? CVector(varpi.tail(N)) : fixed_v; }
  CVector stack(const std::vector<CVector>& w, const CVector& v) const;
};

/// Logistic step 1 / (1 + exp(-vartheta x)).
double smooth_step(double x, double vartheta);
/// Logistic step continued by its tangent lines beyond |vartheta x| = zeta.
double clipped_step(double x, double vartheta, double zeta);
/// vartheta e^{-s} / (1 + e^{-s})^2 with s = clamp(vartheta x, -zeta, zeta); the
/// derivative of clipped_step.
double clipped_step_slope(double x, double vartheta, double zeta);

struct QosMargin {
  double z;  // eta (interference + sigma2) - desired
  double g;  // smooth_step(z)
};

/// QoS margin of user k on composite channel sample H_tilde_k.
QosMargin eval_qos_margin(const CVector& varpi, const CompositeLayout& layout, const CMatrix& H_tilde_k, int k,
                          double eta, double sigma2, double vartheta);

/// Gradient of g_k with respect to conj(varpi), using the clipped slope;
/// a real perturbation d changes g by 2 Re{grad^H d} to first order.
CVector grad_g(const CVector& varpi, const CompositeLayout& layout, const CMatrix& H_tilde_k, int k, double eta,
               double sigma2, double vartheta, double zeta);

/// Recursive estimates f_k^t and the gradient average of one constraint.
struct SurrogateState {
  double value = 0.0;
  CVector gradient;
  double tau = 1e-3;
  CVector anchor;
  int t = 0;

  /// value <- batch value; gradient <- (1 - rho) gradient + rho batch gradient.
  void update(const CVector& varpi, double batch_value, const CVector& batch_gradient, double rho);
  /// value + 2 Re{gradient^H (x - anchor)} + tau ||x - anchor||^2
  double evaluate(const CVector& x) const;
  BallConstraint ball(double epsilon) const { return complete_to_ball(anchor, value, gradient, tau, epsilon); }
};

struct CsscaConfig {
  double rho_exponent = 0.5;
  double gamma_exponent = 0.6;
  double tau = 1e-3;
  double vartheta = 100.0;
  double zeta = 8.0;
  int L = 1000;
  int T_H = 200;
  double xi_o = 1e-3;
  int window = 5;
  double window_violation = 0.005;
  int stage1_iters = 100;
  int stage2_iters = 100;
  int verify_samples = 100000;
  /// Samples for the closing common power scaling; 0 disables it.
  int scaling_samples = 20000;
  double scaling_step_db = 0.01;
  QcqpOptions qcqp;

  double rho(int t) const { return std::pow(1.0 + t, -rho_exponent); }
  double gamma(int t) const { return std::pow(1.0 + t, -gamma_exponent); }
};

struct CsscaTracePoint {
  int stage;
  int t;
  double power;          // Watts
  double max_violation;  // max_k f_k^t - epsilon_k
  bool subproblem_feasible;
};

struct CsscaStageResult {
  std::vector<CVector> precoders;  // Watts scale
  CVector v;
  std::vector<CsscaTracePoint> trace;
  bool converged = false;
};

/// One CSSCA stage. Phases are optimized (relaxed to |v_n| <= 1) when
/// `optimize_phases` is set, otherwise v stays fixed.
CsscaStageResult cssca_stage(const MultiuserProblem& problem, const std::vector<CVector>& w0, const CVector& v0,
                             bool optimize_phases, int stage, const CsscaConfig& config, std::uint64_t seed);

struct MultiuserSolution {
  CVector v;
  std::vector<CVector> precoders;
  double power = 0.0;
  std::vector<OutageEstimate> verification;
  bool feasible = false;  // verification passed at epsilon + 3 stderr + 0.005
  int iterations = 0;
  std::vector<CsscaTracePoint> trace;
};

/// Passes iff every user's estimate is at most epsilon + 3 stderr + 0.005.
bool outage_verdict(const std::vector<OutageEstimate>& estimates, const std::vector<OutageSpec>& specs);

MultiuserSolution verify_multiuser(const MultiuserProblem& problem, MultiuserSolution solution, int samples,
                                   std::uint64_t seed);

/// Feasible starting precoders for phases v: MRT directions with the
/// SINR-balancing powers, falling back to the minimum-power beamformer.
std::vector<CVector> initial_precoders(const MultiuserProblem& problem, const CVector& v);

/// Smallest common amplitude gain, on a power grid of `step_db`, that brings every user's
/// Monte Carlo outage to at most epsilon. Raising all precoders by a common
/// factor never lowers any SINR. Returns 1 when no scaling is needed and
/// throws std::runtime_error when 40 dB of gain is not enough.
double outage_power_scaling(const MultiuserProblem& problem, const std::vector<CVector>& precoders,
                            const CVector& v, int samples, double step_db, std::uint64_t seed);

MultiuserSolution two_stage_cssca(const MultiuserProblem& problem, const CsscaConfig& config, std::uint64_t seed);

void write_cssca_trace_csv(std::ostream& os, const std::vector<CsscaTracePoint>& trace);

}  // namespace irsbf
