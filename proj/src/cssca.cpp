#include "irsbf/cssca.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "irsbf/beamforming.hpp"

namespace irsbf {

void MultiuserProblem::validate() const {
  if (H_bar.empty()) throw std::invalid_argument("MultiuserProblem: no users");
  if (models.size() != H_bar.size() || specs.size() != H_bar.size())
    throw std::invalid_argument("MultiuserProblem: per-user inputs must have equal length");
  for (std::size_t k = 0; k < H_bar.size(); ++k) {
    if (H_bar[k].rows() != H_bar[0].rows() || H_bar[k].cols() != H_bar[0].cols())
      throw std::invalid_argument("MultiuserProblem: channel dimension mismatch");
    if (models[k].V_bar.rows() != H_bar[k].rows()) throw std::invalid_argument("MultiuserProblem: error model size");
    specs[k].validate();
  }
}

std::vector<CVector> CompositeLayout::precoders(const CVector& varpi) const {
  std::vector<CVector> w(K);
  for (int k = 0; k < K; ++k) w[k] = precoder(varpi, k);
  return w;
}

CVector CompositeLayout::stack(const std::vector<CVector>& w, const CVector& v) const {
  CVector out(size());
  for (int k = 0; k < K; ++k) out.segment(w_offset(k), M) = w[k];
  if (optimize_phases) out.tail(N) = v;
  return out;
}

double smooth_step(double x, double vartheta) {
  const double s = vartheta * x;
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double clipped_step_slope(double x, double vartheta, double zeta) {
  const double s = std::abs(std::clamp(vartheta * x, -zeta, zeta));
  const double e = std::exp(-s);
  return vartheta * e / ((1.0 + e) * (1.0 + e));
}

double clipped_step(double x, double vartheta, double zeta) {
  const double s = vartheta * x;
  if (std::abs(s) < zeta) return smooth_step(x, vartheta);
  const double knee = (s > 0.0 ? zeta : -zeta) / vartheta;
  return smooth_step(knee, vartheta) + clipped_step_slope(knee, vartheta, zeta) * (x - knee);
}

namespace {

// a_j = e^H w_j for all j, with e = H_tilde^H [1; v].
CVector link_amplitudes(const CVector& varpi, const CompositeLayout& layout, const CVector& e) {
  CVector a(layout.K);
  for (int j = 0; j < layout.K; ++j) a(j) = e.dot(layout.precoder(varpi, j));
  return a;
}

double margin_from_amplitudes(const CVector& a, int k, double eta, double sigma2) {
  double interference = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (j != k) interference += std::norm(a(j));
  return eta * (interference + sigma2) - std::norm(a(k));
}

}  // namespace

QosMargin eval_qos_margin(const CVector& varpi, const CompositeLayout& layout, const CMatrix& H_tilde_k, int k,
                          double eta, double sigma2, double vartheta) {
  const CVector e = effective_row(H_tilde_k, augment(layout.phases(varpi)));
  const double z = margin_from_amplitudes(link_amplitudes(varpi, layout, e), k, eta, sigma2);
  return {z, smooth_step(z, vartheta)};
}

CVector grad_g(const CVector& varpi, const CompositeLayout& layout, const CMatrix& H_tilde_k, int k, double eta,
               double sigma2, double vartheta, double zeta) {
  const CVector e = effective_row(H_tilde_k, augment(layout.phases(varpi)));
  const CVector a = link_amplitudes(varpi, layout, e);
  const double slope = clipped_step_slope(margin_from_amplitudes(a, k, eta, sigma2), vartheta, zeta);
  CVector grad = CVector::Zero(layout.size());
  CVector cascade_sum;
  if (layout.optimize_phases) cascade_sum = CVector::Zero(layout.M);
  for (int j = 0; j < layout.K; ++j) {
    const double coef = j == k ? -1.0 : eta;
    grad.segment(layout.w_offset(j), layout.M) = (slope * coef * a(j)) * e;
    if (layout.optimize_phases) cascade_sum += (coef * std::conj(a(j))) * layout.precoder(varpi, j);
  }
  if (layout.optimize_phases) grad.tail(layout.N) = slope * (H_tilde_k.bottomRows(layout.N) * cascade_sum);
  return grad;
}

void SurrogateState::update(const CVector& varpi, double batch_value, const CVector& batch_gradient, double rho) {
  if (gradient.size() != batch_gradient.size()) gradient = CVector::Zero(batch_gradient.size());
  value = batch_value;
  gradient = (1.0 - rho) * gradient + rho * batch_gradient;
  anchor = varpi;
  ++t;
}

double SurrogateState::evaluate(const CVector& x) const {
  const CVector d = x - anchor;
  return value + 2.0 * gradient.dot(d).real() + tau * d.squaredNorm();
}

bool outage_verdict(const std::vector<OutageEstimate>& estimates, const std::vector<OutageSpec>& specs) {
  for (std::size_t k = 0; k < estimates.size(); ++k)
    if (estimates[k].outage > specs[k].epsilon + 3.0 * estimates[k].std_error + 0.005) return false;
  return true;
}

MultiuserSolution verify_multiuser(const MultiuserProblem& problem, MultiuserSolution solution, int samples,
                                   std::uint64_t seed) {
  solution.verification =
      mc_outage(solution.precoders, solution.v, problem.H_bar, problem.models, problem.specs, samples, seed);
  solution.feasible = outage_verdict(solution.verification, problem.specs);
  return solution;
}

std::vector<CVector> initial_precoders(const MultiuserProblem& problem, const CVector& v) {
  const int K = problem.K();
  const CVector x = augment(v);
  std::vector<CVector> channels(K), directions(K);
  std::vector<double> eta(K), sigma2(K);
  for (int k = 0; k < K; ++k) {
    channels[k] = effective_row(problem.H_bar[k], x);
    directions[k] = channels[k].normalized();
    eta[k] = problem.specs[k].eta;
    sigma2[k] = problem.specs[k].sigma2;
  }
  std::vector<CVector> w(K);
  const RVector p = power_for_directions(channels, directions, eta, sigma2);
  if (p.size() == K) {
    for (int k = 0; k < K; ++k) w[k] = std::sqrt(p(k)) * directions[k];
    return w;
  }
  const BeamformingResult bf = min_power_beamforming(channels, eta, sigma2);
  if (bf.feasible) return bf.precoders;
  for (int k = 0; k < K; ++k) w[k] = std::sqrt(eta[k] * sigma2[k]) / channels[k].norm() * directions[k];
  return w;
}

namespace {

// Channels and error factors rescaled so that the noise power is one and the
// precoders are O(1): H' = H scale / sigma, w = scale w'.
struct ScaledProblem {
  std::vector<CMatrix> H;
  std::vector<CMatrix> F;
  double scale;
};

ScaledProblem rescale(const MultiuserProblem& problem, double scale) {
  ScaledProblem sp;
  sp.scale = scale;
  for (int k = 0; k < problem.K(); ++k) {
    const double factor = scale / std::sqrt(problem.specs[k].sigma2);
    sp.H.push_back(problem.H_bar[k] * factor);
    sp.F.push_back(problem.models[k].factor * factor);
  }
  return sp;
}

}  // namespace

CsscaStageResult cssca_stage(const MultiuserProblem& problem, const std::vector<CVector>& w0, const CVector& v0,
                             bool optimize_phases, int stage, const CsscaConfig& config, std::uint64_t seed) {
  problem.validate();
  const int K = problem.K();
  const int M = problem.M();
  const int N = problem.N();
  if (static_cast<int>(w0.size()) != K || v0.size() != N) throw std::invalid_argument("cssca_stage: bad start");

  double start_power = 0.0;
  for (const auto& w : w0) start_power += w.squaredNorm();
  if (!(start_power > 0.0)) throw std::invalid_argument("cssca_stage: zero starting precoders");
  const ScaledProblem sp = rescale(problem, std::sqrt(start_power / K));

  CompositeLayout layout{K, M, N, optimize_phases, optimize_phases ? CVector() : v0};
  std::vector<CVector> w_scaled(K);
  for (int k = 0; k < K; ++k) w_scaled[k] = w0[k] / sp.scale;
  CVector varpi = layout.stack(w_scaled, v0);

  QcqpProblem qp;
  qp.diag = RVector::Zero(layout.size());
  qp.diag.head(static_cast<Eigen::Index>(K) * M).setOnes();
  if (optimize_phases)
    for (int n = 0; n < N; ++n) qp.coordinates.push_back(BallConstraint::coordinate(layout.v_offset() + n, 0.0, 1.0));

  std::vector<SurrogateState> states(K);
  for (auto& s : states) s.tau = config.tau;

  CsscaStageResult result;
  std::vector<CVector> history;
  Rng rng(seed);
  const double noise = 1.0;
  for (int t = 0; t < (optimize_phases ? config.stage1_iters : config.stage2_iters); ++t) {
    const CVector x = augment(layout.phases(varpi));
    double max_violation = -1.0;
    qp.balls.clear();
    for (int k = 0; k < K; ++k) {
      const double eta = problem.specs[k].eta;
      // Value batch: the error enters only through F^H x, so e = e_mean - n with n ~ CN(0, ||F^H x||^2 I).
      const CVector e_mean = effective_row(sp.H[k], x);
      const double spread = (sp.F[k].adjoint() * x).squaredNorm();
      double value = 0.0;
      for (int l = 0; l < config.L; ++l) {
        const CVector e = e_mean - rng.cscg_vector(M, spread);
        value += smooth_step(margin_from_amplitudes(link_amplitudes(varpi, layout, e), k, eta, noise),
                             config.vartheta);
      }
      value /= config.L;
      CVector gradient = CVector::Zero(layout.size());
      for (int l = 0; l < config.T_H; ++l) {
        const CMatrix H_sample = sp.H[k] - sp.F[k] * rng.cscg_matrix(sp.F[k].cols(), M);
        gradient += grad_g(varpi, layout, H_sample, k, eta, noise, config.vartheta, config.zeta);
      }
      gradient /= config.T_H;
      states[k].update(varpi, value, gradient, config.rho(t));
      qp.balls.push_back(states[k].ball(problem.specs[k].epsilon));
      max_violation = std::max(max_violation, value - problem.specs[k].epsilon);
    }

    double power = 0.0;
    for (int k = 0; k < K; ++k) power += layout.precoder(varpi, k).squaredNorm();
    power *= sp.scale * sp.scale;

    const QcqpSolution sub = solve_min_quadratic_over_balls(qp, varpi, config.qcqp);
    result.trace.push_back({stage, t, power, max_violation, sub.feasible});
    history.push_back(varpi);
    const double step = config.gamma(t);
    varpi = (1.0 - step) * varpi + step * sub.x;

    const int W = config.window;
    if (static_cast<int>(result.trace.size()) > W) {
      const auto& now = result.trace.back();
      const auto& then = result.trace[result.trace.size() - 1 - W];
      double mean_violation = 0.0;
      for (int i = 0; i < W; ++i) mean_violation += result.trace[result.trace.size() - 1 - i].max_violation;
      mean_violation /= W;
      const double power_change = std::abs(now.power - then.power) / now.power;
      const double move = (history.back() - history[history.size() - 1 - W]).norm() / history.back().norm();
      if (power_change < config.xi_o && move < config.xi_o && mean_violation <= config.window_violation) {
        result.converged = true;
        break;
      }
    }
  }

  result.precoders = layout.precoders(varpi);
  for (auto& w : result.precoders) w *= sp.scale;
  result.v = layout.phases(varpi);
  return result;
}

double outage_power_scaling(const MultiuserProblem& problem, const std::vector<CVector>& precoders,
                            const CVector& v, int samples, double step_db, std::uint64_t seed) {
  auto passes = [&](long steps) {
    const double gain = std::sqrt(db_to_linear(step_db * static_cast<double>(steps)));
    std::vector<CVector> scaled = precoders;
    for (auto& w : scaled) w *= gain;
    const auto est = mc_outage(scaled, v, problem.H_bar, problem.models, problem.specs, samples, seed);
    for (int k = 0; k < problem.K(); ++k)
      if (est[k].outage > problem.specs[k].epsilon) return false;
    return true;
  };
  if (passes(0)) return 1.0;
  const long cap = static_cast<long>(std::ceil(40.0 / step_db));
  long lo = 0;
  long hi = 1;
  while (!passes(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > cap) throw std::runtime_error("outage_power_scaling: outage floor above target");
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (passes(mid) ? hi : lo) = mid;
  }
  return std::sqrt(db_to_linear(step_db * static_cast<double>(hi)));
}

MultiuserSolution two_stage_cssca(const MultiuserProblem& problem, const CsscaConfig& config, std::uint64_t seed) {
  problem.validate();
  Rng init_rng(derive_seed(seed, {0}));
  const CVector v0 = PhaseAlphabet::continuous().random_vector(problem.N(), init_rng);
  const std::vector<CVector> w0 = initial_precoders(problem, v0);

  const CsscaStageResult first = cssca_stage(problem, w0, v0, true, 1, config, derive_seed(seed, {1}));
  const CVector vq = quantize_phases(first.v, problem.alphabet);
  const CsscaStageResult second = cssca_stage(problem, first.precoders, vq, false, 2, config, derive_seed(seed, {2}));

  MultiuserSolution sol;
  sol.v = vq;
  sol.precoders = second.precoders;
  if (config.scaling_samples > 0) {
    try {
      const double gain = outage_power_scaling(problem, sol.precoders, sol.v, config.scaling_samples,
                                               config.scaling_step_db, derive_seed(seed, {4}));
      for (auto& w : sol.precoders) w *= gain;
    } catch (const std::runtime_error&) {
      // Left unscaled; verification reports the violation.
    }
  }
  for (const auto& w : sol.precoders) sol.power += w.squaredNorm();
  sol.trace = first.trace;
  sol.trace.insert(sol.trace.end(), second.trace.begin(), second.trace.end());
  sol.iterations = static_cast<int>(sol.trace.size());
  return verify_multiuser(problem, std::move(sol), config.verify_samples, derive_seed(seed, {3}));
}

void write_cssca_trace_csv(std::ostream& os, const std::vector<CsscaTracePoint>& trace) {
  const auto flags = os.flags();
  os << std::setprecision(12) << "stage,t,power_dbm,max_violation,subproblem_feasible\n";
  for (const auto& pt : trace)
    os << pt.stage << ',' << pt.t << ',' << watts_to_dbm(pt.power) << ',' << pt.max_violation << ','
       << (pt.subproblem_feasible ? 1 : 0) << '\n';
  os.flags(flags);
}

}  // namespace irsbf
