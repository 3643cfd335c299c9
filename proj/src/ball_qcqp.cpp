#include "irsbf/ball_qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace irsbf {

BallConstraint BallConstraint::full(const CVector& center, double radius_sq) {
  return anchored(center, CVector::Zero(center.size()), -radius_sq, 1.0);
}

BallConstraint BallConstraint::anchored(CVector anchor, CVector offset, double gap, double weight) {
  if (anchor.size() != offset.size()) throw std::invalid_argument("BallConstraint: anchor/offset size mismatch");
  if (!(weight > 0.0)) throw std::invalid_argument("BallConstraint: weight must be positive");
  BallConstraint b;
  b.scope = Scope::Full;
  b.anchor = std::move(anchor);
  b.offset = std::move(offset);
  b.gap = gap;
  b.weight = weight;
  return b;
}

BallConstraint BallConstraint::coordinate(int index, Complex center, double radius_sq) {
  if (index < 0) throw std::invalid_argument("BallConstraint: negative coordinate index");
  if (!(radius_sq >= 0.0)) throw std::invalid_argument("BallConstraint: coordinate ball must be nonempty");
  BallConstraint b;
  b.scope = Scope::Coordinate;
  b.index = index;
  b.coord_center = center;
  b.coord_radius_sq = radius_sq;
  return b;
}

bool BallConstraint::empty() const {
  return scope == Scope::Full ? radius_sq() < 0.0 : coord_radius_sq < 0.0;
}

double BallConstraint::residual(const CVector& x) const {
  if (scope == Scope::Coordinate) return std::norm(x(index) - coord_center) - coord_radius_sq;
  const CVector d = x - anchor;
  return d.squaredNorm() + 2.0 * offset.dot(d).real() + gap;
}

CVector BallConstraint::project(const CVector& x) const {
  if (empty()) throw std::domain_error("BallConstraint::project on an empty ball");
  CVector out = x;
  if (scope == Scope::Coordinate) {
    const Complex d = x(index) - coord_center;
    const double r = std::sqrt(coord_radius_sq);
    if (std::abs(d) > r) out(index) = coord_center + r * d / std::abs(d);
    return out;
  }
  const double res = residual(x);
  if (res <= 0.0) return out;
  const CVector from_center = (x - anchor) + offset;
  const double dist = from_center.norm();
  const double radius = std::sqrt(std::max(0.0, dist * dist - res));
  // x - (1 - r/dist)(x - c), with 1 - r/dist = res / (dist (dist + r)).
  out -= (res / (dist * (dist + radius))) * from_center;
  return out;
}

BallConstraint complete_to_ball(const CVector& x0, double f, const CVector& g, double tau, double eps) {
  if (!(tau > 0.0)) throw std::invalid_argument("complete_to_ball: tau must be positive");
  // tau (||x - x0||^2 + 2 Re{(g/tau)^H (x - x0)} + (f - eps)/tau)
  return BallConstraint::anchored(x0, g / tau, (f - eps) / tau, tau);
}

double QcqpProblem::objective(const CVector& x) const {
  double value = (diag.array() * x.cwiseAbs2().array()).sum();
  if (linear.size() > 0) value += 2.0 * linear.dot(x).real();
  return value;
}

double QcqpProblem::max_violation(const CVector& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : balls) worst = std::max(worst, b.weighted_residual(x));
  for (const auto& b : coordinates) worst = std::max(worst, b.residual(x));
  return worst;
}

void QcqpProblem::validate() const {
  const Eigen::Index n = dim();
  if ((diag.array() < 0.0).any()) throw std::invalid_argument("QcqpProblem: negative objective weight");
  if (linear.size() != 0 && linear.size() != n) throw std::invalid_argument("QcqpProblem: linear term size");
  for (const auto& b : balls)
    if (b.scope != BallConstraint::Scope::Full || b.anchor.size() != n)
      throw std::invalid_argument("QcqpProblem: malformed full ball");
  std::vector<char> seen(n, 0);
  for (const auto& b : coordinates) {
    if (b.scope != BallConstraint::Scope::Coordinate || b.index >= n)
      throw std::invalid_argument("QcqpProblem: malformed coordinate ball");
    if (seen[b.index]++) throw std::invalid_argument("QcqpProblem: duplicate coordinate ball");
  }
}

namespace {

// Per-coordinate projection data for the inner minimizer.
struct CoordinateMap {
  std::vector<int> ball_of;  // -1 when the coordinate is free

  explicit CoordinateMap(const QcqpProblem& p) : ball_of(p.dim(), -1) {
    for (std::size_t j = 0; j < p.coordinates.size(); ++j) ball_of[p.coordinates[j].index] = static_cast<int>(j);
  }
};

// Projects y onto the coordinate balls; clamped[i] records whether entry i moved.
CVector clamp_coordinates(const QcqpProblem& p, const CoordinateMap& map, const CVector& y,
                          std::vector<char>* clamped = nullptr) {
  CVector x = y;
  if (clamped) clamped->assign(y.size(), 0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int j = map.ball_of[i];
    if (j < 0) continue;
    const BallConstraint& b = p.coordinates[j];
    const Complex d = y(i) - b.coord_center;
    const double r = std::sqrt(b.coord_radius_sq);
    if (std::abs(d) > r) {
      x(i) = b.coord_center + r * d / std::abs(d);
      if (clamped) (*clamped)[i] = 1;
    }
  }
  return x;
}

// Gradient of weighted_residual with respect to conj(x).
CVector residual_gradient(const BallConstraint& b, const CVector& x) {
  return b.weight * ((x - b.anchor) + b.offset);
}

// weight * center, formed without building the (possibly far) center.
CVector weighted_center(const BallConstraint& b) { return b.weight * b.anchor - b.weight * b.offset; }

class DualSolver {
 public:
  DualSolver(const QcqpProblem& p, const CVector& reference, double delta)
      : p_(p), map_(p), ref_(reference), delta_(delta), K_(static_cast<int>(p.balls.size())) {
    centers_.reserve(K_);
    for (const auto& b : p.balls) centers_.push_back(weighted_center(b));
  }

  // Minimizer of the Lagrangian for multipliers mu, with Jacobian data.
  CVector inner(const RVector& mu, RVector* D_out = nullptr, CVector* y_out = nullptr,
                std::vector<char>* clamped = nullptr) const {
    const Eigen::Index n = p_.dim();
    RVector D = p_.diag.array() + delta_;
    CVector s = delta_ * ref_;
    if (p_.linear.size() > 0) s -= p_.linear;
    for (int k = 0; k < K_; ++k) {
      D.array() += mu(k) * p_.balls[k].weight;
      s += mu(k) * centers_[k];
    }
    CVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = s(i) / D(i);
    if (D_out) *D_out = D;
    if (y_out) *y_out = y;
    return clamp_coordinates(p_, map_, y, clamped);
  }

  double lagrangian(const CVector& x, const RVector& mu, RVector* g) const {
    double value = p_.objective(x) + delta_ * (x - ref_).squaredNorm();
    for (int k = 0; k < K_; ++k) {
      const double gk = p_.balls[k].weighted_residual(x);
      if (g) (*g)(k) = gk;
      value += mu(k) * gk;
    }
    return value;
  }

  RMatrix hessian(const RVector& mu) const {
    RVector D;
    CVector y;
    std::vector<char> clamped;
    const CVector x = inner(mu, &D, &y, &clamped);
    const Eigen::Index n = p_.dim();
    CMatrix J(n, K_);
    for (int l = 0; l < K_; ++l) {
      const double w = p_.balls[l].weight;
      for (Eigen::Index i = 0; i < n; ++i) {
        Complex dy = (centers_[l](i) - w * y(i)) / D(i);
        if (clamped[i]) {
          const BallConstraint& b = p_.coordinates[map_.ball_of[i]];
          const Complex d = y(i) - b.coord_center;
          const double dist = std::abs(d);
          const Complex u = d / dist;
          dy = (std::sqrt(b.coord_radius_sq) / dist) * (dy - u * (std::conj(u) * dy).real());
        }
        J(i, l) = dy;
      }
    }
    CMatrix G(n, K_);
    for (int k = 0; k < K_; ++k) G.col(k) = residual_gradient(p_.balls[k], x);
    RMatrix H = 2.0 * (G.adjoint() * J).real();
    return 0.5 * (H + H.transpose());
  }

  int K() const { return K_; }

 private:
  const QcqpProblem& p_;
  CoordinateMap map_;
  CVector ref_;
  double delta_;
  int K_;
  std::vector<CVector> centers_;
};

double kkt_violation(const RVector& mu, const RVector& g) {
  double v = 0.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) v = std::max(v, mu(k) > 0.0 ? std::abs(g(k)) : std::max(0.0, g(k)));
  return v;
}

RVector project_simplex(const RVector& v) {
  RVector sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < sorted.size(); ++i) {
    cumulative += sorted(i);
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted(i) - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace

MinmaxSolution solve_minmax_feasibility(const QcqpProblem& problem, const QcqpOptions& options) {
  problem.validate();
  const int K = static_cast<int>(problem.balls.size());
  if (K == 0) throw std::invalid_argument("solve_minmax_feasibility: needs at least one full ball");
  const CoordinateMap map(problem);
  std::vector<CVector> centers;
  for (const auto& b : problem.balls) centers.push_back(weighted_center(b));

  auto primal_point = [&](const RVector& pi) {
    CVector s = CVector::Zero(problem.dim());
    double T = 0.0;
    for (int k = 0; k < K; ++k) {
      s += pi(k) * centers[k];
      T += pi(k) * problem.balls[k].weight;
    }
    return clamp_coordinates(problem, map, s / T);
  };
  auto evaluate = [&](const RVector& pi, CVector& x, RVector& g) {
    x = primal_point(pi);
    for (int k = 0; k < K; ++k) g(k) = problem.balls[k].weighted_residual(x);
    return pi.dot(g);
  };

  MinmaxSolution best;
  best.alpha = std::numeric_limits<double>::infinity();
  RVector pi = RVector::Constant(K, 1.0 / K);
  CVector x;
  RVector g(K);
  double psi = evaluate(pi, x, g);
  double step = 1.0;
  RVector pi_prev, g_prev;
  for (int it = 0; it < options.gradient_iters; ++it) {
    const double alpha = g.maxCoeff();
    if (alpha < best.alpha) {
      best.x = x;
      best.alpha = alpha;
      best.weights = pi;
    }
    best.duality_gap = best.alpha - psi;
    best.iterations = it + 1;
    if (best.duality_gap <= options.gap_tol) {
      best.converged = true;
      break;
    }
    if (K == 1) {
      best.converged = true;
      break;
    }
    if (pi_prev.size() > 0) {
      const RVector s = pi - pi_prev;
      const RVector y = g - g_prev;
      const double sy = s.dot(y);
      if (sy < 0.0) step = std::clamp(s.squaredNorm() / -sy, 1e-12, 1e12);
    }
    // Backtracking ascent along the projection arc.
    pi_prev = pi;
    g_prev = g;
    const double psi_prev = psi;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const RVector trial = project_simplex(pi_prev + step * g_prev);
      CVector xt;
      RVector gt(K);
      const double psit = evaluate(trial, xt, gt);
      if (psit >= psi_prev + 1e-4 * g_prev.dot(trial - pi_prev) - 1e-15 * std::abs(psi_prev)) {
        pi = trial;
        x = xt;
        g = gt;
        psi = psit;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || (pi - pi_prev).lpNorm<Eigen::Infinity>() == 0.0) {
      best.converged = best.duality_gap <= std::max(options.gap_tol, 1e-8);
      break;
    }
  }
  return best;
}

QcqpSolution solve_min_quadratic_over_balls(const QcqpProblem& problem, const CVector& reference,
                                            const QcqpOptions& options) {
  problem.validate();
  const Eigen::Index n = problem.dim();
  const CVector ref = reference.size() == n ? reference : CVector(CVector::Zero(n));
  const DualSolver dual(problem, ref, options.regularization);
  const int K = dual.K();

  QcqpSolution sol;
  RVector mu = RVector::Zero(K);
  if (K == 0) {
    sol.x = dual.inner(mu);
    sol.feasible = sol.converged = true;
    sol.objective = problem.objective(sol.x);
    sol.multipliers = mu;
    return sol;
  }

  const MinmaxSolution mm = solve_minmax_feasibility(problem, options);
  if (!(mm.alpha < 0.0)) {
    sol.x = mm.x;
    sol.feasible = false;
    sol.converged = mm.converged;
    sol.objective = problem.objective(mm.x);
    sol.kkt_residual = mm.alpha;
    sol.multipliers = mu;
    sol.iterations = mm.iterations;
    return sol;
  }
  sol.feasible = true;

  RVector g(K);
  CVector x = dual.inner(mu);
  double phi = dual.lagrangian(x, mu, &g);
  double violation = kkt_violation(mu, g);
  int it = 0;
  for (; it < options.newton_iters && violation > options.kkt_tol; ++it) {
    std::vector<int> free;
    for (int k = 0; k < K; ++k)
      if (mu(k) > 0.0 || g(k) > 0.0) free.push_back(k);
    RVector direction = RVector::Zero(K);
    const RMatrix H = dual.hessian(mu);
    const int F = static_cast<int>(free.size());
    RMatrix negH(F, F);
    RVector gF(F);
    for (int a = 0; a < F; ++a) {
      gF(a) = g(free[a]);
      for (int b = 0; b < F; ++b) negH(a, b) = -H(free[a], free[b]);
    }
    const double diag_scale = std::max(1e-300, negH.diagonal().cwiseAbs().maxCoeff());
    negH.diagonal().array() += 1e-12 * diag_scale;
    Eigen::LDLT<RMatrix> ldlt(negH);
    RVector dF = ldlt.solve(gF);
    if (ldlt.info() != Eigen::Success || !dF.allFinite() || dF.dot(gF) <= 0.0) dF = gF;
    for (int a = 0; a < F; ++a) direction(free[a]) = dF(a);

    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      const RVector trial = (mu + t * direction).cwiseMax(0.0);
      RVector gt(K);
      const CVector xt = dual.inner(trial);
      const double phit = dual.lagrangian(xt, trial, &gt);
      if (phit >= phi + 1e-4 * g.dot(trial - mu) - 1e-14 * std::abs(phi)) {
        mu = trial;
        x = xt;
        g = gt;
        phi = phit;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    violation = kkt_violation(mu, g);
    if (!accepted) break;
  }

  sol.iterations = it;
  sol.multipliers = mu;
  sol.converged = violation <= options.kkt_tol;
  double complementarity = 0.0;
  for (int k = 0; k < K; ++k) complementarity = std::max(complementarity, std::abs(mu(k) * g(k)));
  if (problem.max_violation(x) > 1e-8) {
    const CVector repaired = project_onto_intersection(problem, x);
    x = problem.max_violation(repaired) <= 1e-8 ? repaired : mm.x;
    sol.converged = false;
  }
  sol.x = x;
  sol.objective = problem.objective(x);
  sol.kkt_residual = std::max({violation, complementarity, std::max(0.0, problem.max_violation(x))});
  return sol;
}

CVector project_onto_intersection(const QcqpProblem& problem, const CVector& x, int max_rounds, double tol) {
  std::vector<const BallConstraint*> sets;
  for (const auto& b : problem.balls) sets.push_back(&b);
  for (const auto& b : problem.coordinates) sets.push_back(&b);
  if (sets.empty()) return x;
  std::vector<CVector> increments(sets.size(), CVector::Zero(x.size()));
  CVector current = x;
  for (int round = 0; round < max_rounds; ++round) {
    const CVector start = current;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const CVector shifted = current + increments[j];
      const CVector projected = sets[j]->project(shifted);
      increments[j] = shifted - projected;
      current = projected;
    }
    if ((current - start).norm() <= tol * std::max(1.0, current.norm())) break;
  }
  return current;
}

}  // namespace irsbf
