#pragma once

#include <vector>

#include "irsbf/types.hpp"

namespace irsbf {

/// Ball ||x - c||^2 <= r^2 stored relative to an anchor a, with offset
/// o = a - c and gap = ||o||^2 - r^2, so that
///   residual(x) = ||x - a||^2 + 2 Re{o^H (x - a)} + gap = ||x - c||^2 - r^2
/// is evaluated without cancellation when c is far from a.
/// A coordinate ball constrains the single entry x[index] and stores its
/// center and radius directly. `weight` scales the residual in reports and
/// in the feasibility subproblem.
struct BallConstraint {
  enum class Scope { Full, Coordinate };

  Scope scope = Scope::Full;
  CVector anchor;
  CVector offset;
  double gap = 0.0;
  double weight = 1.0;
  int index = -1;
  Complex coord_center{0.0, 0.0};
  double coord_radius_sq = 1.0;

  static BallConstraint full(const CVector& center, double radius_sq);
  static BallConstraint anchored(CVector anchor, CVector offset, double gap, double weight = 1.0);
  static BallConstraint coordinate(int index, Complex center, double radius_sq);

  CVector center() const { return anchor - offset; }
  double radius_sq() const { return offset.squaredNorm() - gap; }
  bool empty() const;

  double residual(const CVector& x) const;
  double weighted_residual(const CVector& x) const { return weight * residual(x); }
  /// Euclidean projection; requires a nonempty ball.
  CVector project(const CVector& x) const;
};

/// Ball equivalent of  f + 2 Re{g^H (x - x0)} + tau ||x - x0||^2 <= eps,
/// with weight tau so that weighted_residual(x) is the left side minus eps.
BallConstraint complete_to_ball(const CVector& x0, double f, const CVector& g, double tau, double eps);

/// minimize  sum_i diag_i |x_i|^2 + 2 Re{linear^H x}
/// subject to full and coordinate balls. `diag` must be nonnegative.
struct QcqpProblem {
  RVector diag;
  CVector linear;  // empty means zero
  std::vector<BallConstraint> balls;        // full scope
  std::vector<BallConstraint> coordinates;  // coordinate scope

  Eigen::Index dim() const { return diag.size(); }
  double objective(const CVector& x) const;
  /// Largest weighted residual over full balls and residual over coordinate balls.
  double max_violation(const CVector& x) const;
  void validate() const;
};

struct QcqpSolution {
  CVector x;
  bool feasible = false;   // false: the constraint set was found empty
  bool converged = false;
  double objective = 0.0;
  double kkt_residual = 0.0;
  RVector multipliers;
  int iterations = 0;
};

struct MinmaxSolution {
  CVector x;
  double alpha = 0.0;       // max_k weighted_residual_k(x) over full balls
  double duality_gap = 0.0;
  RVector weights;          // simplex weights of the dual
  bool converged = false;
  int iterations = 0;
};

struct QcqpOptions {
  double regularization = 1e-10;  // delta ||x - reference||^2 keeps the minimizer unique
  double kkt_tol = 1e-10;
  double gap_tol = 1e-10;
  int newton_iters = 200;
  int gradient_iters = 20000;
};

/// min over coordinate balls of max_k weighted_residual_k(x).
MinmaxSolution solve_minmax_feasibility(const QcqpProblem& problem, const QcqpOptions& options = {});

/// Solves the QCQP by maximizing its Lagrangian dual over the full-ball
/// multipliers (coordinate balls stay explicit in the inner minimization).
/// Feasibility is decided first through the minmax problem: if its optimal
/// value is not negative the returned solution is the minmax point with
/// feasible = false. `reference` anchors the regularization (zero if empty).
QcqpSolution solve_min_quadratic_over_balls(const QcqpProblem& problem, const CVector& reference = CVector(),
                                            const QcqpOptions& options = {});

/// Dykstra's alternating projections onto the intersection of all balls.
CVector project_onto_intersection(const QcqpProblem& problem, const CVector& x, int max_rounds = 10000,
                                  double tol = 1e-12);

}  // namespace irsbf
