#pragma once

namespace irsbf {

struct GammaPQ {
  double P;  // regularized lower incomplete gamma
  double Q;  // regularized upper incomplete gamma, 1 - P
};

/// Regularized incomplete gamma functions for a > 0, x >= 0.
GammaPQ regularized_gamma(double a, double x);

/// First-order Marcum Q function. Throws std::domain_error for negative input.
double marcum_q1(double a, double b);

/// CDF at x of the noncentral chi-square law with 2 degrees of freedom and
/// noncentrality lambda (unit-variance real components), i.e. 1 - Q1(sqrt(lambda), sqrt(x)).
double noncentral_chi2_cdf_2dof(double x, double lambda);

}  // namespace irsbf
