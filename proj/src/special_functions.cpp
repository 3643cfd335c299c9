#include "irsbf/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace irsbf {

namespace {

constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double log_poisson(int k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -mean + k * std::log(mean) - std::lgamma(k + 1.0);
}

// P(a, x) by the power series, valid for x < a + 1.
double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction, valid for x >= a + 1.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

struct MarcumPair {
  double q1;
  double cdf;  // 1 - q1, accumulated separately
};

// Poisson(a^2/2) mixture of Q(k+1, b^2/2), summed outward from the Poisson mode.
MarcumPair marcum_pair(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::domain_error("marcum_q1: arguments must be nonnegative");
  if (b == 0.0) return {1.0, 0.0};
  const double x = 0.5 * a * a;
  const double y = 0.5 * b * b;
  const double log_y = std::log(y);
  const int mode = static_cast<int>(std::floor(x));

  // q_k = Q(k+1, y), p_k = P(k+1, y); q_{k+1} = q_k + pmf_y(k+1).
  const GammaPQ start = regularized_gamma(mode + 1.0, y);
  auto pmf_y = [&](int k) { return std::exp(-y + k * log_y - std::lgamma(k + 1.0)); };

  double q_sum = 0.0;
  double p_sum = 0.0;
  constexpr double kWeightFloor = 1e-18;

  double q = start.Q, p = start.P;
  for (int k = mode;; ++k) {
    const double w = std::exp(log_poisson(k, x));
    q_sum += w * q;
    p_sum += w * p;
    if (w < kWeightFloor && k > x) break;
    const double step = pmf_y(k + 1);
    q = std::min(1.0, q + step);
    p = std::max(0.0, p - step);
  }
  q = start.Q;
  p = start.P;
  for (int k = mode - 1; k >= 0; --k) {
    const double step = pmf_y(k + 1);
    q = std::max(0.0, q - step);
    p = std::min(1.0, p + step);
    const double w = std::exp(log_poisson(k, x));
    q_sum += w * q;
    p_sum += w * p;
    if (w < kWeightFloor) break;
  }
  // The smaller tail carries the accuracy; the larger one is its complement.
  if (p_sum < q_sum) {
    const double cdf = std::clamp(p_sum, 0.0, 1.0);
    return {1.0 - cdf, cdf};
  }
  const double q1 = std::clamp(q_sum, 0.0, 1.0);
  return {q1, 1.0 - q1};
}

}  // namespace

GammaPQ regularized_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("regularized_gamma: requires a > 0 and x >= 0");
  if (x == 0.0) return {0.0, 1.0};
  if (x < a + 1.0) {
    const double P = gamma_series(a, x);
    return {P, 1.0 - P};
  }
  const double Q = gamma_continued_fraction(a, x);
  return {1.0 - Q, Q};
}

double marcum_q1(double a, double b) { return marcum_pair(a, b).q1; }

double noncentral_chi2_cdf_2dof(double x, double lambda) {
  if (!(x >= 0.0) || !(lambda >= 0.0))
    throw std::domain_error("noncentral_chi2_cdf_2dof: arguments must be nonnegative");
  return marcum_pair(std::sqrt(lambda), std::sqrt(x)).cdf;
}

}  // namespace irsbf
