#include "irsbf/phase.hpp"

#include <stdexcept>

namespace irsbf {

PhaseAlphabet::PhaseAlphabet(int bits) : bits_(bits) {
  if (bits < 0 || bits > 16) throw std::invalid_argument("PhaseAlphabet: bits must be in [0, 16]");
}

Complex PhaseAlphabet::element(int z) const {
  const int Z = size();
  if (Z == 0) throw std::logic_error("PhaseAlphabet::element on continuous set");
  z = ((z % Z) + Z) % Z;
  return std::polar(1.0, 2.0 * kPi * z / Z);
}

int PhaseAlphabet::nearest_index(Complex x) const {
  const int Z = size();
  if (Z == 0) throw std::logic_error("PhaseAlphabet::nearest_index on continuous set");
  if (x == Complex(0.0, 0.0)) return 0;
  double angle = std::arg(x);
  if (angle < 0.0) angle += 2.0 * kPi;
  const double step = 2.0 * kPi / Z;
  const int lo = static_cast<int>(std::floor(angle / step)) % Z;
  const int hi = (lo + 1) % Z;
  const double d_lo = angle - lo * step;
  const double d_hi = (lo + 1) * step - angle;
  if (std::abs(d_lo - d_hi) <= 1e-12) return std::min(lo, hi);
  return d_lo < d_hi ? lo : hi;
}

Complex PhaseAlphabet::project(Complex x) const {
  if (is_continuous()) {
    const double r = std::abs(x);
    return r > 0.0 ? x / r : Complex(1.0, 0.0);
  }
  return element(nearest_index(x));
}

CVector PhaseAlphabet::project(const CVector& x) const {
  CVector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = project(x(i));
  return out;
}

bool PhaseAlphabet::contains(Complex x, double tol) const {
  if (is_continuous()) return std::abs(std::abs(x) - 1.0) <= tol;
  return std::abs(x - project(x)) <= tol;
}

bool PhaseAlphabet::contains_all(const CVector& x, double tol) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!contains(x(i), tol)) return false;
  return true;
}

CVector PhaseAlphabet::random_vector(int n, Rng& rng) const {
  CVector out(n);
  for (int i = 0; i < n; ++i)
    out(i) = is_continuous() ? std::polar(1.0, 2.0 * kPi * rng.uniform()) : element(rng.uniform_int(size()));
  return out;
}

}  // namespace irsbf
