#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace irsbf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Point3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// Augmented reflection vector [1; v].
template <typename Derived>
CVector augment(const Eigen::MatrixBase<Derived>& v) {
  CVector out(v.size() + 1);
  out(0) = Complex(1.0, 0.0);
  out.tail(v.size()) = v;
  return out;
}

/// Real part of x^H A x (A assumed Hermitian).
template <typename DerivedA, typename DerivedX>
double hermitian_form(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedX>& x) {
  return x.dot(A * x).real();
}

/// (A + A^H) / 2
template <typename Derived>
CMatrix hermitian_part(const Eigen::MatrixBase<Derived>& A) {
  return (A + A.adjoint()) * 0.5;
}

/// Row vector x^H H, returned as a column vector (H^H x).
template <typename DerivedH, typename DerivedX>
CVector effective_row(const Eigen::MatrixBase<DerivedH>& H, const Eigen::MatrixBase<DerivedX>& x) {
  return H.adjoint() * x;
}

}  // namespace irsbf
