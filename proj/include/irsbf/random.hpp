#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "irsbf/types.hpp"

namespace irsbf {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent and a path of integer tags. Every
/// simulation stream (channel draw, estimation noise, algorithm init,
/// verification) is addressed this way so that experiments are reproducible
/// and algorithms see identical channels.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }
  int uniform_int(int n) { return static_cast<int>(uniform() * n); }

  /// Circularly-symmetric complex Gaussian with the given variance.
  Complex cscg(double variance = 1.0) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  CMatrix cscg_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0) {
    CMatrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = cscg(variance);
    return out;
  }

  CVector cscg_vector(Eigen::Index n, double variance = 1.0) { return cscg_matrix(n, 1, variance); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace irsbf
