#pragma once

#include "irsbf/random.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

/// Discrete phase set {exp(j 2 pi z / Z) : z = 0..Z-1}, Z = 2^bits.
/// bits == 0 denotes the continuous unit circle.
class PhaseAlphabet {
 public:
  PhaseAlphabet() = default;
  explicit PhaseAlphabet(int bits);
  static PhaseAlphabet continuous() { return PhaseAlphabet(); }

  bool is_continuous() const { return bits_ == 0; }
  int bits() const { return bits_; }
  /// Z; zero for the continuous set.
  int size() const { return bits_ == 0 ? 0 : 1 << bits_; }
  Complex element(int z) const;

  /// Index of the nearest element by angle. Equidistant candidates resolve to
  /// the lower index, with the Z-1 / 0 wraparound resolving to 0. x = 0 maps to 0.
  int nearest_index(Complex x) const;
  /// Nearest element; the continuous set returns x/|x| (1 for x = 0).
  Complex project(Complex x) const;
  CVector project(const CVector& x) const;

  bool contains(Complex x, double tol = 1e-12) const;
  bool contains_all(const CVector& x, double tol = 1e-12) const;

  /// Entries drawn uniformly from the set (uniform phase when continuous).
  CVector random_vector(int n, Rng& rng) const;

 private:
  int bits_ = 0;
};

/// Elementwise projection of a relaxed reflection vector onto the set.
inline CVector quantize_phases(const CVector& v, const PhaseAlphabet& alphabet) {
  return alphabet.project(v);
}

}  // namespace irsbf
