#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "irsbf/random.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

/// Node placement and array sizes. Positions in meters. The AP carries a
/// half-wavelength ULA along the y-axis; the IRS is a half-wavelength UPA in
/// the y-z plane with element index n = iz * ny + iy.
struct ScenarioGeometry {
  Point3 ap_position{2.0, 0.0, 0.0};
  Point3 irs_position{0.0, 45.0, 2.0};
  Point3 user_cluster_center{2.0, 45.0, 0.0};
  double user_cluster_radius = 1.5;
  int M = 4;
  int N = 40;
  int Ny = 4;
  int Nz = 10;
  int K = 1;

  /// Geometry with the default positions and an IRS grid whose y-dimension
  /// is the largest divisor of N not exceeding 4.
  static ScenarioGeometry with_sizes(int N, int M, int K);

  void validate() const;
};

struct PropagationParams {
  double C0 = 1e-3;  // -30 dB at D0
  double D0 = 1.0;
  double alpha_au = 3.6;
  double alpha_ai = 2.2;
  double alpha_iu = 2.2;
  double beta_au = 0.0;
  double beta_ai = 1.9952623149688795;  // 3 dB
  double beta_iu = 0.0;
  double sigma2 = 1e-11;  // -80 dBm

  void validate() const;
};

/// Ground-truth channels of one scenario realization.
///   G        N x M   AP -> IRS
///   h_r[k]   N       IRS -> user k (the link is h_r^H)
///   h_d[k]   M       AP -> user k (the link is h_d^H)
///   H[k]     N x M   diag(h_r^H) G
///   H_tilde  (N+1) x M, row 0 is h_d^H and rows 1..N are H[k]
struct ChannelSet {
  CMatrix G;
  std::vector<CVector> h_r;
  std::vector<CVector> h_d;
  std::vector<CMatrix> H;
  std::vector<CMatrix> H_tilde;
  std::vector<Point3> user_positions;

  int M() const { return static_cast<int>(G.cols()); }
  int N() const { return static_cast<int>(G.rows()); }
  int K() const { return static_cast<int>(h_d.size()); }
};

/// C0 (d / D0)^(-alpha). Throws std::domain_error for d <= 0.
double path_loss(double d, double alpha, const PropagationParams& params);

/// Unit-modulus array responses, element positions in half wavelengths.
CVector ula_response(int M, const Point3& direction);
CVector upa_response(int Ny, int Nz, const Point3& direction);

/// sqrt(gain) * (sqrt(beta/(1+beta)) LoS + sqrt(1/(1+beta)) NLoS) with
/// i.i.d. CN(0,1) NLoS entries. `los` must be unit modulus.
CMatrix sample_rician_channel(const CMatrix& los, double beta, double gain, Rng& rng);
CMatrix sample_rician_channel(const CMatrix& los, double beta, double gain, std::uint64_t seed);

/// Uniform over the user disc (z = cluster center height).
std::vector<Point3> draw_user_positions(const ScenarioGeometry& geometry, Rng& rng);

/// Builds H[k] and H_tilde[k] from the raw links.
ChannelSet assemble_channels(CMatrix G, std::vector<CVector> h_r, std::vector<CVector> h_d);

/// Fading draw for fixed user positions.
ChannelSet synthesize_channels(const ScenarioGeometry& geometry, const PropagationParams& params,
                               const std::vector<Point3>& users, Rng& rng);

/// Positions and fading from one seed.
ChannelSet synthesize_scenario(const ScenarioGeometry& geometry, const PropagationParams& params,
                               std::uint64_t seed);

/// CSV dump: matrix,user,row,col,re,im
void write_channels_csv(std::ostream& os, const ChannelSet& channels);

}  // namespace irsbf
