#pragma once

#include <vector>

#include "irsbf/types.hpp"

namespace irsbf {

struct BeamformingResult {
  std::vector<CVector> precoders;
  bool feasible = false;
  double power = 0.0;
  int iterations = 0;
};

/// Minimum total power precoders meeting |h_k^H w_k|^2 / (sum_{j!=k} |h_k^H w_j|^2 + sigma2_k) >= eta_k
/// for deterministic channels h_k, via the uplink-downlink duality fixed
/// point followed by the downlink power linear system.
BeamformingResult min_power_beamforming(const std::vector<CVector>& channels, const std::vector<double>& eta,
                                        const std::vector<double>& sigma2, int max_iter = 2000,
                                        double tol = 1e-13);

/// Per-user SINR of precoders on deterministic channels.
std::vector<double> deterministic_sinr(const std::vector<CVector>& channels, const std::vector<CVector>& precoders,
                                       const std::vector<double>& sigma2);

/// Powers p with p_k |h_k^H u_k|^2 / eta_k - sum_{j!=k} p_j |h_k^H u_j|^2 = sigma2_k for
/// fixed unit directions u_k; empty when no nonnegative solution exists.
RVector power_for_directions(const std::vector<CVector>& channels, const std::vector<CVector>& directions,
                             const std::vector<double>& eta, const std::vector<double>& sigma2);

}  // namespace irsbf
