#include "irsbf/beamforming.hpp"

#include <cmath>
#include <stdexcept>

namespace irsbf {

namespace {

void check_sizes(const std::vector<CVector>& channels, const std::vector<double>& eta,
                 const std::vector<double>& sigma2) {
  if (channels.empty()) throw std::invalid_argument("beamforming: no users");
  if (eta.size() != channels.size() || sigma2.size() != channels.size())
    throw std::invalid_argument("beamforming: per-user inputs must have equal length");
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (channels[k].size() != channels[0].size()) throw std::invalid_argument("beamforming: antenna mismatch");
    if (!(eta[k] > 0.0) || !(sigma2[k] > 0.0)) throw std::invalid_argument("beamforming: eta and sigma2 must be positive");
  }
}

}  // namespace

std::vector<double> deterministic_sinr(const std::vector<CVector>& channels, const std::vector<CVector>& precoders,
                                       const std::vector<double>& sigma2) {
  std::vector<double> out(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) {
    double interference = 0.0;
    for (std::size_t j = 0; j < precoders.size(); ++j)
      if (j != k) interference += std::norm(channels[k].dot(precoders[j]));
    out[k] = std::norm(channels[k].dot(precoders[k])) / (interference + sigma2[k]);
  }
  return out;
}

RVector power_for_directions(const std::vector<CVector>& channels, const std::vector<CVector>& directions,
                             const std::vector<double>& eta, const std::vector<double>& sigma2) {
  const int K = static_cast<int>(channels.size());
  RMatrix Psi(K, K);
  RVector rhs(K);
  for (int k = 0; k < K; ++k) {
    rhs(k) = sigma2[k];
    for (int j = 0; j < K; ++j) {
      const double gain = std::norm(channels[k].dot(directions[j]));
      Psi(k, j) = j == k ? gain / eta[k] : -gain;
    }
  }
  const RVector p = Psi.fullPivLu().solve(rhs);
  if (!p.allFinite() || (p.array() <= 0.0).any()) return {};
  if ((Psi * p - rhs).norm() > 1e-8 * rhs.norm()) return {};
  return p;
}

BeamformingResult min_power_beamforming(const std::vector<CVector>& channels, const std::vector<double>& eta,
                                        const std::vector<double>& sigma2, int max_iter, double tol) {
  check_sizes(channels, eta, sigma2);
  const int K = static_cast<int>(channels.size());
  const Eigen::Index M = channels[0].size();
  std::vector<CVector> h(K);
  for (int k = 0; k < K; ++k) h[k] = channels[k] / std::sqrt(sigma2[k]);

  BeamformingResult result;
  RVector lambda = RVector::Zero(K);
  CMatrix Sigma_inv;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    CMatrix Sigma = CMatrix::Identity(M, M);
    for (int k = 0; k < K; ++k) Sigma.noalias() += lambda(k) * h[k] * h[k].adjoint();
    Sigma_inv = Sigma.llt().solve(CMatrix::Identity(M, M));
    RVector next(K);
    for (int k = 0; k < K; ++k) {
      const double q = hermitian_form(Sigma_inv, h[k]);
      next(k) = 1.0 / ((1.0 + 1.0 / eta[k]) * q);
    }
    result.iterations = it + 1;
    if (!next.allFinite() || next.maxCoeff() > 1e15) break;
    const double change = ((next - lambda).array().abs() / next.array().max(1e-300)).maxCoeff();
    lambda = next;
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) return result;

  CMatrix Sigma = CMatrix::Identity(M, M);
  for (int k = 0; k < K; ++k) Sigma.noalias() += lambda(k) * h[k] * h[k].adjoint();
  const Eigen::LLT<CMatrix> llt(Sigma);
  std::vector<CVector> directions(K);
  for (int k = 0; k < K; ++k) {
    directions[k] = llt.solve(h[k]);
    directions[k].normalize();
  }
  const RVector p = power_for_directions(channels, directions, eta, sigma2);
  if (p.size() == 0) return result;
  result.precoders.resize(K);
  for (int k = 0; k < K; ++k) result.precoders[k] = std::sqrt(p(k)) * directions[k];
  result.power = p.sum();
  result.feasible = true;
  return result;
}

}  // namespace irsbf
