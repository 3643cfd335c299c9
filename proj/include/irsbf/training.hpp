#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "irsbf/phase.hpp"
#include "irsbf/random.hpp"
#include "irsbf/system_model.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

enum class PatternKind { QuantizedDft, Hadamard, Custom };

/// Training reflection patterns, one column [1; v_n] per training symbol.
struct TrainingPattern {
  CMatrix V;  // (N+1) x N_r
  PatternKind kind = PatternKind::Custom;
  PhaseAlphabet alphabet;

  int N() const { return static_cast<int>(V.rows()) - 1; }
  int length() const { return static_cast<int>(V.cols()); }
};

/// Quantized DFT: the first N_r columns of the (N+1)-point DFT, reused
/// cyclically when N_r > N+1, each phase projected onto `alphabet` (left
/// untouched for the continuous alphabet).
/// Hadamard: first N+1 rows of the Sylvester matrix of order N_r; requires a
/// 1-bit alphabet, N_r a power of two and N_r >= N+1.
TrainingPattern build_training_pattern(int N, int N_r, const PhaseAlphabet& alphabet, PatternKind kind);

/// Custom pattern; checks that row 0 is all ones.
TrainingPattern make_custom_pattern(CMatrix V, const PhaseAlphabet& alphabet);

void write_pattern_csv(std::ostream& os, const TrainingPattern& pattern);
/// Reads the format written by write_pattern_csv (row,col,re,im).
TrainingPattern read_pattern_csv(std::istream& is, const PhaseAlphabet& alphabet);

/// Moore-Penrose inverse with singular values below 1e-12 * sigma_max dropped.
CMatrix pseudo_inverse(const CMatrix& A);

/// Statistics of the composite-channel error. Each column of an error sample
/// is CN(0, V_bar); samples are produced as factor * Z with Z i.i.d. CN(0,1).
struct ErrorModel {
  CMatrix V_bar;   // (N+1) x (N+1), Hermitian PSD
  CMatrix factor;  // (N+1) x D with factor * factor^H = V_bar
  double p_u = 0.0;
  double eps2 = 0.0;

  int N() const { return static_cast<int>(V_bar.rows()) - 1; }
  double v11() const { return V_bar(0, 0).real(); }
  CVector r() const { return V_bar.col(0).tail(N()); }
  CMatrix R() const { return V_bar.bottomRightCorner(N(), N()); }

  /// Builds a model from an arbitrary PSD covariance (symmetric square-root factor).
  static ErrorModel from_covariance(const CMatrix& covariance);
};

ErrorModel error_covariance(const TrainingPattern& pattern, double p_u, double eps2);

struct ChannelEstimate {
  CMatrix H_bar;  // (N+1) x M

  CVector h_d_hat() const { return H_bar.row(0).adjoint(); }
  CMatrix H_hat() const { return H_bar.bottomRows(H_bar.rows() - 1); }
};

/// Symbol-level LS estimation from simulated uplink training, one estimate per user.
std::vector<ChannelEstimate> ls_estimate(const ChannelSet& channels, const TrainingPattern& pattern,
                                         double p_u, double eps2, std::uint64_t seed);

/// Error samples of size (N+1) x M.
std::vector<CMatrix> sample_csi_errors(const ErrorModel& model, int M, int count, std::uint64_t seed);
CMatrix sample_csi_error(const ErrorModel& model, int M, Rng& rng);

/// Estimates H_tilde + error drawn from the model (no symbol-level replay).
std::vector<ChannelEstimate> sample_estimates(const ChannelSet& channels, const ErrorModel& model,
                                              std::uint64_t seed);

/// First and second moments of a user's composite channel.
struct ChannelStatistics {
  CMatrix mean;        // (N+1) x M
  CMatrix covariance;  // (N+1) x (N+1), summed over the M columns
};

/// Sample moments of user `user`'s composite channel over fading draws at fixed positions.
ChannelStatistics estimate_channel_statistics(const ScenarioGeometry& geometry, const PropagationParams& params,
                                              const std::vector<Point3>& users, int user, int draws,
                                              std::uint64_t seed);

/// LMMSE estimate from the same uplink observation model as ls_estimate.
ChannelEstimate lmmse_estimate(const CMatrix& H_tilde, const TrainingPattern& pattern, double p_u, double eps2,
                               const ChannelStatistics& stats, std::uint64_t seed);
/// Summed-over-columns error covariance of the LMMSE estimate.
CMatrix lmmse_error_covariance(const TrainingPattern& pattern, double p_u, double eps2, int M,
                               const CMatrix& channel_covariance);

/// sum ||H_bar - H_tilde||^2 / sum ||H_tilde||^2
double nmse(const std::vector<CMatrix>& estimates, const std::vector<CMatrix>& truths);

}  // namespace irsbf
