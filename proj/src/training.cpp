#include "irsbf/training.hpp"

#include <algorithm>
#include <istream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace irsbf {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

RMatrix sylvester_hadamard(int order) {
  RMatrix H = RMatrix::Ones(1, 1);
  while (H.rows() < order) {
    const Eigen::Index n = H.rows();
    RMatrix next(2 * n, 2 * n);
    next << H, H, H, -H;
    H = std::move(next);
  }
  return H;
}

void require_psd(const CMatrix& A, const char* what) {
  if (A.rows() != A.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(A));
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not positive semidefinite");
}

}  // namespace

TrainingPattern build_training_pattern(int N, int N_r, const PhaseAlphabet& alphabet, PatternKind kind) {
  if (N < 1) throw std::invalid_argument("build_training_pattern: N must be >= 1");
  if (N_r < 1) throw std::invalid_argument("build_training_pattern: N_r must be >= 1");
  TrainingPattern pattern;
  pattern.kind = kind;
  pattern.alphabet = alphabet;
  pattern.V.resize(N + 1, N_r);

  switch (kind) {
    case PatternKind::QuantizedDft: {
      const int order = N + 1;
      for (int col = 0; col < N_r; ++col) {
        const int c = col % order;
        pattern.V(0, col) = 1.0;
        for (int row = 1; row <= N; ++row) {
          const Complex entry = std::polar(1.0, -2.0 * kPi * ((static_cast<long long>(row) * c) % order) / order);
          pattern.V(row, col) = alphabet.is_continuous() ? entry : alphabet.project(entry);
        }
      }
      break;
    }
    case PatternKind::Hadamard: {
      if (alphabet.bits() != 1) throw std::invalid_argument("build_training_pattern: Hadamard needs 1-bit phases");
      if (!is_power_of_two(N_r) || N_r < N + 1)
        throw std::invalid_argument("build_training_pattern: no Hadamard matrix of order " + std::to_string(N_r) +
                                    " with at least " + std::to_string(N + 1) + " rows");
      pattern.V = sylvester_hadamard(N_r).topRows(N + 1).cast<Complex>();
      break;
    }
    case PatternKind::Custom:
      throw std::invalid_argument("build_training_pattern: use make_custom_pattern for custom patterns");
  }
  return pattern;
}

TrainingPattern make_custom_pattern(CMatrix V, const PhaseAlphabet& alphabet) {
  if (V.rows() < 2 || V.cols() < 1) throw std::invalid_argument("make_custom_pattern: pattern too small");
  for (Eigen::Index c = 0; c < V.cols(); ++c)
    if (std::abs(V(0, c) - 1.0) > 1e-12) throw std::invalid_argument("make_custom_pattern: row 0 must be all ones");
  TrainingPattern pattern;
  pattern.V = std::move(V);
  pattern.kind = PatternKind::Custom;
  pattern.alphabet = alphabet;
  return pattern;
}

void write_pattern_csv(std::ostream& os, const TrainingPattern& pattern) {
  const auto flags = os.flags();
  os << std::setprecision(17) << "row,col,re,im\n";
  for (Eigen::Index j = 0; j < pattern.V.cols(); ++j)
    for (Eigen::Index i = 0; i < pattern.V.rows(); ++i)
      os << i << ',' << j << ',' << pattern.V(i, j).real() << ',' << pattern.V(i, j).imag() << '\n';
  os.flags(flags);
}

TrainingPattern read_pattern_csv(std::istream& is, const PhaseAlphabet& alphabet) {
  std::string line;
  std::getline(is, line);
  std::vector<std::tuple<long, long, double, double>> entries;
  long rows = 0, cols = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long i, j;
    double re, im;
    if (!(ss >> i >> j >> re >> im)) throw std::invalid_argument("read_pattern_csv: malformed line '" + line + "'");
    entries.emplace_back(i, j, re, im);
    rows = std::max(rows, i + 1);
    cols = std::max(cols, j + 1);
  }
  CMatrix V = CMatrix::Zero(rows, cols);
  for (const auto& [i, j, re, im] : entries) V(i, j) = Complex(re, im);
  return make_custom_pattern(std::move(V), alphabet);
}

CMatrix pseudo_inverse(const CMatrix& A) {
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? 1e-12 * s(0) : 0.0;
  RVector inv = RVector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

ErrorModel ErrorModel::from_covariance(const CMatrix& covariance) {
  require_psd(covariance, "ErrorModel::from_covariance");
  const CMatrix C = hermitian_part(covariance);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(C);
  const RVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  ErrorModel model;
  model.V_bar = C;
  model.factor = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
  return model;
}

ErrorModel error_covariance(const TrainingPattern& pattern, double p_u, double eps2) {
  if (!(p_u > 0.0)) throw std::invalid_argument("error_covariance: p_u must be positive");
  if (!(eps2 >= 0.0)) throw std::invalid_argument("error_covariance: eps2 must be nonnegative");
  const CMatrix V_pinv = pseudo_inverse(pattern.V);  // N_r x (N+1)
  ErrorModel model;
  model.p_u = p_u;
  model.eps2 = eps2;
  model.factor = std::sqrt(eps2 / p_u) * V_pinv.adjoint();
  model.V_bar = hermitian_part(model.factor * model.factor.adjoint());
  return model;
}

CMatrix sample_csi_error(const ErrorModel& model, int M, Rng& rng) {
  return model.factor * rng.cscg_matrix(model.factor.cols(), M);
}

std::vector<CMatrix> sample_csi_errors(const ErrorModel& model, int M, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_csi_errors: count must be >= 1");
  Rng rng(seed);
  std::vector<CMatrix> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample_csi_error(model, M, rng));
  return out;
}

std::vector<ChannelEstimate> ls_estimate(const ChannelSet& channels, const TrainingPattern& pattern,
                                         double p_u, double eps2, std::uint64_t seed) {
  if (!(p_u > 0.0)) throw std::invalid_argument("ls_estimate: p_u must be positive");
  if (pattern.V.rows() != channels.N() + 1) throw std::invalid_argument("ls_estimate: pattern size mismatch");
  Rng rng(seed);
  const CMatrix V_pinv = pseudo_inverse(pattern.V);
  const double amplitude = std::sqrt(p_u);
  std::vector<ChannelEstimate> out;
  for (const CMatrix& Ht : channels.H_tilde) {
    const CMatrix noise = rng.cscg_matrix(channels.M(), pattern.length(), eps2);
    const CMatrix Y = amplitude * Ht.adjoint() * pattern.V + noise;
    out.push_back({((1.0 / amplitude) * Y * V_pinv).adjoint()});
  }
  return out;
}

std::vector<ChannelEstimate> sample_estimates(const ChannelSet& channels, const ErrorModel& model,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ChannelEstimate> out;
  for (const CMatrix& Ht : channels.H_tilde) out.push_back({Ht + sample_csi_error(model, channels.M(), rng)});
  return out;
}

ChannelStatistics estimate_channel_statistics(const ScenarioGeometry& geometry, const PropagationParams& params,
                                              const std::vector<Point3>& users, int user, int draws,
                                              std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("estimate_channel_statistics: need at least two draws");
  if (user < 0 || user >= static_cast<int>(users.size()))
    throw std::invalid_argument("estimate_channel_statistics: user index out of range");
  Rng rng(seed);
  std::vector<CMatrix> samples;
  samples.reserve(draws);
  for (int d = 0; d < draws; ++d) samples.push_back(synthesize_channels(geometry, params, users, rng).H_tilde[user]);
  ChannelStatistics stats;
  stats.mean = CMatrix::Zero(samples[0].rows(), samples[0].cols());
  for (const CMatrix& s : samples) stats.mean += s;
  stats.mean /= static_cast<double>(draws);
  stats.covariance = CMatrix::Zero(samples[0].rows(), samples[0].rows());
  for (const CMatrix& s : samples) {
    const CMatrix centered = s - stats.mean;
    stats.covariance.noalias() += centered * centered.adjoint();
  }
  stats.covariance = hermitian_part(stats.covariance / static_cast<double>(draws));
  return stats;
}

namespace {

CMatrix lmmse_gain(const TrainingPattern& pattern, double p_u, double eps2, int M, const CMatrix& C) {
  const CMatrix& V = pattern.V;
  CMatrix inner = p_u * V.adjoint() * C * V;
  inner.diagonal().array() += M * eps2;
  return C * V * inner.ldlt().solve(CMatrix::Identity(V.cols(), V.cols()));
}

}  // namespace

ChannelEstimate lmmse_estimate(const CMatrix& H_tilde, const TrainingPattern& pattern, double p_u, double eps2,
                               const ChannelStatistics& stats, std::uint64_t seed) {
  if (!(p_u > 0.0)) throw std::invalid_argument("lmmse_estimate: p_u must be positive");
  require_psd(stats.covariance, "lmmse_estimate");
  const int M = static_cast<int>(H_tilde.cols());
  Rng rng(seed);
  const double amplitude = std::sqrt(p_u);
  const CMatrix noise = rng.cscg_matrix(M, pattern.length(), eps2);
  const CMatrix Y = amplitude * H_tilde.adjoint() * pattern.V + noise;
  const CMatrix centered = Y - amplitude * stats.mean.adjoint() * pattern.V;
  const CMatrix gain = lmmse_gain(pattern, p_u, eps2, M, stats.covariance);
  return {amplitude * gain * centered.adjoint() + stats.mean};
}

CMatrix lmmse_error_covariance(const TrainingPattern& pattern, double p_u, double eps2, int M,
                               const CMatrix& channel_covariance) {
  require_psd(channel_covariance, "lmmse_error_covariance");
  const CMatrix gain = lmmse_gain(pattern, p_u, eps2, M, channel_covariance);
  return hermitian_part(channel_covariance - p_u * gain * pattern.V.adjoint() * channel_covariance);
}

double nmse(const std::vector<CMatrix>& estimates, const std::vector<CMatrix>& truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("nmse: count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    if (estimates[k].rows() != truths[k].rows() || estimates[k].cols() != truths[k].cols())
      throw std::invalid_argument("nmse: shape mismatch");
    num += (estimates[k] - truths[k]).squaredNorm();
    den += truths[k].squaredNorm();
  }
  if (!(den > 0.0)) throw std::domain_error("nmse: zero reference energy");
  return num / den;
}

}  // namespace irsbf
