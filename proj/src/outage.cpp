#include "irsbf/outage.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "irsbf/special_functions.hpp"

namespace irsbf {

void OutageSpec::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("OutageSpec: eta must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("OutageSpec: epsilon must be in (0, 1)");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("OutageSpec: sigma2 must be positive");
}

SignalStats signal_stats(const CVector& v, const CMatrix& H_bar, const ErrorModel& model) {
  const CVector x = augment(v);
  return {effective_row(H_bar, x).squaredNorm(), std::max(0.0, hermitian_form(model.V_bar, x))};
}

double single_user_outage(const SignalStats& stats, double p, const OutageSpec& spec) {
  if (!(p > 0.0)) return 1.0;
  const double threshold = spec.eta * spec.sigma2;
  if (stats.variance_term <= 1e-14 * stats.msp || stats.variance_term == 0.0)
    return p * stats.msp < threshold ? 1.0 : 0.0;
  const double half_var = 0.5 * stats.variance_term;
  return noncentral_chi2_cdf_2dof(threshold / (p * half_var), stats.msp / half_var);
}

double single_user_outage(const CVector& v, const CMatrix& H_bar, const ErrorModel& model, double p,
                          const OutageSpec& spec) {
  return single_user_outage(signal_stats(v, H_bar, model), p, spec);
}

CVector mrt_precoder(const CVector& v, const CMatrix& H_bar, double p) {
  const CVector direction = effective_row(H_bar, augment(v));
  const double norm = direction.norm();
  if (!(norm > 0.0)) {
    CVector w = CVector::Zero(H_bar.cols());
    w(0) = std::sqrt(p);
    return w;
  }
  return std::sqrt(p) * direction / norm;
}

double sinr(const CVector& v, const CMatrix& H_tilde, const std::vector<CVector>& precoders, int k, double sigma2) {
  const CVector e = effective_row(H_tilde, augment(v));
  double interference = 0.0;
  double desired = 0.0;
  for (int j = 0; j < static_cast<int>(precoders.size()); ++j) {
    const double power = std::norm(e.dot(precoders[j]));
    if (j == k)
      desired = power;
    else
      interference += power;
  }
  return desired / (interference + sigma2);
}

std::vector<OutageEstimate> mc_outage(const std::vector<CVector>& precoders, const CVector& v,
                                      const std::vector<CMatrix>& H_bar, const std::vector<ErrorModel>& models,
                                      const std::vector<OutageSpec>& specs, int n_samples, std::uint64_t seed) {
  const std::size_t K = H_bar.size();
  if (precoders.size() != K || models.size() != K || specs.size() != K)
    throw std::invalid_argument("mc_outage: per-user inputs must have equal length");
  if (n_samples < 1) throw std::invalid_argument("mc_outage: n_samples must be positive");
  const CVector x = augment(v);
  std::vector<OutageEstimate> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    Rng rng(derive_seed(seed, {k}));
    const CVector mean_row = effective_row(H_bar[k], x);
    const CVector projected = models[k].factor.adjoint() * x;  // error row = -Z^H projected
    const Eigen::Index D = models[k].factor.cols();
    const Eigen::Index M = H_bar[k].cols();
    const double noise = specs[k].sigma2;
    long failures = 0;
    for (int s = 0; s < n_samples; ++s) {
      const CMatrix Z = rng.cscg_matrix(D, M);
      const CVector e = mean_row - Z.adjoint() * projected;
      double interference = 0.0;
      double desired = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        const double power = std::norm(e.dot(precoders[j]));
        if (j == k)
          desired = power;
        else
          interference += power;
      }
      if (desired < specs[k].eta * (interference + noise)) ++failures;
    }
    const double p = static_cast<double>(failures) / n_samples;
    out[k] = {p, std::sqrt(p * (1.0 - p) / n_samples)};
  }
  return out;
}

double bisect_power(const std::function<double(double)>& outage, double p_start, double epsilon,
                    const BisectionConfig& config) {
  if (!(p_start > 0.0) || !std::isfinite(p_start))
    throw std::invalid_argument("bisect_power: starting power must be positive and finite");
  double p_lo = 0.0;
  double p_hi = p_start;
  double c_hi = outage(p_hi);
  int growths = 0;
  while (!(c_hi < epsilon)) {
    if (++growths > config.max_growth)
      throw std::runtime_error("bisect_power: outage stays at " + std::to_string(c_hi) + " above target " +
                               std::to_string(epsilon) + " up to p = " + std::to_string(p_hi));
    p_lo = p_hi;
    p_hi *= config.growth;
    c_hi = outage(p_hi);
  }
  for (int it = 0; it < config.max_iter; ++it) {
    if (p_hi - p_lo <= config.p_rel_tol * p_hi && std::abs(c_hi - epsilon) < config.eps_tol) break;
    const double mid = 0.5 * (p_lo + p_hi);
    const double c_mid = outage(mid);
    if (c_mid <= epsilon) {
      p_hi = mid;
      c_hi = c_mid;
    } else {
      p_lo = mid;
    }
  }
  return p_hi;
}

double bisect_power(const SignalStats& stats, const OutageSpec& spec, const BisectionConfig& config) {
  const double gain = stats.msp > 0.0 ? stats.msp : stats.variance_term;
  if (!(gain > 0.0)) throw std::runtime_error("bisect_power: zero effective channel and zero error variance");
  return bisect_power([&](double p) { return single_user_outage(stats, p, spec); },
                      spec.eta * spec.sigma2 / gain, spec.epsilon, config);
}

double bisect_power(const CVector& v, const CMatrix& H_bar, const ErrorModel& model, const OutageSpec& spec,
                    const BisectionConfig& config) {
  return bisect_power(signal_stats(v, H_bar, model), spec, config);
}

std::vector<RegionPoint> sweep_msp_variance_region(const CMatrix& H_bar, const ErrorModel& model,
                                                   const PhaseAlphabet& alphabet, const OutageSpec& spec,
                                                   long budget, std::uint64_t seed, const BisectionConfig& config) {
  if (budget < 1) throw std::invalid_argument("sweep_msp_variance_region: budget must be positive");
  const int N = static_cast<int>(H_bar.rows()) - 1;
  std::vector<RegionPoint> points;
  auto add_point = [&](const CVector& v) {
    const SignalStats stats = signal_stats(v, H_bar, model);
    points.push_back({stats.variance_term, stats.msp, bisect_power(stats, spec, config), v});
  };

  const double log_count = alphabet.is_continuous() ? INFINITY : N * std::log2(alphabet.size());
  if (log_count <= std::log2(static_cast<double>(budget))) {
    const int Z = alphabet.size();
    std::vector<int> digits(N, 0);
    CVector v = CVector::Constant(N, alphabet.element(0));
    while (true) {
      add_point(v);
      int pos = 0;
      while (pos < N && ++digits[pos] == Z) {
        digits[pos] = 0;
        v(pos) = alphabet.element(0);
        ++pos;
      }
      if (pos == N) break;
      v(pos) = alphabet.element(digits[pos]);
    }
  } else {
    Rng rng(seed);
    for (long i = 0; i < budget; ++i) add_point(alphabet.random_vector(N, rng));
  }
  return points;
}

void write_region_csv(std::ostream& os, const std::vector<RegionPoint>& points) {
  const auto flags = os.flags();
  os << std::setprecision(12) << "variance_term,msp,power_dbm\n";
  for (const RegionPoint& pt : points) os << pt.variance_term << ',' << pt.msp << ',' << watts_to_dbm(pt.power) << '\n';
  os.flags(flags);
}

}  // namespace irsbf
