#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "irsbf/phase.hpp"
#include "irsbf/training.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

struct OutageSpec {
  double eta = 1.0;      // SINR target, linear
  double epsilon = 0.1;  // allowed outage probability
  double sigma2 = 1e-11;

  void validate() const;
};

/// Mean signal power msp = x^H H_bar H_bar^H x and error variance
/// variance_term = x^H V_bar x, with x = [1; v].
struct SignalStats {
  double msp = 0.0;
  double variance_term = 0.0;
};

SignalStats signal_stats(const CVector& v, const CMatrix& H_bar, const ErrorModel& model);

/// Outage of the MRT link at power p. A variance term at or below
/// 1e-14 * msp is treated as a deterministic channel.
double single_user_outage(const SignalStats& stats, double p, const OutageSpec& spec);
double single_user_outage(const CVector& v, const CMatrix& H_bar, const ErrorModel& model, double p,
                          const OutageSpec& spec);

/// sqrt(p) * H_bar^H x / ||H_bar^H x||.
CVector mrt_precoder(const CVector& v, const CMatrix& H_bar, double p);

/// SINR of user k on the composite channel H_tilde (x = [1; v]).
double sinr(const CVector& v, const CMatrix& H_tilde, const std::vector<CVector>& precoders, int k, double sigma2);

struct OutageEstimate {
  double outage = 0.0;
  double std_error = 0.0;  // sqrt(p(1-p)/n)
};

/// Fraction of sampled true channels H_bar[k] - error on which SINR_k < eta_k.
std::vector<OutageEstimate> mc_outage(const std::vector<CVector>& precoders, const CVector& v,
                                      const std::vector<CMatrix>& H_bar, const std::vector<ErrorModel>& models,
                                      const std::vector<OutageSpec>& specs, int n_samples, std::uint64_t seed);

struct BisectionConfig {
  double p_rel_tol = 1e-4;  // stop when p_hi - p_lo <= p_rel_tol * p_hi
  double eps_tol = 1e-3;    // and |C(p_hi) - epsilon| < eps_tol
  double growth = 10.0;
  int max_growth = 60;
  int max_iter = 200;
};

/// Smallest power with outage(p) <= epsilon for a nonincreasing outage
/// curve. Starts the upper bracket at p_start. Throws std::runtime_error if
/// the bracket cannot be established.
double bisect_power(const std::function<double(double)>& outage, double p_start, double epsilon,
                    const BisectionConfig& config = {});
double bisect_power(const SignalStats& stats, const OutageSpec& spec, const BisectionConfig& config = {});
double bisect_power(const CVector& v, const CMatrix& H_bar, const ErrorModel& model, const OutageSpec& spec,
                    const BisectionConfig& config = {});

struct RegionPoint {
  double variance_term;
  double msp;
  double power;
  CVector v;
};

/// Points of the (variance, msp) region with the minimum power meeting the
/// outage target. Enumerates the discrete set when its size is at most
/// `budget`, otherwise draws `budget` random configurations.
std::vector<RegionPoint> sweep_msp_variance_region(const CMatrix& H_bar, const ErrorModel& model,
                                                   const PhaseAlphabet& alphabet, const OutageSpec& spec,
                                                   long budget, std::uint64_t seed,
                                                   const BisectionConfig& config = {});

void write_region_csv(std::ostream& os, const std::vector<RegionPoint>& points);

}  // namespace irsbf
