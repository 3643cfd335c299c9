#include <doctest.h>

#include "irsbf/beamforming.hpp"
#include "irsbf/multiuser.hpp"
#include "irsbf/system_model.hpp"

using namespace irsbf;

namespace {

MultiuserProblem make_problem(int K, int N, int M, double p_u_dbm, std::uint64_t seed) {
  const auto g = ScenarioGeometry::with_sizes(N, M, K);
  const PropagationParams params;
  const ChannelSet cs = synthesize_scenario(g, params, seed);
  const TrainingPattern p = build_training_pattern(N, N + 1, PhaseAlphabet(1), PatternKind::QuantizedDft);
  const ErrorModel model = error_covariance(p, dbm_to_watts(p_u_dbm), params.sigma2);
  MultiuserProblem pr;
  for (const auto& e : ls_estimate(cs, p, dbm_to_watts(p_u_dbm), params.sigma2, seed + 1)) {
    pr.H_bar.push_back(e.H_bar);
    pr.models.push_back(model);
    pr.specs.push_back({db_to_linear(5.0), 0.1, params.sigma2});
  }
  return pr;
}

}  // namespace

TEST_CASE("non-robust design meets the nominal targets exactly") {
  const MultiuserProblem pr = make_problem(3, 8, 6, 18.0, 1);
  const MultiuserSolution s = non_robust_baseline(pr, PddConfig{}, 20000, 4);
  REQUIRE(s.precoders.size() == 3);
  CHECK(pr.alphabet.contains_all(s.v));
  for (int k = 0; k < 3; ++k)
    CHECK(sinr(s.v, pr.H_bar[k], s.precoders, k, pr.specs[k].sigma2) == doctest::Approx(pr.specs[k].eta).epsilon(1e-6));
  CHECK(s.verification.size() == 3);
}

TEST_CASE("deterministic design never increases power over its start") {
  const MultiuserProblem pr = make_problem(2, 8, 6, 18.0, 2);
  const CVector v0 = CVector::Ones(8);
  const std::vector<double> targets{db_to_linear(6.0), db_to_linear(6.0)};
  std::vector<CVector> h;
  for (int k = 0; k < 2; ++k) h.push_back(effective_row(pr.H_bar[k], augment(v0)));
  const BeamformingResult start = min_power_beamforming(h, targets, {pr.specs[0].sigma2, pr.specs[1].sigma2});
  REQUIRE(start.feasible);
  const MultiuserSolution s = deterministic_design(pr, targets, v0, 5);
  REQUIRE(s.precoders.size() == 2);
  CHECK(s.power <= start.power * (1.0 + 1e-12));
  for (int k = 0; k < 2; ++k)
    CHECK(sinr(s.v, pr.H_bar[k], s.precoders, k, pr.specs[k].sigma2) >= targets[k] * (1.0 - 1e-6));
}

TEST_CASE("single-user deterministic design is matched filtering") {
  const MultiuserProblem pr = make_problem(1, 6, 4, 18.0, 3);
  const CVector v0 = CVector::Ones(6);
  const MultiuserSolution s = deterministic_design(pr, {3.0}, v0, 0);
  REQUIRE(s.precoders.size() == 1);
  const CVector h = effective_row(pr.H_bar[0], augment(v0));
  CHECK(s.power == doctest::Approx(3.0 * pr.specs[0].sigma2 / h.squaredNorm()));
}

TEST_CASE("progressive thresholding meets the outage targets") {
  const MultiuserProblem pr = make_problem(2, 8, 6, 18.0, 4);
  ThresholdingConfig cfg;
  cfg.check_samples = 5000;
  cfg.verify_samples = 50000;
  cfg.inner_iters = 3;
  const MultiuserSolution s = progressive_thresholding_mu(pr, cfg, 8);
  REQUIRE(s.precoders.size() == 2);
  CHECK(s.feasible);
  CHECK(s.iterations >= 1);
}
