#include <doctest.h>

#include <algorithm>
#include <limits>
#include <sstream>

#include "irsbf/single_user.hpp"
#include "irsbf/system_model.hpp"

using namespace irsbf;

namespace {

SingleUserProblem make_problem(int N, std::uint64_t seed, int bits = 1, double eta_db = 15.0) {
  const auto g = ScenarioGeometry::with_sizes(N, 4, 1);
  const PropagationParams params;
  const ChannelSet cs = synthesize_scenario(g, params, seed);
  const TrainingPattern p = build_training_pattern(N, N + 1, PhaseAlphabet(1), PatternKind::QuantizedDft);
  const ErrorModel m = error_covariance(p, dbm_to_watts(6.0), params.sigma2);
  return {sample_estimates(cs, m, seed + 7)[0].H_bar, m, {db_to_linear(eta_db), 0.1, params.sigma2},
          PhaseAlphabet(bits)};
}

double brute_force_max(const CMatrix& Phi, const PhaseAlphabet& a) {
  const int N = static_cast<int>(Phi.rows()) - 1;
  const int Z = a.size();
  long total = 1;
  for (int n = 0; n < N; ++n) total *= Z;
  double best = -std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    CVector v(N);
    long c = code;
    for (int n = 0; n < N; ++n, c /= Z) v(n) = a.element(static_cast<int>(c % Z));
    best = std::max(best, hermitian_form(Phi, augment(v)));
  }
  return best;
}

}  // namespace

TEST_CASE("omega grid spans the interval") {
  WsmaxConfig c;
  CHECK(c.omega_grid().size() == 51);
  c.omega_step = 5.0;
  const auto grid = c.omega_grid();
  CHECK(grid.size() == 11);
  CHECK(grid.front() == -40.0);
  CHECK(grid.back() == 10.0);
}

TEST_CASE("u step projects the shifted relaxed vector") {
  Rng rng(1);
  const CVector v = rng.cscg_vector(8), lambda = rng.cscg_vector(8);
  const CVector u = u_step(v, lambda, 0.3, PhaseAlphabet(2));
  CHECK((u - PhaseAlphabet(2).project(v + 0.3 * lambda)).norm() == 0.0);
}

TEST_CASE("v step stays in the norm ball and is exact for small offsets") {
  Rng rng(2);
  const int N = 6;
  const CMatrix B = rng.cscg_matrix(N, N);
  const QuadraticSplit psd = split_quadratic(B * B.adjoint() / 20.0, rng.cscg_vector(N, 0.01));
  const CVector u = PhaseAlphabet(1).random_vector(N, rng);
  const CVector zero = CVector::Zero(N);
  const CVector small = v_step(psd, u * 0.1, zero, 0.01, zero);
  CHECK((small - v_step_offset(psd, u * 0.1, zero, 0.01, zero)).norm() < 1e-14);
  const QuadraticSplit indefinite = split_quadratic(hermitian_part(B), rng.cscg_vector(N));
  for (double rho : {0.1, 1.0, 10.0}) {
    const CVector v = v_step(indefinite, u, rng.cscg_vector(N), rho, u);
    CHECK(v.squaredNorm() <= N * (1.0 + 1e-8));
  }
}

TEST_CASE("PDD finds near-optimal discrete maximizers of small quadratic forms") {
  Rng rng(5);
  int exact = 0;
  for (int t = 0; t < 20; ++t) {
    const int N = 6;
    const CMatrix A = rng.cscg_matrix(N + 1, 3);
    const CMatrix Phi = A * A.adjoint();
    const PhaseAlphabet alphabet(t % 2 == 0 ? 1 : 2);
    const PddResult r = maximize_quadratic_form(Phi, alphabet, PddConfig{}, alphabet.random_vector(N, rng));
    const double best = brute_force_max(Phi, alphabet);
    CHECK(alphabet.contains_all(r.v));
    CHECK(r.objective == doctest::Approx(hermitian_form(Phi, augment(r.v))));
    CHECK(r.objective >= 0.8 * best);
    exact += r.objective >= best * (1.0 - 1e-9);
  }
  CHECK(exact >= 12);
}

TEST_CASE("PDD records two Lagrangian values per inner step") {
  Rng rng(8);
  const CMatrix A = rng.cscg_matrix(9, 2);
  const PddResult r = maximize_quadratic_form(A * A.adjoint(), PhaseAlphabet(1), PddConfig{},
                                              PhaseAlphabet(1).random_vector(8, rng));
  REQUIRE(r.lagrangian_trace.size() == static_cast<std::size_t>(r.outer_iterations));
  for (const auto& outer : r.lagrangian_trace) {
    CHECK(!outer.empty());
    CHECK(outer.size() % 2 == 0);
    CHECK(outer.size() <= 2 * static_cast<std::size_t>(PddConfig{}.inner_iters));
  }
}

TEST_CASE("zero weight reduces to the mean signal power problem") {
  const SingleUserProblem pr = make_problem(8, 21);
  const PddConfig cfg;
  const CVector init = initial_phases(pr, 3);
  const PddResult at_zero = pdd_weighted_sum(pr, 0.0, cfg, init);
  const CVector msp = msp_solve(pr, cfg, 3);
  const CMatrix Phi = weighted_sum_matrix(pr.H_bar, pr.model, 0.0);
  CHECK(hermitian_form(Phi, augment(msp)) == doctest::Approx(at_zero.objective).epsilon(1e-6));
  const PddResult at_one = pdd_weighted_sum(pr, 1.0, cfg, init);
  const CVector mpv = mpv_solve(pr, cfg, 3);
  CHECK(hermitian_form(weighted_sum_matrix(pr.H_bar, pr.model, 1.0), augment(mpv)) ==
        doctest::Approx(at_one.objective).epsilon(1e-6));
}

TEST_CASE("single-user algorithms respect the exhaustive bound") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const SingleUserProblem pr = make_problem(6, 40 + s);
    const SingleUserSolution bound = exhaustive_search(pr);
    CHECK(bound.iterations == 64);
    WsmaxConfig cfg;
    cfg.omega_step = 5.0;
    const WsmaxResult ws = wsmax(pr, cfg, s);
    const double tol = 1.0 + 3e-4;
    CHECK(ws.best.power * tol >= bound.power);
    CHECK(bcd_baseline(pr, {}, s).solution.power * tol >= bound.power);
    CHECK(progressive_thresholding_su(pr, 0.01, {}, s).power * tol >= bound.power);
    CHECK(no_irs_baseline(pr).power * tol >= bound.power);
    const double msp_power = solve_power_for_phases(pr, msp_solve(pr, cfg.pdd, s)).power;
    CHECK(ws.best.power <= msp_power * tol);
    CHECK(ws.best.w.squaredNorm() == doctest::Approx(ws.best.power));
  }
}

TEST_CASE("exhaustive search refuses oversized spaces") {
  const SingleUserProblem pr = make_problem(12, 1);
  CHECK_THROWS_AS(exhaustive_search(pr, {}, 1000), std::invalid_argument);
}

TEST_CASE("ratio maximization never lowers the ratio of its start") {
  const SingleUserProblem pr = make_problem(8, 60);
  const MvrResult r = mvr_maximize(pr, PddConfig{}, 4);
  CHECK(r.ratio >= msp_variance_ratio(pr, msp_solve(pr, PddConfig{}, 4)) * (1.0 - 1e-12));
  CHECK(r.ratio == doctest::Approx(msp_variance_ratio(pr, r.v)));
}

TEST_CASE("progressive thresholding stops at the first feasible target") {
  const SingleUserProblem pr = make_problem(8, 70);
  const SingleUserSolution s = progressive_thresholding_su(pr, 0.01, PddConfig{}, 2);
  REQUIRE(s.converged);
  const SignalStats st = signal_stats(s.v, pr.H_bar, pr.model);
  CHECK(single_user_outage(st, s.power, pr.spec) <= pr.spec.epsilon);
  if (s.iterations > 1)
    CHECK(single_user_outage(st, s.power / db_to_linear(0.01), pr.spec) > pr.spec.epsilon);
}

TEST_CASE("direct-link baseline ignores the surface") {
  const SingleUserProblem pr = make_problem(8, 80);
  const SingleUserSolution s = no_irs_baseline(pr);
  CHECK(s.v.norm() == 0.0);
  const SignalStats direct = signal_stats(CVector::Zero(8), pr.H_bar, pr.model);
  CHECK(direct.variance_term == doctest::Approx(pr.model.v11()));
  CHECK(s.power == doctest::Approx(bisect_power(direct, pr.spec)));
}

TEST_CASE("omega trace CSV has one row per weight") {
  const SingleUserProblem pr = make_problem(6, 90);
  WsmaxConfig cfg;
  cfg.omega_step = 10.0;
  const WsmaxResult r = wsmax(pr, cfg, 1);
  std::ostringstream os;
  write_omega_trace_csv(os, r.trace);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(r.trace.size()));
}
