#include <doctest.h>

#include <numeric>

#include "irsbf/beamforming.hpp"
#include "irsbf/random.hpp"

using namespace irsbf;

namespace {

double total_power(const std::vector<CVector>& w) {
  double p = 0.0;
  for (const auto& x : w) p += x.squaredNorm();
  return p;
}

}  // namespace

TEST_CASE("optimal precoders meet every SINR target with equality") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const int K = 1 + t % 4, M = 4;
    std::vector<CVector> h;
    std::vector<double> eta, sigma2;
    for (int k = 0; k < K; ++k) {
      h.push_back(rng.cscg_vector(M));
      eta.push_back(0.5 + 2.0 * rng.uniform());
      sigma2.push_back(0.1 + rng.uniform());
    }
    const BeamformingResult r = min_power_beamforming(h, eta, sigma2);
    REQUIRE(r.feasible);
    CHECK(r.power == doctest::Approx(total_power(r.precoders)));
    const auto s = deterministic_sinr(h, r.precoders, sigma2);
    for (int k = 0; k < K; ++k) CHECK(s[k] == doctest::Approx(eta[k]).epsilon(1e-6));

    // Any other set of directions needs at least as much power.
    for (int i = 0; i < 50; ++i) {
      std::vector<CVector> dirs;
      for (int k = 0; k < K; ++k) dirs.push_back((r.precoders[k].normalized() + 0.3 * rng.cscg_vector(M)).normalized());
      const RVector p = power_for_directions(h, dirs, eta, sigma2);
      if (p.size() > 0) CHECK(p.sum() >= r.power * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("single user reduces to matched filtering") {
  Rng rng(2);
  const CVector h = rng.cscg_vector(6);
  const BeamformingResult r = min_power_beamforming({h}, {3.0}, {0.2});
  REQUIRE(r.feasible);
  CHECK(r.power == doctest::Approx(3.0 * 0.2 / h.squaredNorm()));
  CHECK(std::abs(std::abs(h.normalized().dot(r.precoders[0].normalized())) - 1.0) < 1e-10);
}

TEST_CASE("more users than antennas at high targets is infeasible") {
  Rng rng(3);
  std::vector<CVector> h;
  for (int k = 0; k < 3; ++k) h.push_back(rng.cscg_vector(1));
  const BeamformingResult r = min_power_beamforming(h, {10.0, 10.0, 10.0}, {1.0, 1.0, 1.0});
  CHECK_FALSE(r.feasible);
}

TEST_CASE("power for fixed directions solves the SINR equalities") {
  Rng rng(4);
  std::vector<CVector> h, u;
  for (int k = 0; k < 3; ++k) {
    h.push_back(rng.cscg_vector(4));
    u.push_back(h.back().normalized());
  }
  const std::vector<double> eta{1.0, 1.0, 1.0}, sigma2{1.0, 1.0, 1.0};
  const RVector p = power_for_directions(h, u, eta, sigma2);
  if (p.size() > 0) {
    std::vector<CVector> w;
    for (int k = 0; k < 3; ++k) w.push_back(std::sqrt(p(k)) * u[k]);
    for (double s : deterministic_sinr(h, w, sigma2)) CHECK(s == doctest::Approx(1.0));
  }
}
