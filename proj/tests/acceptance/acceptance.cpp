// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "irsbf/ball_qcqp.hpp"
#include "irsbf/cssca.hpp"
#include "irsbf/experiment.hpp"
#include "irsbf/outage.hpp"
#include "irsbf/random.hpp"
#include "irsbf/single_user.hpp"
#include "irsbf/special_functions.hpp"
#include "irsbf/system_model.hpp"

using namespace irsbf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_work;
std::string g_cli;

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// (sweep value, draw, algorithm) -> row
using RowIndex = std::map<std::tuple<double, int, std::string>, ResultRow>;

RowIndex index_rows(const std::vector<ResultRow>& rows) {
  RowIndex idx;
  for (const auto& r : rows) idx[{r.sweep_value, r.draw, r.algorithm}] = r;
  return idx;
}

std::vector<ResultRow> run(const std::string& json, const std::string& dir) {
  const ExperimentSpec spec = parse_spec(json, Scale::Desk);
  return run_experiment(spec, {g_work / dir, 1});
}

SingleUserProblem single_user_instance(int N, std::uint64_t seed, double p_u_dbm, double eta_db) {
  const auto g = ScenarioGeometry::with_sizes(N, 4, 1);
  const PropagationParams params;
  const ChannelSet cs = synthesize_scenario(g, params, derive_seed(seed, {1}));
  const TrainingPattern p = build_training_pattern(N, N + 1, PhaseAlphabet(1), PatternKind::QuantizedDft);
  const double p_u = dbm_to_watts(p_u_dbm);
  return {ls_estimate(cs, p, p_u, params.sigma2, derive_seed(seed, {2}))[0].H_bar,
          error_covariance(p, p_u, params.sigma2),
          {db_to_linear(eta_db), 0.1, params.sigma2},
          PhaseAlphabet(1)};
}

Outcome analytic_vs_monte_carlo() {
  int agree = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t seed = derive_seed(101, {static_cast<std::uint64_t>(i)});
    const SingleUserProblem pr = single_user_instance(8, seed, 6.0, 10.0);
    Rng rng(derive_seed(seed, {3}));
    const CVector v = pr.alphabet.random_vector(8, rng);
    // Power placing the analytic outage between 0.05 and 0.6.
    OutageSpec at = pr.spec;
    at.epsilon = 0.05 + 0.55 * rng.uniform();
    const double p = bisect_power(v, pr.H_bar, pr.model, at);
    const double analytic = single_user_outage(v, pr.H_bar, pr.model, p, pr.spec);
    const CVector w = mrt_precoder(v, pr.H_bar, p);
    const auto mc = mc_outage({w}, v, {pr.H_bar}, {pr.model}, {pr.spec}, 100000, derive_seed(seed, {4}))[0];
    const double se = std::sqrt(analytic * (1.0 - analytic) / 100000.0);
    const double z = std::abs(mc.outage - analytic) / se;
    worst = std::max(worst, z);
    agree += z <= 3.0;
  }
  return {agree == 20, std::to_string(agree) + "/20 within 3 stderr, worst " + fmt(worst, 3) + " stderr"};
}

double marcum_oracle(double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  auto density = [a](double x) {
    return x * std::exp(-0.5 * (x - a) * (x - a)) * boost::math::cyl_bessel_i(0, a * x) * std::exp(-a * x);
  };
  if (b >= a) return gauss_kronrod<double, 61>::integrate(density, b, b + 40.0, 15, 1e-15);
  return 1.0 - gauss_kronrod<double, 61>::integrate(density, 0.0, b, 15, 1e-15);
}

Outcome special_functions() {
  double identity_err = 0.0;
  for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.05) {
    identity_err = std::max(identity_err, std::abs(marcum_q1(0.0, t) - std::exp(-0.5 * t * t)));
    identity_err = std::max(identity_err, std::abs(marcum_q1(t, 0.0) - 1.0));
  }
  Rng rng(202);
  double oracle_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double a = 10.0 * rng.uniform(), b = 10.0 * rng.uniform();
    oracle_err = std::max(oracle_err, std::abs(marcum_q1(a, b) - marcum_oracle(a, b)));
  }
  return {identity_err <= 1e-12 && oracle_err <= 1e-9,
          "identities " + fmt(identity_err, 3) + ", quadrature " + fmt(oracle_err, 3)};
}

Outcome wsmax_vs_exhaustive() {
  const auto rows = index_rows(run(R"({"name": "c3", "scenario": {"N": 10}, "outage": {"eta_db": 15},
    "algorithms": ["wsmax", "exhaustive"], "draws": 20, "seed": 303, "verify_samples": 20000})",
                                   "c3"));
  std::vector<double> gaps;
  double worst_below = 0.0;
  for (int d = 0; d < 20; ++d) {
    const double ws = rows.at({0.0, d, "wsmax"}).power_dbm, ex = rows.at({0.0, d, "exhaustive"}).power_dbm;
    gaps.push_back(ws - ex);
    worst_below = std::max(worst_below, ex - ws);
  }
  const double med = median(gaps);
  return {worst_below <= 1e-3 && med <= 1.0,
          "median gap " + fmt(med) + " dB, max " + fmt(*std::max_element(gaps.begin(), gaps.end())) +
              " dB, exhaustive above wsmax by at most " + fmt(worst_below, 3) + " dB"};
}

Outcome weight_identities() {
  double worst_rel = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t seed = derive_seed(404, {static_cast<std::uint64_t>(i)});
    const SingleUserProblem pr = single_user_instance(10, seed, 6.0, 10.0);
    const PddConfig cfg;
    const CVector init = initial_phases(pr, seed);
    for (double omega : {0.0, 1.0}) {
      const double pdd = pdd_weighted_sum(pr, omega, cfg, init).objective;
      const CVector v = omega == 0.0 ? msp_solve(pr, cfg, seed) : mpv_solve(pr, cfg, seed);
      const double direct = hermitian_form(weighted_sum_matrix(pr.H_bar, pr.model, omega), augment(v));
      worst_rel = std::max(worst_rel, std::abs(pdd - direct) / std::abs(direct));
    }
  }
  // Orthogonal continuous training: the variance term is the same for every phase vector.
  double worst_db = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t seed = derive_seed(405, {static_cast<std::uint64_t>(i)});
    const int N = 10;
    const auto g = ScenarioGeometry::with_sizes(N, 4, 1);
    const PropagationParams params;
    const ChannelSet cs = synthesize_scenario(g, params, derive_seed(seed, {1}));
    const TrainingPattern p = build_training_pattern(N, N + 1, PhaseAlphabet::continuous(), PatternKind::QuantizedDft);
    const double p_u = dbm_to_watts(6.0);
    const SingleUserProblem pr{ls_estimate(cs, p, p_u, params.sigma2, derive_seed(seed, {2}))[0].H_bar,
                               error_covariance(p, p_u, params.sigma2),
                               {db_to_linear(10.0), 0.1, params.sigma2},
                               PhaseAlphabet(1)};
    WsmaxConfig cfg;
    const double ws = wsmax(pr, cfg, seed).best.power;
    const double msp = solve_power_for_phases(pr, msp_solve(pr, cfg.pdd, seed)).power;
    worst_db = std::max(worst_db, std::abs(linear_to_db(ws / msp)));
  }
  const double bisection_db = linear_to_db(1.0 + BisectionConfig{}.p_rel_tol);
  return {worst_rel <= 1e-6 && worst_db <= bisection_db,
          "weighted-sum objective rel " + fmt(worst_rel, 3) + ", orthogonal-training gap " + fmt(worst_db, 3) +
              " dB (tolerance " + fmt(bisection_db, 3) + " dB)"};
}

Outcome coarse_weight_grid() {
  const auto rows = index_rows(run(R"({"name": "c5", "algorithms": ["wsmax"],
    "sweep": {"variable": "omega_step", "values": [1, 5]}, "draws": 20, "seed": 505, "verify_samples": 20000})",
                                   "c5"));
  std::vector<double> diffs;
  for (int d = 0; d < 20; ++d)
    diffs.push_back(std::abs(rows.at({5.0, d, "wsmax"}).power_dbm - rows.at({1.0, d, "wsmax"}).power_dbm));
  const double med = median(diffs);
  return {med <= 0.2, "median |p(5) - p(1)| " + fmt(med) + " dB"};
}

std::vector<double> mean_power(const RowIndex& rows, const std::vector<double>& values, const std::string& alg,
                               int draws) {
  std::vector<double> out;
  for (double x : values) {
    double sum = 0.0;
    for (int d = 0; d < draws; ++d) sum += rows.at({x, d, alg}).power_dbm;
    out.push_back(sum / draws);
  }
  return out;
}

// Largest step against the expected direction (+1 nondecreasing, -1 nonincreasing).
double worst_violation(const std::vector<double>& curve, int direction) {
  double worst = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) worst = std::max(worst, -direction * (curve[i] - curve[i - 1]));
  return worst;
}

std::string curve_text(const std::vector<double>& c) {
  std::string s;
  for (double x : c) s += (s.empty() ? "" : "/") + fmt(x);
  return s;
}

Outcome trend_suite() {
  const std::string common = R"("draws": 10, "verify_samples": 20000, "wsmax": {"omega_step": 1})";
  bool pass = true;
  std::string detail;
  const auto trend = [&](const std::string& label, const std::string& variable, const std::vector<double>& values,
                         int direction, const std::string& extra, std::uint64_t seed) {
    std::string vals;
    for (double v : values) vals += (vals.empty() ? "" : ",") + fmt(v);
    const auto rows = index_rows(run("{\"name\": \"c6_" + label + "\", \"algorithms\": [\"wsmax\"], " + extra +
                                         "\"sweep\": {\"variable\": \"" + variable + "\", \"values\": [" + vals +
                                         "]}, \"seed\": " + std::to_string(seed) + ", " + common + "}",
                                     "c6_" + label));
    const auto curve = mean_power(rows, values, "wsmax", 10);
    const double v = worst_violation(curve, direction);
    pass = pass && v <= 0.2;
    detail += label + " " + curve_text(curve) + " (violation " + fmt(v, 3) + "); ";
  };
  trend("p_u", "p_u", {2, 6, 10}, -1, "", 601);
  trend("eta", "eta", {5, 10, 15}, +1, "", 602);
  trend("epsilon", "epsilon", {0.05, 0.1, 0.2}, -1, "", 603);
  trend("N", "N", {8, 12, 16}, -1, "", 604);

  const auto ordering = [&](int bits, std::uint64_t seed) {
    const std::string b = std::to_string(bits);
    const auto rows = index_rows(run("{\"name\": \"c6_q" + b + "\", \"algorithms\": [\"msp\", \"mpv\", \"mvr\"], " +
                                         "\"phase_bits\": " + b + ", \"estimation\": {\"bits\": " + b +
                                         ", \"p_u_dbm\": 2}, \"seed\": " + std::to_string(seed) + ", " + common + "}",
                                     "c6_q" + b));
    int mvr_wins = 0, baseline_wins = 0;
    for (int d = 0; d < 10; ++d) {
      const double mvr = rows.at({0.0, d, "mvr"}).power_dbm;
      const double other = std::min(rows.at({0.0, d, "msp"}).power_dbm, rows.at({0.0, d, "mpv"}).power_dbm);
      mvr_wins += mvr < other;
      baseline_wins += other <= mvr;
    }
    return std::pair{mvr_wins, baseline_wins};
  };
  const int mvr_q1 = ordering(1, 611).first;
  const int base_q3 = ordering(3, 613).second;
  pass = pass && mvr_q1 >= 7 && base_q3 >= 7;
  detail += "Q=1 MVR best on " + std::to_string(mvr_q1) + "/10; Q=3 MSP/MPV best on " + std::to_string(base_q3) + "/10";
  return {pass, detail};
}

Outcome gradient_check() {
  Rng rng(707);
  int checked = 0;
  double worst = 0.0;
  const double vartheta = 1.0, zeta = 8.0;
  while (checked < 100) {
    CompositeLayout layout{2 + checked % 3, 4, 6, checked % 4 != 0, CVector()};
    if (!layout.optimize_phases) layout.fixed_v = PhaseAlphabet(1).random_vector(layout.N, rng);
    const CMatrix H = rng.cscg_matrix(layout.N + 1, layout.M);
    const CVector varpi = rng.cscg_vector(layout.size(), 0.2);
    const int k = checked % layout.K;
    const double eta = 2.0, sigma2 = 1.0;
    const QosMargin m = eval_qos_margin(varpi, layout, H, k, eta, sigma2, vartheta);
    if (std::abs(vartheta * m.z) > zeta - 1.0) continue;  // away from the clip
    const CVector grad = grad_g(varpi, layout, H, k, eta, sigma2, vartheta, zeta);
    const CVector dir = rng.cscg_vector(layout.size()).normalized();
    const double h = 1e-5;
    const double fd = (eval_qos_margin(varpi + h * dir, layout, H, k, eta, sigma2, vartheta).g -
                       eval_qos_margin(varpi - h * dir, layout, H, k, eta, sigma2, vartheta).g) /
                      (2.0 * h);
    const double analytic = 2.0 * grad.dot(dir).real();
    worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 2.0 * grad.norm() * 1e-3));
    ++checked;
  }
  return {worst <= 1e-5, "100 points, worst relative error " + fmt(worst, 3)};
}

std::vector<std::vector<double>> read_trace(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> r(5);
    for (double& x : r) ss >> x;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> g_multiuser_rows;

const std::vector<ResultRow>& multiuser_rows() {
  if (g_multiuser_rows.empty())
    g_multiuser_rows = run(R"({"name": "c89", "scenario": {"M": 6, "K": 2},
      "estimation": {"p_u_dbm": 18}, "algorithms": ["cssca", "pt_mu", "non_robust"],
      "sweep": {"variable": "K", "values": [2, 4]}, "draws": 10, "seed": 809, "emit_traces": true})",
                           "c89");
  return g_multiuser_rows;
}

Outcome cssca_convergence() {
  const auto rows = index_rows(multiuser_rows());
  int reached = 0, verified = 0;
  std::string firsts;
  for (int d = 0; d < 10; ++d) {
    const auto trace = read_trace(g_work / "c89" / "traces" / ("cssca_p1_d" + std::to_string(d) + ".csv"));
    bool ok = true;
    for (int stage : {1, 2}) {
      int first = -1;
      for (const auto& r : trace)
        if (static_cast<int>(r[0]) == stage && r[1] < 100 && r[3] <= 0.02) {
          first = static_cast<int>(r[1]);
          break;
        }
      ok = ok && first >= 0;
      firsts += (stage == 1 ? " " : ",") + std::to_string(first);
    }
    reached += ok;
    verified += rows.at({4.0, d, "cssca"}).status == "ok";
  }
  return {reached >= 8 && verified == 10, std::to_string(reached) + "/10 draws reach 0.02 in both stages (first t:" +
                                              firsts + "), " + std::to_string(verified) + "/10 verified"};
}

Outcome multiuser_ordering() {
  const auto rows = index_rows(multiuser_rows());
  bool pass = true;
  std::string detail;
  for (double K : {2.0, 4.0}) {
    int below_pt = 0, above_nr = 0, nr_fails = 0;
    for (int d = 0; d < 10; ++d) {
      const ResultRow& c = rows.at({K, d, "cssca"});
      const ResultRow& pt = rows.at({K, d, "pt_mu"});
      const ResultRow& nr = rows.at({K, d, "non_robust"});
      below_pt += c.status == "ok" && pt.status.rfind("error", 0) != 0 ? c.power_dbm <= pt.power_dbm
                                                                        : c.status == "ok";
      above_nr += nr.status.rfind("error", 0) != 0 && c.power_dbm >= nr.power_dbm;
      nr_fails += nr.status != "ok";
    }
    pass = pass && below_pt >= 7 && above_nr == 10 && nr_fails >= 5;
    detail += "K=" + fmt(K) + ": cssca<=pt " + std::to_string(below_pt) + "/10, cssca>=non-robust " +
              std::to_string(above_nr) + "/10, non-robust fails " + std::to_string(nr_fails) + "/10; ";
  }
  return {pass, detail};
}

// Minimizes over a grid centered at the best feasible point found. Each round
// the grid axes are a fresh random rotation, and the grid shrinks only when
// its center stays the best point on it.
double grid_oracle(const QcqpProblem& p, std::uint64_t seed) {
  const int dim = static_cast<int>(p.dim());
  const int real_dim = 2 * dim;
  const int per_axis = real_dim <= 2 ? 21 : real_dim <= 4 ? 7 : 5;
  long total = 1;
  for (int i = 0; i < real_dim; ++i) total *= per_axis;
  Rng rng(seed);
  RVector center = RVector::Zero(real_dim);
  double half = 1.0;  // coordinate balls bound every entry by the unit disc
  double best = std::numeric_limits<double>::infinity();
  CVector x(dim);
  for (int round = 0; round < 4000 && half > 1e-9; ++round) {
    RMatrix gaussian(real_dim, real_dim);
    for (Eigen::Index i = 0; i < gaussian.size(); ++i) gaussian(i) = rng.normal();
    const RMatrix basis = Eigen::HouseholderQR<RMatrix>(gaussian).householderQ();
    RVector next = center;
    bool moved = false;
    RVector offset(real_dim);
    for (long code = 0; code < total; ++code) {
      long c = code;
      for (int i = 0; i < real_dim; ++i, c /= per_axis)
        offset(i) = half * (2.0 * static_cast<double>(c % per_axis) / (per_axis - 1) - 1.0);
      const RVector r = center + basis * offset;
      for (int i = 0; i < dim; ++i) x(i) = Complex(r(2 * i), r(2 * i + 1));
      if (p.max_violation(x) > 0.0) continue;
      const double f = p.objective(x);
      if (f < best) {
        best = f;
        next = r;
        moved = true;
      }
    }
    center = next;
    if (!moved) half *= 0.7;
  }
  return best;
}

Outcome ball_subsolver() {
  Rng rng(1010);
  double identity = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const int dim = 1 + t % 6;
    const CVector x0 = rng.cscg_vector(dim), g = rng.cscg_vector(dim, 4.0);
    const double f = rng.normal(), eps = rng.uniform(), tau = 0.01 + rng.uniform();
    const BallConstraint b = complete_to_ball(x0, f, g, tau, eps);
    const CVector x = x0 + rng.cscg_vector(dim, std::pow(10.0, 3.0 * rng.uniform() - 2.0));
    const CVector d = x - x0;
    const double model = f + 2.0 * g.dot(d).real() + tau * d.squaredNorm() - eps;
    identity = std::max(identity, std::abs(b.weighted_residual(x) - model) / (1.0 + std::abs(model)));
  }
  double worst = 0.0;
  int solved = 0;
  for (int t = 0; t < 30; ++t) {
    const int dim = 1 + t % 3;  // up to six real dimensions
    QcqpProblem p;
    p.diag = RVector::Zero(dim);
    for (int i = 0; i < dim; ++i) p.diag(i) = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    p.linear = rng.cscg_vector(dim);
    const CVector inside = rng.cscg_vector(dim, 0.1);
    for (int b = 0; b < 1 + t % 3; ++b) {
      const CVector c = inside + rng.cscg_vector(dim);
      const double r = (inside - c).norm() * (1.0 + 0.3 * rng.uniform());
      p.balls.push_back(BallConstraint::full(c, r * r));
    }
    for (int i = 0; i < dim; ++i) p.coordinates.push_back(BallConstraint::coordinate(i, 0.0, 1.0));
    const QcqpSolution s = solve_min_quadratic_over_balls(p);
    if (!s.feasible || p.max_violation(s.x) > 1e-8) continue;
    ++solved;
    double oracle = std::numeric_limits<double>::infinity();
    for (std::uint64_t restart = 0; restart < 4; ++restart)
      oracle = std::min(oracle, grid_oracle(p, derive_seed(1011, {static_cast<std::uint64_t>(t), restart})));
    if (std::getenv("ACCEPTANCE_VERBOSE")) std::cerr << "dim " << dim << " solver " << s.objective << " oracle " << oracle << '\n';
    worst = std::max(worst, std::abs(s.objective - oracle));
  }
  return {identity <= 1e-10 && solved == 30 && worst <= 1e-3,
          "identity " + fmt(identity, 3) + ", " + std::to_string(solved) + "/30 solved, worst oracle gap " +
              fmt(worst, 3)};
}

int run_cli(const std::string& args, const fs::path& log) {
  const int status = std::system(("\"" + g_cli + "\" " + args + " > \"" + log.string() + "\" 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> specs{
      {"sweep", R"({"name": "d_sweep", "scenario": {"N": 6}, "algorithms": ["wsmax", "msp", "mvr", "bcd", "pt_su", "no_irs"],
        "sweep": {"variable": "eta", "values": [5, 10]}, "draws": 2, "verify_samples": 5000, "wsmax": {"omega_step": 5}})"},
      {"region", R"({"name": "d_region", "kind": "region", "scenario": {"N": 6}, "draws": 1, "verify_samples": 5000})"},
      {"nmse", R"({"name": "d_nmse", "kind": "nmse", "scenario": {"N": 6, "K": 2}, "algorithms": [],
        "sweep": {"variable": "p_u", "values": [0, 12]}, "draws": 2, "budgets": {"statistics_draws": 50}})"},
      {"trace", R"({"name": "d_trace", "kind": "trace", "scenario": {"N": 6, "M": 4, "K": 2},
        "estimation": {"p_u_dbm": 18}, "algorithms": ["cssca", "non_robust", "pt_mu"], "draws": 1,
        "cssca": {"L": 100, "stage1_iters": 10, "stage2_iters": 10, "scaling_samples": 2000},
        "thresholding": {"check_samples": 2000}, "verify_samples": 5000})"}};
  const fs::path root = g_work / "c11";
  fs::remove_all(root);
  fs::create_directories(root);
  int identical = 0, compared = 0;
  std::string detail;
  for (const auto& [name, json] : specs) {
    const fs::path spec = root / (name + ".json");
    std::ofstream(spec) << json;
    bool ok = true;
    for (const char* run : {"a", "b"}) {
      const std::string threads = std::string(run) == "a" ? "1" : "2";
      ok = ok && run_cli("run --spec \"" + spec.string() + "\" --out \"" + (root / (name + "_" + run)).string() +
                             "\" --seed 1111 --threads " + threads,
                         root / (name + "_" + run + ".log")) == 0;
    }
    if (!ok) {
      detail += name + " run failed; ";
      continue;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root / (name + "_a"))) {
      if (!entry.is_regular_file() || entry.path().filename() == "timings.csv") continue;
      const fs::path rel = fs::relative(entry.path(), root / (name + "_a"));
      ++compared;
      if (slurp(entry.path()) == slurp(root / (name + "_b") / rel))
        ++identical;
      else
        detail += name + "/" + rel.string() + " differs; ";
    }
  }
  return {compared > 0 && identical == compared && detail.empty(),
          detail + std::to_string(identical) + "/" + std::to_string(compared) + " files identical"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", g_cli, "path to the irsbf executable")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "criteria to run");
  CLI11_PARSE(app, argc, argv);
  g_work = work;
  fs::create_directories(g_work);

  const std::vector<std::function<Outcome()>> criteria{
      analytic_vs_monte_carlo, special_functions, wsmax_vs_exhaustive, weight_identities,
      coarse_weight_grid,      trend_suite,       gradient_check,      cssca_convergence,
      multiuser_ordering,      ball_subsolver,    determinism};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << "criterion " << std::setw(2) << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
              << fmt(secs, 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
