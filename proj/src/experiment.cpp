#include "irsbf/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace irsbf {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

json matrix_json(const CMatrix& A) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      re.push_back(A(i, j).real());
      im.push_back(A(i, j).imag());
    }
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != static_cast<std::size_t>(rows * cols) || im.size() != re.size())
    throw std::runtime_error("bundle: matrix entry count mismatch");
  CMatrix A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
      const auto idx = static_cast<std::size_t>(i * cols + j2);
      A(i, j2) = Complex(re[idx].get<double>(), im[idx].get<double>());
    }
  return A;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Inputs shared by every algorithm of one (sweep point, draw) task.
struct DrawContext {
  ExperimentSpec spec;
  ChannelSet channels;
  TrainingPattern pattern;
  ErrorModel model;
  std::vector<ChannelEstimate> estimates;
};

DrawContext prepare_draw(const ExperimentSpec& point, std::uint64_t master, int draw) {
  DrawContext ctx;
  ctx.spec = point;
  const std::uint64_t draw_index = static_cast<std::uint64_t>(draw);
  ctx.channels = synthesize_scenario(point.geometry(), point.propagation(), derive_seed(master, {1, draw_index}));
  ctx.pattern = build_training_pattern(point.N, point.pilot_length(), PhaseAlphabet(point.training_bits), point.pattern);
  const double p_u = dbm_to_watts(point.p_u_dbm);
  const double eps2 = dbm_to_watts(point.eps2_dbm);
  ctx.model = error_covariance(ctx.pattern, p_u, eps2);
  // NMSE runs always measure the LS estimator against the synthesized channels.
  if (point.replay_training || point.kind == ExperimentKind::Nmse) {
    ctx.estimates = ls_estimate(ctx.channels, ctx.pattern, p_u, eps2, derive_seed(master, {2, draw_index}));
  } else {
    for (const CMatrix& Ht : ctx.channels.H_tilde) ctx.estimates.push_back({Ht});
  }
  return ctx;
}

MultiuserProblem multiuser_problem(const DrawContext& ctx) {
  MultiuserProblem problem;
  for (const auto& e : ctx.estimates) {
    problem.H_bar.push_back(e.H_bar);
    problem.models.push_back(ctx.model);
    problem.specs.push_back(ctx.spec.outage_spec());
  }
  problem.alphabet = ctx.spec.alphabet();
  return problem;
}

struct Design {
  CVector v;
  std::vector<CVector> precoders;
  int iterations = 0;
};

Design single_user_design(const DrawContext& ctx, Algorithm algorithm, std::uint64_t seed,
                          const fs::path& trace_path) {
  const ExperimentSpec& s = ctx.spec;
  const SingleUserProblem problem{ctx.estimates.front().H_bar, ctx.model, s.outage_spec(), s.alphabet()};
  SingleUserSolution sol;
  switch (algorithm) {
    case Algorithm::Wsmax: {
      const WsmaxResult r = wsmax(problem, s.wsmax, seed);
      if (!trace_path.empty()) {
        std::ostringstream os;
        write_omega_trace_csv(os, r.trace);
        write_text(trace_path, os.str());
      }
      sol = r.best;
      sol.iterations = static_cast<int>(r.trace.size());
      break;
    }
    case Algorithm::Msp: sol = solve_power_for_phases(problem, msp_solve(problem, s.wsmax.pdd, seed), s.wsmax.bisection); break;
    case Algorithm::Mpv: sol = solve_power_for_phases(problem, mpv_solve(problem, s.wsmax.pdd, seed), s.wsmax.bisection); break;
    case Algorithm::Mvr: {
      const MvrResult r = mvr_maximize(problem, s.wsmax.pdd, seed);
      sol = solve_power_for_phases(problem, r.v, s.wsmax.bisection);
      sol.iterations = r.iterations;
      break;
    }
    case Algorithm::Bcd: {
      const BcdResult r = bcd_baseline(problem, s.wsmax.bisection, seed);
      sol = r.solution;
      sol.iterations = r.sweeps;
      break;
    }
    case Algorithm::Exhaustive: sol = exhaustive_search(problem, s.wsmax.bisection, s.exhaustive_budget); break;
    case Algorithm::ThresholdingSu:
      sol = progressive_thresholding_su(problem, s.thresholding_su_step_db, s.wsmax.pdd, seed);
      break;
    case Algorithm::NoIrs: sol = no_irs_baseline(problem, s.wsmax.bisection); break;
    default: throw std::logic_error("not a single-user algorithm");
  }
  return {sol.v, {sol.w}, sol.iterations};
}

Design multiuser_design(const DrawContext& ctx, Algorithm algorithm, std::uint64_t seed, const fs::path& trace_path) {
  const ExperimentSpec& s = ctx.spec;
  const MultiuserProblem problem = multiuser_problem(ctx);
  MultiuserSolution sol;
  switch (algorithm) {
    case Algorithm::Cssca: {
      CsscaConfig config = s.cssca;
      config.verify_samples = s.verify_samples;
      sol = two_stage_cssca(problem, config, seed);
      if (!trace_path.empty()) {
        std::ostringstream os;
        write_cssca_trace_csv(os, sol.trace);
        write_text(trace_path, os.str());
      }
      break;
    }
    case Algorithm::NonRobust: sol = non_robust_baseline(problem, s.wsmax.pdd, s.verify_samples, seed); break;
    case Algorithm::ThresholdingMu: {
      ThresholdingConfig config = s.thresholding;
      config.verify_samples = s.verify_samples;
      sol = progressive_thresholding_mu(problem, config, seed);
      break;
    }
    default: throw std::logic_error("not a multiuser algorithm");
  }
  return {sol.v, sol.precoders, sol.iterations};
}

std::string tag(std::size_t point, int draw) { return "p" + std::to_string(point) + "_d" + std::to_string(draw); }

std::vector<ResultRow> run_sweep_task(const DrawContext& ctx, std::size_t point, int draw, double value,
                                      const fs::path& out_dir) {
  const ExperimentSpec& s = ctx.spec;
  std::vector<ResultRow> rows;
  for (std::size_t a = 0; a < s.algorithms.size(); ++a) {
    const Algorithm algorithm = s.algorithms[a];
    const std::string name(algorithm_name(algorithm));
    ResultRow row{value, draw, name, kNan, kNan, kNan, 0, "ok", 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::uint64_t alg_seed = derive_seed(s.seed, {3, static_cast<std::uint64_t>(draw), a});
      const std::uint64_t verify_seed = derive_seed(s.seed, {4, point, static_cast<std::uint64_t>(draw), a});
      fs::path trace_path;
      const bool traced = algorithm == Algorithm::Wsmax || algorithm == Algorithm::Cssca;
      if (s.emit_traces && traced) trace_path = out_dir / "traces" / (name + "_" + tag(point, draw) + ".csv");
      const Design d = is_multiuser(algorithm) ? multiuser_design(ctx, algorithm, alg_seed, trace_path)
                                               : single_user_design(ctx, algorithm, alg_seed, trace_path);
      SolutionBundle bundle{multiuser_problem(ctx), d.v, d.precoders, verify_seed};
      if (!is_multiuser(algorithm)) {
        bundle.problem.H_bar.resize(1);
        bundle.problem.models.resize(1);
        bundle.problem.specs.resize(1);
      }
      const Verdict verdict = verify_solution(bundle, verify_seed, s.verify_samples);
      double power = 0.0;
      for (const auto& w : d.precoders) power += w.squaredNorm();
      row.power_dbm = watts_to_dbm(power);
      for (const auto& e : verdict.outages)
        if (std::isnan(row.outage) || e.outage > row.outage) {
          row.outage = e.outage;
          row.outage_stderr = e.std_error;
        }
      row.iterations = d.iterations;
      row.status = verdict.pass ? "ok" : "verify_fail";
      if (s.emit_bundles) write_bundle(out_dir / "bundles" / (name + "_" + tag(point, draw) + ".json"), bundle);
    } catch (const std::exception& e) {
      row.status = std::string("error:") + e.what();
      for (char& c : row.status)
        if (c == ',' || c == '\n') c = ';';
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_region_task(const DrawContext& ctx, std::size_t point, int draw, double value,
                                       const fs::path& out_dir) {
  const ExperimentSpec& s = ctx.spec;
  const auto start = std::chrono::steady_clock::now();
  ResultRow row{value, draw, "region_min", kNan, kNan, kNan, 0, "ok", 0.0};
  try {
    const auto points =
        sweep_msp_variance_region(ctx.estimates.front().H_bar, ctx.model, s.alphabet(), s.outage_spec(),
                                  s.region_budget, derive_seed(s.seed, {5, static_cast<std::uint64_t>(draw)}),
                                  s.wsmax.bisection);
    std::ostringstream os;
    write_region_csv(os, points);
    write_text(out_dir / "regions" / ("region_" + tag(point, draw) + ".csv"), os.str());
    const auto best = std::min_element(points.begin(), points.end(),
                                       [](const RegionPoint& x, const RegionPoint& y) { return x.power < y.power; });
    row.power_dbm = watts_to_dbm(best->power);
    row.iterations = static_cast<int>(points.size());
  } catch (const std::exception& e) {
    row.status = std::string("error:") + e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {row};
}

std::vector<ResultRow> run_nmse_task(const DrawContext& ctx, int draw, double value) {
  const ExperimentSpec& s = ctx.spec;
  const auto start = std::chrono::steady_clock::now();
  const double p_u = dbm_to_watts(s.p_u_dbm);
  const double eps2 = dbm_to_watts(s.eps2_dbm);
  std::vector<CMatrix> ls, lmmse;
  const auto draw_index = static_cast<std::uint64_t>(draw);
  for (int k = 0; k < ctx.channels.K(); ++k) {
    ls.push_back(ctx.estimates[k].H_bar);
    const auto user = static_cast<std::uint64_t>(k);
    const ChannelStatistics stats =
        estimate_channel_statistics(s.geometry(), s.propagation(), ctx.channels.user_positions, k,
                                    s.statistics_draws, derive_seed(s.seed, {6, draw_index, user}));
    lmmse.push_back(lmmse_estimate(ctx.channels.H_tilde[k], ctx.pattern, p_u, eps2, stats,
                                   derive_seed(s.seed, {7, draw_index, user}))
                        .H_bar);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // The nmse rows carry the error in dB in the power column.
  return {{value, draw, "ls_nmse", linear_to_db(nmse(ls, ctx.channels.H_tilde)), kNan, kNan, 0, "ok", wall},
          {value, draw, "lmmse_nmse", linear_to_db(nmse(lmmse, ctx.channels.H_tilde)), kNan, kNan, 0, "ok", 0.0}};
}

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "sweep_value,draw,algorithm,power_dbm,outage,outage_stderr,iterations,status\n";
  for (const auto& r : rows)
    os << number(r.sweep_value) << ',' << r.draw << ',' << r.algorithm << ',' << number(r.power_dbm) << ','
       << number(r.outage) << ',' << number(r.outage_stderr) << ',' << r.iterations << ',' << r.status << '\n';
}

void write_timings_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "sweep_value,draw,algorithm,wall_seconds\n";
  for (const auto& r : rows)
    os << number(r.sweep_value) << ',' << r.draw << ',' << r.algorithm << ',' << number(r.wall_seconds) << '\n';
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  const fs::path& out = options.out_dir;
  fs::create_directories(out);
  const bool optimizes = spec.kind == ExperimentKind::Sweep || spec.kind == ExperimentKind::Trace;
  if (spec.emit_bundles && optimizes) fs::create_directories(out / "bundles");
  if (spec.emit_traces || spec.kind == ExperimentKind::Trace) fs::create_directories(out / "traces");
  if (spec.kind == ExperimentKind::Region) fs::create_directories(out / "regions");

  ExperimentSpec effective = spec;
  if (spec.kind == ExperimentKind::Trace) effective.emit_traces = true;

  const std::size_t points = effective.sweep_values.size();
  const std::size_t tasks = points * static_cast<std::size_t>(effective.draws);
  std::vector<std::vector<ResultRow>> results(tasks);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const std::size_t point = task / static_cast<std::size_t>(effective.draws);
      const int draw = static_cast<int>(task % static_cast<std::size_t>(effective.draws));
      const double value = effective.sweep_values[point];
      try {
        const DrawContext ctx = prepare_draw(effective.at(value), effective.seed, draw);
        switch (effective.kind) {
          case ExperimentKind::Sweep:
          case ExperimentKind::Trace: results[task] = run_sweep_task(ctx, point, draw, value, out); break;
          case ExperimentKind::Region: results[task] = run_region_task(ctx, point, draw, value, out); break;
          case ExperimentKind::Nmse: results[task] = run_nmse_task(ctx, draw, value); break;
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());

  std::ostringstream results_csv, timings_csv;
  write_results_csv(results_csv, rows);
  write_timings_csv(timings_csv, rows);
  write_text(out / "results.csv", results_csv.str());
  write_text(out / "timings.csv", timings_csv.str());
  write_text(out / "spec.json", spec_to_json(spec));
  return rows;
}

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"fig5", "fig6",  "fig7",    "fig8",    "fig9",
                                              "fig10", "fig11", "region3", "region4", "nmse3"};
  return names;
}

std::vector<ExperimentSpec> figure_specs(const std::string& name, Scale scale) {
  const bool full = scale == Scale::Full;
  ExperimentSpec base = parse_spec("{}", scale);
  base.name = name;
  const auto single = [&](std::vector<Algorithm> algorithms) {
    ExperimentSpec s = base;
    s.eta_db = 15.0;
    s.algorithms = std::move(algorithms);
    return s;
  };
  const std::vector<Algorithm> heuristics{Algorithm::Wsmax, Algorithm::Msp, Algorithm::Mpv, Algorithm::Mvr};

  if (name == "fig5") {
    ExperimentSpec s = single({Algorithm::Wsmax, Algorithm::Exhaustive, Algorithm::Bcd, Algorithm::ThresholdingSu,
                               Algorithm::NoIrs});
    s.N = 10;
    s.sweep = SweepVariable::UplinkPower;
    s.sweep_values = full ? std::vector<double>{0, 4, 8, 12, 16, 20} : std::vector<double>{2, 6, 10};
    return {s};
  }
  if (name == "fig6") {
    ExperimentSpec s = single({Algorithm::Wsmax});
    s.draws = 1;
    s.sweep = SweepVariable::OmegaStep;
    s.sweep_values = {1.0, 5.0};
    s.emit_traces = true;
    return {s};
  }
  if (name == "fig7") {
    std::vector<ExperimentSpec> panels;
    for (int bits : {1, 3}) {
      ExperimentSpec s = single(heuristics);
      s.name = name + "_q" + std::to_string(bits);
      s.phase_bits = bits;
      s.training_bits = bits;
      s.sweep = SweepVariable::UplinkPower;
      s.sweep_values = full ? std::vector<double>{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20}
                            : std::vector<double>{2, 6, 10};
      panels.push_back(s);
    }
    return panels;
  }
  if (name == "fig8") {
    ExperimentSpec s = single(heuristics);
    s.sweep = SweepVariable::Eta;
    s.sweep_values = full ? std::vector<double>{5, 10, 15, 20, 25} : std::vector<double>{5, 10, 15};
    return {s};
  }
  if (name == "fig9") {
    ExperimentSpec s = single(heuristics);
    s.eta_db = 10.0;
    s.sweep = SweepVariable::Epsilon;
    s.sweep_values = full ? std::vector<double>{0.02, 0.05, 0.1, 0.15, 0.2} : std::vector<double>{0.05, 0.1, 0.2};
    return {s};
  }
  ExperimentSpec mu = base;
  mu.M = 6;
  mu.p_u_dbm = 18.0;
  if (name == "fig10") {
    mu.kind = ExperimentKind::Trace;
    mu.K = 4;
    mu.draws = 1;
    mu.algorithms = {Algorithm::Cssca};
    return {mu};
  }
  if (name == "fig11") {
    mu.algorithms = {Algorithm::Cssca, Algorithm::ThresholdingMu, Algorithm::NonRobust};
    mu.sweep = SweepVariable::K;
    mu.sweep_values = full ? std::vector<double>{2, 3, 4, 5, 6} : std::vector<double>{2, 4};
    mu.draws = full ? 50 : 5;
    return {mu};
  }
  if (name == "region3" || name == "region4") {
    ExperimentSpec s = base;
    s.kind = ExperimentKind::Region;
    s.N = 12;
    s.eta_db = 15.0;
    s.phase_bits = name == "region3" ? 0 : 1;
    s.draws = 1;
    s.region_budget = full ? 200000 : 20000;
    return {s};
  }
  if (name == "nmse3") {
    ExperimentSpec s = base;
    s.kind = ExperimentKind::Nmse;
    s.K = full ? 4 : 2;
    s.draws = full ? 50 : 5;
    s.statistics_draws = full ? 2000 : 200;
    s.sweep = SweepVariable::UplinkPower;
    s.sweep_values = full ? std::vector<double>{-10, -5, 0, 5, 10, 15, 20} : std::vector<double>{0, 6, 12, 18};
    return {s};
  }
  std::string msg = "unknown figure '" + name + "'; supported:";
  for (const auto& n : figure_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

void write_bundle(const fs::path& path, const SolutionBundle& bundle) {
  json users = json::array();
  for (int k = 0; k < bundle.problem.K(); ++k) {
    const ErrorModel& m = bundle.problem.models[k];
    const OutageSpec& s = bundle.problem.specs[k];
    users.push_back({{"H_bar", matrix_json(bundle.problem.H_bar[k])},
                     {"error_factor", matrix_json(m.factor)},
                     {"p_u", m.p_u},
                     {"eps2", m.eps2},
                     {"eta", s.eta},
                     {"epsilon", s.epsilon},
                     {"sigma2", s.sigma2}});
  }
  json precoders = json::array();
  for (const auto& w : bundle.precoders) precoders.push_back(matrix_json(w));
  const json root{{"seed", bundle.seed},
                  {"phase_bits", bundle.problem.alphabet.bits()},
                  {"users", users},
                  {"v", matrix_json(bundle.v)},
                  {"precoders", precoders}};
  write_text(path, root.dump() + "\n");
}

SolutionBundle read_bundle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bundle " + path.string());
  const json root = json::parse(in);
  SolutionBundle b;
  b.seed = root.at("seed").get<std::uint64_t>();
  b.problem.alphabet = PhaseAlphabet(root.at("phase_bits").get<int>());
  for (const auto& u : root.at("users")) {
    b.problem.H_bar.push_back(matrix_from_json(u.at("H_bar")));
    ErrorModel m;
    m.factor = matrix_from_json(u.at("error_factor"));
    m.V_bar = m.factor * m.factor.adjoint();
    m.p_u = u.at("p_u").get<double>();
    m.eps2 = u.at("eps2").get<double>();
    b.problem.models.push_back(std::move(m));
    b.problem.specs.push_back({u.at("eta").get<double>(), u.at("epsilon").get<double>(), u.at("sigma2").get<double>()});
  }
  b.v = matrix_from_json(root.at("v"));
  for (const auto& w : root.at("precoders")) b.precoders.push_back(matrix_from_json(w));
  b.problem.validate();
  if (static_cast<int>(b.precoders.size()) != b.problem.K()) throw std::runtime_error("bundle: precoder count");
  return b;
}

Verdict verify_solution(const SolutionBundle& bundle, std::uint64_t seed, int samples) {
  const MultiuserProblem& p = bundle.problem;
  Verdict verdict;
  verdict.outages = mc_outage(bundle.precoders, bundle.v, p.H_bar, p.models, p.specs, samples, seed);
  verdict.pass = outage_verdict(verdict.outages, p.specs);
  return verdict;
}

}  // namespace irsbf
