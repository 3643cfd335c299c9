#include "irsbf/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace irsbf {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Algorithm, std::string_view>, 11> kAlgorithmNames{{
    {Algorithm::Wsmax, "wsmax"},
    {Algorithm::Msp, "msp"},
    {Algorithm::Mpv, "mpv"},
    {Algorithm::Mvr, "mvr"},
    {Algorithm::Bcd, "bcd"},
    {Algorithm::Exhaustive, "exhaustive"},
    {Algorithm::ThresholdingSu, "pt_su"},
    {Algorithm::NoIrs, "no_irs"},
    {Algorithm::Cssca, "cssca"},
    {Algorithm::NonRobust, "non_robust"},
    {Algorithm::ThresholdingMu, "pt_mu"},
}};

constexpr std::array<std::pair<SweepVariable, std::string_view>, 8> kSweepNames{{
    {SweepVariable::None, "none"},
    {SweepVariable::UplinkPower, "p_u"},
    {SweepVariable::Eta, "eta"},
    {SweepVariable::Epsilon, "epsilon"},
    {SweepVariable::N, "N"},
    {SweepVariable::K, "K"},
    {SweepVariable::Omega, "omega"},
    {SweepVariable::OmegaStep, "omega_step"},
}};

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 4> kKindNames{{
    {ExperimentKind::Sweep, "sweep"},
    {ExperimentKind::Region, "region"},
    {ExperimentKind::Nmse, "nmse"},
    {ExperimentKind::Trace, "trace"},
}};

template <class Table, class Enum>
std::string_view name_of(const Table& table, Enum value) {
  for (const auto& [e, n] : table)
    if (e == value) return n;
  throw std::logic_error("unnamed enumerator");
}

template <class Table>
auto value_of(const Table& table, std::string_view name, const char* what) {
  for (const auto& [e, n] : table)
    if (n == name) return e;
  std::string msg = std::string("unknown ") + what + " '" + std::string(name) + "'; expected one of:";
  for (const auto& entry : table) msg += " " + std::string(entry.second);
  throw std::invalid_argument(msg);
}

void check_keys(const json& object, const char* section, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw std::invalid_argument(std::string("spec: '") + section + "' must be an object");
  for (const auto& item : object.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw std::invalid_argument(std::string("spec: unknown key '") + item.key() + "' in " + section);
}

template <class T>
void read(const json& object, const char* key, T& target) {
  if (object.contains(key)) target = object.at(key).get<T>();
}

void read_rician(const json& object, const char* key, double& linear) {
  if (!object.contains(key)) return;
  const json& value = object.at(key);
  linear = value.is_null() ? 0.0 : db_to_linear(value.get<double>());
}

// Rounded to 1e-9 dB so that the dB -> linear -> dB trip is a fixed point.
json rician_json(double linear) {
  return linear > 0.0 ? json(std::round(linear_to_db(linear) * 1e9) / 1e9) : json(nullptr);
}

std::string_view pattern_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::QuantizedDft: return "dft";
    case PatternKind::Hadamard: return "hadamard";
    case PatternKind::Custom: break;
  }
  throw std::invalid_argument("spec: custom training patterns are not supported in experiment files");
}

PatternKind parse_pattern(const std::string& name) {
  if (name == "dft") return PatternKind::QuantizedDft;
  if (name == "hadamard") return PatternKind::Hadamard;
  throw std::invalid_argument("spec: unknown training pattern '" + name + "'; expected dft or hadamard");
}

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) { return name_of(kAlgorithmNames, algorithm); }
Algorithm parse_algorithm(std::string_view name) { return value_of(kAlgorithmNames, name, "algorithm"); }
bool is_multiuser(Algorithm algorithm) {
  return algorithm == Algorithm::Cssca || algorithm == Algorithm::NonRobust || algorithm == Algorithm::ThresholdingMu;
}

std::string_view sweep_name(SweepVariable variable) { return name_of(kSweepNames, variable); }
SweepVariable parse_sweep(std::string_view name) { return value_of(kSweepNames, name, "sweep variable"); }

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::Desk;
  if (name == "full") return Scale::Full;
  throw std::invalid_argument("unknown scale '" + std::string(name) + "'; expected desk or full");
}

ScenarioGeometry ExperimentSpec::geometry() const { return ScenarioGeometry::with_sizes(N, M, K); }

PropagationParams ExperimentSpec::propagation() const {
  PropagationParams p;
  p.C0 = db_to_linear(C0_db);
  p.alpha_au = alpha_au;
  p.alpha_ai = alpha_ai;
  p.alpha_iu = alpha_iu;
  p.beta_au = beta_au;
  p.beta_ai = beta_ai;
  p.beta_iu = beta_iu;
  p.sigma2 = dbm_to_watts(sigma2_dbm);
  return p;
}

OutageSpec ExperimentSpec::outage_spec() const { return {db_to_linear(eta_db), epsilon, dbm_to_watts(sigma2_dbm)}; }

PhaseAlphabet ExperimentSpec::alphabet() const { return PhaseAlphabet(phase_bits); }

ExperimentSpec ExperimentSpec::at(double value) const {
  ExperimentSpec s = *this;
  switch (sweep) {
    case SweepVariable::None: break;
    case SweepVariable::UplinkPower: s.p_u_dbm = value; break;
    case SweepVariable::Eta: s.eta_db = value; break;
    case SweepVariable::Epsilon: s.epsilon = value; break;
    case SweepVariable::N: s.N = static_cast<int>(std::lround(value)); break;
    case SweepVariable::K: s.K = static_cast<int>(std::lround(value)); break;
    case SweepVariable::Omega:
      s.wsmax.omega_lo = s.wsmax.omega_hi = value;
      break;
    case SweepVariable::OmegaStep: s.wsmax.omega_step = value; break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  if (N < 1 || M < 1 || K < 1) throw std::invalid_argument("spec: N, M and K must be positive");
  if (draws < 1) throw std::invalid_argument("spec: draws must be at least 1");
  if (sweep_values.empty()) throw std::invalid_argument("spec: sweep values must be nonempty");
  if (algorithms.empty() && kind == ExperimentKind::Sweep) throw std::invalid_argument("spec: no algorithms");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("spec: epsilon must lie in (0, 1)");
  if (phase_bits < 0 || training_bits < 0) throw std::invalid_argument("spec: phase bits must be nonnegative");
  if (verify_samples < 1) throw std::invalid_argument("spec: verify_samples must be positive");
  if (!(wsmax.omega_step > 0.0)) throw std::invalid_argument("spec: omega_step must be positive");
  if (cssca.L < 1 || cssca.T_H < 1) throw std::invalid_argument("spec: L and T_H must be positive");
  for (double v : sweep_values) {
    const ExperimentSpec point = at(v);
    if (point.N < 1 || point.K < 1) throw std::invalid_argument("spec: swept N and K must be positive");
    if (!(point.epsilon > 0.0 && point.epsilon < 1.0)) throw std::invalid_argument("spec: swept epsilon outside (0, 1)");
  }
  const bool single = std::any_of(algorithms.begin(), algorithms.end(), [](Algorithm a) { return !is_multiuser(a); });
  if (kind == ExperimentKind::Sweep && single) {
    const bool multi_user_points = K > 1 || (sweep == SweepVariable::K &&
                                             std::any_of(sweep_values.begin(), sweep_values.end(),
                                                         [](double v) { return std::lround(v) > 1; }));
    if (multi_user_points) throw std::invalid_argument("spec: single-user algorithms require K = 1");
  }
  geometry().validate();
  propagation().validate();
}

ExperimentSpec parse_spec(std::string_view json_text, Scale scale) {
  ExperimentSpec s;
  if (scale == Scale::Full) {
    s.N = 40;
    s.draws = 100;
    s.cssca.L = 100000;
  }
  const json root = json::parse(json_text);
  check_keys(root, "spec",
             {"name", "kind", "scenario", "estimation", "outage", "phase_bits", "algorithms", "sweep", "draws", "seed",
              "wsmax", "pdd", "cssca", "thresholding", "budgets", "verify_samples", "emit_traces", "emit_bundles"});
  read(root, "name", s.name);
  if (root.contains("kind")) s.kind = value_of(kKindNames, root.at("kind").get<std::string>(), "experiment kind");
  bool eps2_given = false;
  if (root.contains("scenario")) {
    const json& sc = root.at("scenario");
    check_keys(sc, "scenario",
               {"N", "M", "K", "C0_db", "alpha_au", "alpha_ai", "alpha_iu", "beta_au_db", "beta_ai_db", "beta_iu_db",
                "sigma2_dbm"});
    read(sc, "N", s.N);
    read(sc, "M", s.M);
    read(sc, "K", s.K);
    read(sc, "C0_db", s.C0_db);
    read(sc, "alpha_au", s.alpha_au);
    read(sc, "alpha_ai", s.alpha_ai);
    read(sc, "alpha_iu", s.alpha_iu);
    read_rician(sc, "beta_au_db", s.beta_au);
    read_rician(sc, "beta_ai_db", s.beta_ai);
    read_rician(sc, "beta_iu_db", s.beta_iu);
    read(sc, "sigma2_dbm", s.sigma2_dbm);
  }
  if (root.contains("estimation")) {
    const json& es = root.at("estimation");
    check_keys(es, "estimation", {"pattern", "bits", "length", "p_u_dbm", "eps2_dbm", "replay_training"});
    if (es.contains("pattern")) s.pattern = parse_pattern(es.at("pattern").get<std::string>());
    read(es, "bits", s.training_bits);
    read(es, "length", s.training_length);
    read(es, "replay_training", s.replay_training);
    read(es, "p_u_dbm", s.p_u_dbm);
    eps2_given = es.contains("eps2_dbm");
    read(es, "eps2_dbm", s.eps2_dbm);
  }
  if (!eps2_given) s.eps2_dbm = s.sigma2_dbm;
  if (root.contains("outage")) {
    const json& os = root.at("outage");
    check_keys(os, "outage", {"eta_db", "epsilon"});
    read(os, "eta_db", s.eta_db);
    read(os, "epsilon", s.epsilon);
  }
  read(root, "phase_bits", s.phase_bits);
  if (root.contains("algorithms")) {
    s.algorithms.clear();
    for (const auto& a : root.at("algorithms")) s.algorithms.push_back(parse_algorithm(a.get<std::string>()));
  }
  if (root.contains("sweep")) {
    const json& sw = root.at("sweep");
    check_keys(sw, "sweep", {"variable", "values"});
    if (sw.contains("variable")) s.sweep = parse_sweep(sw.at("variable").get<std::string>());
    read(sw, "values", s.sweep_values);
  }
  read(root, "draws", s.draws);
  read(root, "seed", s.seed);
  if (root.contains("wsmax")) {
    const json& w = root.at("wsmax");
    check_keys(w, "wsmax", {"omega_lo", "omega_hi", "omega_step"});
    read(w, "omega_lo", s.wsmax.omega_lo);
    read(w, "omega_hi", s.wsmax.omega_hi);
    read(w, "omega_step", s.wsmax.omega_step);
  }
  if (root.contains("pdd")) {
    const json& p = root.at("pdd");
    check_keys(p, "pdd", {"rho", "rho_shrink", "outer_iters", "inner_iters", "zero_diagonal"});
    read(p, "rho", s.wsmax.pdd.rho);
    read(p, "rho_shrink", s.wsmax.pdd.rho_shrink);
    read(p, "outer_iters", s.wsmax.pdd.outer_iters);
    read(p, "inner_iters", s.wsmax.pdd.inner_iters);
    read(p, "zero_diagonal", s.wsmax.pdd.zero_diagonal);
  }
  s.thresholding.pdd = s.wsmax.pdd;
  if (root.contains("cssca")) {
    const json& c = root.at("cssca");
    check_keys(c, "cssca",
               {"L", "T_H", "vartheta", "zeta", "tau", "xi_o", "stage1_iters", "stage2_iters", "scaling_samples"});
    read(c, "L", s.cssca.L);
    read(c, "T_H", s.cssca.T_H);
    read(c, "vartheta", s.cssca.vartheta);
    read(c, "zeta", s.cssca.zeta);
    read(c, "tau", s.cssca.tau);
    read(c, "xi_o", s.cssca.xi_o);
    read(c, "stage1_iters", s.cssca.stage1_iters);
    read(c, "stage2_iters", s.cssca.stage2_iters);
    read(c, "scaling_samples", s.cssca.scaling_samples);
  }
  if (root.contains("thresholding")) {
    const json& t = root.at("thresholding");
    check_keys(t, "thresholding", {"delta_eta_db", "check_samples", "inner_iters", "max_inflation_db"});
    read(t, "delta_eta_db", s.thresholding.delta_eta_db);
    s.thresholding_su_step_db = s.thresholding.delta_eta_db;
    read(t, "check_samples", s.thresholding.check_samples);
    read(t, "inner_iters", s.thresholding.inner_iters);
    read(t, "max_inflation_db", s.thresholding.max_inflation_db);
  }
  if (root.contains("budgets")) {
    const json& b = root.at("budgets");
    check_keys(b, "budgets", {"exhaustive", "region", "statistics_draws"});
    read(b, "exhaustive", s.exhaustive_budget);
    read(b, "region", s.region_budget);
    read(b, "statistics_draws", s.statistics_draws);
  }
  read(root, "verify_samples", s.verify_samples);
  s.cssca.verify_samples = s.verify_samples;
  s.thresholding.verify_samples = s.verify_samples;
  read(root, "emit_traces", s.emit_traces);
  read(root, "emit_bundles", s.emit_bundles);
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::string& path, Scale scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_spec(text.str(), scale);
}

std::string spec_to_json(const ExperimentSpec& s) {
  json root;
  root["name"] = s.name;
  root["kind"] = std::string(name_of(kKindNames, s.kind));
  root["scenario"] = {{"N", s.N},
                      {"M", s.M},
                      {"K", s.K},
                      {"C0_db", s.C0_db},
                      {"alpha_au", s.alpha_au},
                      {"alpha_ai", s.alpha_ai},
                      {"alpha_iu", s.alpha_iu},
                      {"beta_au_db", rician_json(s.beta_au)},
                      {"beta_ai_db", rician_json(s.beta_ai)},
                      {"beta_iu_db", rician_json(s.beta_iu)},
                      {"sigma2_dbm", s.sigma2_dbm}};
  root["estimation"] = {{"pattern", std::string(pattern_name(s.pattern))},
                        {"bits", s.training_bits},
                        {"length", s.training_length},
                        {"replay_training", s.replay_training},
                        {"p_u_dbm", s.p_u_dbm},
                        {"eps2_dbm", s.eps2_dbm}};
  root["outage"] = {{"eta_db", s.eta_db}, {"epsilon", s.epsilon}};
  root["phase_bits"] = s.phase_bits;
  json algorithms = json::array();
  for (Algorithm a : s.algorithms) algorithms.push_back(std::string(algorithm_name(a)));
  root["algorithms"] = algorithms;
  root["sweep"] = {{"variable", std::string(sweep_name(s.sweep))}, {"values", s.sweep_values}};
  root["draws"] = s.draws;
  root["seed"] = s.seed;
  root["wsmax"] = {{"omega_lo", s.wsmax.omega_lo}, {"omega_hi", s.wsmax.omega_hi}, {"omega_step", s.wsmax.omega_step}};
  root["pdd"] = {{"rho", s.wsmax.pdd.rho},
                 {"rho_shrink", s.wsmax.pdd.rho_shrink},
                 {"outer_iters", s.wsmax.pdd.outer_iters},
                 {"inner_iters", s.wsmax.pdd.inner_iters},
                 {"zero_diagonal", s.wsmax.pdd.zero_diagonal}};
  root["cssca"] = {{"L", s.cssca.L},
                   {"T_H", s.cssca.T_H},
                   {"vartheta", s.cssca.vartheta},
                   {"zeta", s.cssca.zeta},
                   {"tau", s.cssca.tau},
                   {"xi_o", s.cssca.xi_o},
                   {"stage1_iters", s.cssca.stage1_iters},
                   {"stage2_iters", s.cssca.stage2_iters},
                   {"scaling_samples", s.cssca.scaling_samples}};
  root["thresholding"] = {{"delta_eta_db", s.thresholding.delta_eta_db},
                          {"check_samples", s.thresholding.check_samples},
                          {"inner_iters", s.thresholding.inner_iters},
                          {"max_inflation_db", s.thresholding.max_inflation_db}};
  root["budgets"] = {
      {"exhaustive", s.exhaustive_budget}, {"region", s.region_budget}, {"statistics_draws", s.statistics_draws}};
  root["verify_samples"] = s.verify_samples;
  root["emit_traces"] = s.emit_traces;
  root["emit_bundles"] = s.emit_bundles;
  return root.dump(2) + "\n";
}

}  // namespace irsbf
