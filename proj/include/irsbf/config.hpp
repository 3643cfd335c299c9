#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "irsbf/cssca.hpp"
#include "irsbf/multiuser.hpp"
#include "irsbf/single_user.hpp"
#include "irsbf/system_model.hpp"
#include "irsbf/training.hpp"

namespace irsbf {

enum class Algorithm { Wsmax, Msp, Mpv, Mvr, Bcd, Exhaustive, ThresholdingSu, NoIrs, Cssca, NonRobust, ThresholdingMu };

std::string_view algorithm_name(Algorithm algorithm);
/// Throws std::invalid_argument for unknown names.
Algorithm parse_algorithm(std::string_view name);
bool is_multiuser(Algorithm algorithm);

/// `Omega` fixes a single weight for WSMax; `OmegaStep` sets its grid spacing.
enum class SweepVariable { None, UplinkPower, Eta, Epsilon, N, K, Omega, OmegaStep };

std::string_view sweep_name(SweepVariable variable);
SweepVariable parse_sweep(std::string_view name);

/// Sweep: optimize and verify each algorithm. Region: MSP-variance scatter.
/// Nmse: LS against LMMSE estimation error. Trace: CSSCA iteration history.
enum class ExperimentKind { Sweep, Region, Nmse, Trace };

enum class Scale { Desk, Full };

Scale parse_scale(std::string_view name);

/// Fully resolved experiment. Config files give powers in dBm and targets in
/// dB; the fields here hold the same units.
struct ExperimentSpec {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Sweep;

  int N = 16;
  int M = 4;
  int K = 1;
  double C0_db = -30.0;
  double alpha_au = 3.6;
  double alpha_ai = 2.2;
  double alpha_iu = 2.2;
  // Rician factors, linear; null in JSON means 0 (Rayleigh).
  double beta_au = 0.0;
  double beta_ai = 1.9952623149688795;
  double beta_iu = 0.0;
  double sigma2_dbm = -80.0;

  PatternKind pattern = PatternKind::QuantizedDft;
  int training_bits = 1;   // 0: continuous training phases
  int training_length = 0; // 0: N + 1
  // false: each channel draw is the AP's estimate and the truth is the draw
  // minus an error sample; true: estimates come from replayed LS training.
  // Nmse runs always replay.
  bool replay_training = false;
  double p_u_dbm = 6.0;
  double eps2_dbm = -80.0;

  int phase_bits = 1;  // 0: continuous phases
  double eta_db = 5.0;
  double epsilon = 0.1;

  std::vector<Algorithm> algorithms{Algorithm::Wsmax};
  SweepVariable sweep = SweepVariable::None;
  std::vector<double> sweep_values{0.0};
  int draws = 10;
  std::uint64_t seed = 1;

  WsmaxConfig wsmax;
  CsscaConfig cssca;
  ThresholdingConfig thresholding;
  double thresholding_su_step_db = 0.01;
  long exhaustive_budget = 1L << 20;
  long region_budget = 20000;
  int statistics_draws = 200;  // channel draws behind the LMMSE prior
  int verify_samples = 100000;
  bool emit_traces = false;
  bool emit_bundles = true;

  ScenarioGeometry geometry() const;
  PropagationParams propagation() const;
  OutageSpec outage_spec() const;
  PhaseAlphabet alphabet() const;
  int pilot_length() const { return training_length > 0 ? training_length : N + 1; }

  /// Copy with the sweep variable set to `value`.
  ExperimentSpec at(double value) const;
  void validate() const;
};

/// Defaults for the scale, overridden by every key present in the JSON text.
/// Unknown keys are rejected.
ExperimentSpec parse_spec(std::string_view json_text, Scale scale);
ExperimentSpec load_spec(const std::string& path, Scale scale);
/// Resolved spec as JSON; parse_spec of the result reproduces the spec.
std::string spec_to_json(const ExperimentSpec& spec);

}  // namespace irsbf
