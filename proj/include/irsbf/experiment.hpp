#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsbf/config.hpp"

namespace irsbf {

struct ResultRow {
  double sweep_value = 0.0;
  int draw = 0;
  std::string algorithm;
  double power_dbm = 0.0;
  double outage = 0.0;  // worst user
  double outage_stderr = 0.0;
  int iterations = 0;
  std::string status;  // ok, verify_fail or error:<message>
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::filesystem::path out_dir;
  int threads = 1;
};

/// Runs every (sweep point, draw) task on a pool of `threads` workers and
/// writes results.csv, timings.csv, spec.json and the per-kind extras under
/// `out_dir`. The returned rows and every file except timings.csv depend on
/// the spec alone.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RunOptions& options);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_timings_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// Names accepted by figure_specs.
const std::vector<std::string>& figure_names();
/// One spec per panel of the named figure. Throws std::invalid_argument
/// listing the supported names for an unknown one.
std::vector<ExperimentSpec> figure_specs(const std::string& name, Scale scale);

/// Everything needed to re-check a solution: estimates, error factors,
/// targets and the design.
struct SolutionBundle {
  MultiuserProblem problem;
  CVector v;
  std::vector<CVector> precoders;
  std::uint64_t seed = 0;
};

void write_bundle(const std::filesystem::path& path, const SolutionBundle& bundle);
SolutionBundle read_bundle(const std::filesystem::path& path);

struct Verdict {
  bool pass = false;
  std::vector<OutageEstimate> outages;
};

/// Fresh Monte Carlo outage per user; passes iff every user is within
/// epsilon + 3 stderr + 0.005.
Verdict verify_solution(const SolutionBundle& bundle, std::uint64_t seed, int samples);

}  // namespace irsbf
