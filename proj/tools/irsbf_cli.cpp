#include <cstdint>
#include <exception>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "irsbf/experiment.hpp"

namespace {

void print_summary(const std::vector<irsbf::ResultRow>& rows, const std::filesystem::path& out) {
  int failures = 0;
  for (const auto& r : rows) failures += r.status != "ok";
  std::cout << rows.size() << " rows written to " << (out / "results.csv").string();
  if (failures > 0) std::cout << " (" << failures << " not ok)";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage-constrained beamforming experiments for IRS-aided downlinks"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, scale_name = "desk", figure, bundle_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int samples = 100000;

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON spec");
  run->add_option("--spec", spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--scale", scale_name, "Defaults for unspecified fields")->check(CLI::IsMember({"desk", "full"}));
  run->add_option("--seed", seed, "Master seed, overriding the spec");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* fig = app.add_subcommand("figure", "Emit the data series of a named figure");
  std::string names;
  for (const auto& n : irsbf::figure_names()) names += (names.empty() ? "" : ", ") + n;
  fig->add_option("--name", figure, "One of: " + names)->required();
  fig->add_option("--out", out_dir, "Output directory (default figures/<name>)");
  fig->add_option("--scale", scale_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  fig->add_option("--seed", seed, "Master seed");
  fig->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Re-check a solution bundle by fresh Monte Carlo");
  verify->add_option("--bundle", bundle_path, "Bundle JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--seed", seed, "Seed for the fresh samples (default: derived from the bundle)");
  verify->add_option("--samples", samples, "Monte Carlo samples")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const irsbf::Scale scale = irsbf::parse_scale(scale_name);
    if (*run) {
      irsbf::ExperimentSpec spec = irsbf::load_spec(spec_path, scale);
      if (seed) spec.seed = *seed;
      const auto rows = irsbf::run_experiment(spec, {out_dir, threads});
      print_summary(rows, out_dir);
      return 0;
    }
    if (*fig) {
      const auto specs = irsbf::figure_specs(figure, scale);
      const std::filesystem::path root = out_dir.empty() ? std::filesystem::path("figures") / figure : std::filesystem::path(out_dir);
      for (auto spec : specs) {
        if (seed) spec.seed = *seed;
        const auto dir = specs.size() == 1 ? root : root / spec.name;
        print_summary(irsbf::run_experiment(spec, {dir, threads}), dir);
      }
      return 0;
    }
    const irsbf::SolutionBundle bundle = irsbf::read_bundle(bundle_path);
    const std::uint64_t fresh = seed ? *seed : irsbf::derive_seed(bundle.seed, {0xfeed});
    const irsbf::Verdict verdict = irsbf::verify_solution(bundle, fresh, samples);
    std::cout << std::setprecision(6);
    for (std::size_t k = 0; k < verdict.outages.size(); ++k)
      std::cout << "user " << k << ": outage " << verdict.outages[k].outage << " +- "
                << verdict.outages[k].std_error << " (target " << bundle.problem.specs[k].epsilon << ")\n";
    std::cout << (verdict.pass ? "PASS" : "FAIL") << '\n';
    return verdict.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
