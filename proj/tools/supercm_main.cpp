#include <cstddef>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "supercm/config.hpp"
#include "supercm/experiment.hpp"

namespace {

// Exit codes: 0 success, 2 unreadable/malformed/invalid spec, 3 runtime
// failure inside a training run.
constexpr int kExitSpecError = 2;
constexpr int kExitRunFailure = 3;

int do_validate(const std::string& path) {
  supercm::ParsedExperiment parsed;
  try {
    parsed = supercm::load_experiment(path);
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << "\n";
    return kExitSpecError;
  }
  for (const std::string& violation : parsed.violations) {
    std::cout << violation << "\n";
  }
  if (!parsed.violations.empty()) {
    std::cerr << parsed.violations.size() << " violation(s)\n";
    return kExitSpecError;
  }
  std::cout << "ok\n";
  return 0;
}

int do_run(const std::string& path, std::size_t jobs,
           const std::string& out_override) {
  supercm::ParsedExperiment parsed;
  try {
    parsed = supercm::load_experiment(path);
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << "\n";
    return kExitSpecError;
  }
  if (!parsed.violations.empty()) {
    for (const std::string& violation : parsed.violations) {
      std::cerr << violation << "\n";
    }
    return kExitSpecError;
  }
  if (!out_override.empty()) {
    parsed.spec.output_dir = out_override;
  }
  try {
    const supercm::ExperimentOutcome outcome =
        supercm::run_experiment(parsed.spec, jobs, &std::cout);
    if (outcome.exit_code != 0) {
      for (const supercm::RunSummary& r : outcome.runs) {
        if (!r.ok) {
          std::cerr << "run failed: " << supercm::run_dir_name(r.point)
                    << ": " << r.error << "\n";
        }
      }
      return kExitRunFailure;
    }
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << "\n";
    return kExitRunFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SuperCM: semi-supervised training with a clustering module"};
  app.require_subcommand(1);

  std::string run_spec;
  std::size_t jobs = 1;
  std::string out_override;
  CLI::App* run_cmd =
      app.add_subcommand("run", "execute every sweep point of an experiment");
  run_cmd->add_option("spec", run_spec, "experiment file")->required();
  run_cmd->add_option("--jobs", jobs, "parallel training runs")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_override, "override the output directory");

  std::string validate_spec_path;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "check an experiment file and list every violation");
  validate_cmd->add_option("spec", validate_spec_path, "experiment file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (validate_cmd->parsed()) {
    return do_validate(validate_spec_path);
  }
  return do_run(run_spec, jobs, out_override);
}
