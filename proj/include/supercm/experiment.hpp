#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "supercm/config.hpp"

namespace supercm {

// One cell of the sweep grid; runs are independent trainings.
struct RunPoint {
  real beta = 0;
  real delta = 0;
  std::size_t labels_per_class = 0;
  std::uint64_t seed = 0;
};

// Cross product of the sweep lists (beta-major, seed-minor); absent lists
// collapse to the train block's single value. Never empty.
std::vector<RunPoint> expand_sweep(const ExperimentSpec& spec);

// "run_beta<b>_delta<d>_lpc<l>_seed<s>" with %g-formatted reals.
std::string run_dir_name(const RunPoint& point);

TrainConfig config_for_point(const TrainConfig& base, const RunPoint& point);

struct RunSummary {
  RunPoint point;
  bool ok = false;
  real final_test_acc = 0;
  real best_val_acc = 0;
  std::string error;  // non-empty when !ok
};

// Header: beta,delta,labels_per_class,seed,final_test_acc,best_val_acc
// One row per completed run, sweep-expansion order.
std::string aggregate_csv(const std::vector<RunSummary>& rows);

// Trains one sweep point and writes its artifact directory: run.csv,
// evals.csv, summary.txt, features.csv, model.txt, and grid.csv for 2-D
// inputs. A non-finite loss is reported through the summary instead of
// propagating.
RunSummary execute_run(const Dataset& ds, const ExperimentSpec& spec,
                       const RunPoint& point, const std::string& dir);

struct ExperimentOutcome {
  std::vector<RunSummary> runs;
  int exit_code = 0;  // 0 all runs completed; 3 when any run failed
};

// Builds the dataset once, executes every sweep point (in `jobs` worker
// threads when jobs > 1), and writes <output_dir>/aggregate.csv. Outputs are
// byte-identical across re-runs and thread counts. `log` (optional) receives
// one progress line per run.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t jobs,
                                 std::ostream* log);

}  // namespace supercm
