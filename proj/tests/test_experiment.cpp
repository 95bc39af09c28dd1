#include "doctest.h"

#include <filesystem>
#include <string>

#include "supercm/experiment.hpp"
#include "supercm/io.hpp"

using namespace supercm;
namespace fs = std::filesystem;

namespace {

ExperimentSpec tiny_spec(const std::string& out_dir) {
  ExperimentSpec spec;
  spec.dataset.n = 40;
  spec.dataset.seed = 5;
  spec.model.hidden = {4};
  spec.model.embedding_dim = 2;
  spec.model.num_clusters = 2;
  spec.train.iterations = 6;
  spec.train.decay_at = 5;
  spec.train.labels_per_class = 3;
  spec.train.n_labeled = 4;
  spec.train.n_unlabeled = 4;
  spec.train.eval_every = 2;
  spec.output_dir = out_dir;
  return spec;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("an empty sweep expands to the single configured run") {
  ExperimentSpec spec;
  spec.train.beta = static_cast<real>(1.5);
  spec.train.delta = static_cast<real>(0.25);
  spec.train.labels_per_class = 4;
  spec.train.seed = 9;
  const std::vector<RunPoint> points = expand_sweep(spec);
  REQUIRE(points.size() == 1);
  CHECK(points[0].beta == real(1.5));
  CHECK(points[0].delta == real(0.25));
  CHECK(points[0].labels_per_class == 4);
  CHECK(points[0].seed == 9);
}

TEST_CASE("sweep lists expand as a cross product, seeds innermost") {
  ExperimentSpec spec;
  spec.sweep.beta = {0, real(0.5), 1, 10, 100};
  spec.sweep.seeds = {1, 2, 3, 4, 5};
  const std::vector<RunPoint> points = expand_sweep(spec);
  REQUIRE(points.size() == 25);
  CHECK(points[0].beta == 0);
  CHECK(points[0].seed == 1);
  CHECK(points[4].beta == 0);
  CHECK(points[4].seed == 5);
  CHECK(points[5].beta == real(0.5));
  CHECK(points[5].seed == 1);
  CHECK(points[24].beta == 100);
  CHECK(points[24].seed == 5);
  for (const RunPoint& p : points) {
    CHECK(p.delta == spec.train.delta);
    CHECK(p.labels_per_class == spec.train.labels_per_class);
  }
}

TEST_CASE("run directories name every swept value") {
  CHECK(run_dir_name({real(0.5), 0, 3, 7}) == "run_beta0.5_delta0_lpc3_seed7");
  CHECK(run_dir_name({100, real(0.25), 10, 42}) ==
        "run_beta100_delta0.25_lpc10_seed42");
}

TEST_CASE("config_for_point overrides exactly the swept fields") {
  TrainConfig base;
  base.lr = static_cast<real>(0.01);
  base.iterations = 77;
  const TrainConfig derived =
      config_for_point(base, {2, real(0.5), 6, 11});
  CHECK(derived.beta == 2);
  CHECK(derived.delta == real(0.5));
  CHECK(derived.labels_per_class == 6);
  CHECK(derived.seed == 11);
  CHECK(derived.lr == real(0.01));
  CHECK(derived.iterations == 77);
}

TEST_CASE("aggregate keeps completed runs in order and drops failures") {
  std::vector<RunSummary> rows(3);
  rows[0].point = {1, 0, 3, 1};
  rows[0].ok = true;
  rows[0].final_test_acc = static_cast<real>(0.5);
  rows[1].point = {1, 0, 3, 2};
  rows[1].ok = false;
  rows[1].error = "exploded";
  rows[2].point = {2, 0, 3, 1};
  rows[2].ok = true;
  rows[2].final_test_acc = static_cast<real>(0.75);
  const std::string csv = aggregate_csv(rows);
  CHECK(csv ==
        "beta,delta,labels_per_class,seed,final_test_acc,best_val_acc\n"
        "1,0,3,1,0.5,0\n"
        "2,0,3,1,0.75,0\n");
}

TEST_CASE("a sweep writes a full artifact tree") {
  const fs::path root = fs::temp_directory_path() / "supercm_exp_artifacts";
  fs::remove_all(root);
  ExperimentSpec spec = tiny_spec(root.string());
  spec.sweep.beta = {0, 1};
  spec.sweep.seeds = {1, 2};
  REQUIRE(validate_spec(spec).empty());

  const ExperimentOutcome outcome = run_experiment(spec, 1, nullptr);
  CHECK(outcome.exit_code == 0);
  REQUIRE(outcome.runs.size() == 4);
  for (const RunSummary& r : outcome.runs) {
    CHECK(r.ok);
    CHECK(r.error.empty());
  }

  for (const RunPoint& p : expand_sweep(spec)) {
    const fs::path dir = root / run_dir_name(p);
    CHECK(fs::exists(dir / "run.csv"));
    CHECK(fs::exists(dir / "evals.csv"));
    CHECK(fs::exists(dir / "summary.txt"));
    CHECK(fs::exists(dir / "features.csv"));
    CHECK(fs::exists(dir / "model.txt"));
    CHECK(fs::exists(dir / "grid.csv"));
    CHECK_FALSE(fs::exists(dir / "failure.txt"));
  }

  const std::string aggregate =
      read_text_file((root / "aggregate.csv").string());
  CHECK(count_lines(aggregate) == 5);  // header + 4 runs
  CHECK(aggregate.find(
            "beta,delta,labels_per_class,seed,final_test_acc,best_val_acc\n") ==
        0);

  const fs::path first = root / run_dir_name({0, 0, 3, 1});
  const std::string run = read_text_file((first / "run.csv").string());
  CHECK(count_lines(run) == 7);  // header + 6 iterations
  const std::string evals = read_text_file((first / "evals.csv").string());
  CHECK(count_lines(evals) == 4);  // evaluations at 2, 4, 6 plus the header

  const std::string summary =
      read_text_file((first / "summary.txt").string());
  CHECK(summary.find("final_test_acc=") != std::string::npos);
  CHECK(summary.find("beta=0\n") != std::string::npos);
  CHECK(summary.find("generator=two_moons\n") != std::string::npos);
  CHECK(summary.find("labels_per_class=3\n") != std::string::npos);

  const std::string features =
      read_text_file((first / "features.csv").string());
  CHECK(count_lines(features) == 41);  // header + 40 samples
  std::size_t flagged = 0;
  std::size_t pos = 0;
  while ((pos = features.find("train,1\n", pos)) != std::string::npos) {
    ++flagged;
    pos += 1;
  }
  CHECK(flagged == 6);  // 3 labeled per class

  const std::string grid = read_text_file((first / "grid.csv").string());
  CHECK(count_lines(grid) == 201 * 201 + 1);

  // the checkpoint reloads into a usable model
  const Models reloaded = load_models((first / "model.txt").string());
  CHECK(reloaded.backbone.layers.size() == 2);
  CHECK(reloaded.cm.num_clusters() == 2);

  fs::remove_all(root);
}

TEST_CASE("experiment outputs are byte-stable across reruns and jobs") {
  const fs::path root = fs::temp_directory_path() / "supercm_exp_stable";
  fs::remove_all(root);
  ExperimentSpec spec = tiny_spec(root.string());
  spec.sweep.seeds = {1, 2, 3};

  run_experiment(spec, 1, nullptr);
  const std::string aggregate_a =
      read_text_file((root / "aggregate.csv").string());
  const fs::path probe = root / run_dir_name({1, 0, 3, 2});
  const std::string run_a = read_text_file((probe / "run.csv").string());
  const std::string model_a = read_text_file((probe / "model.txt").string());

  fs::remove_all(root);
  run_experiment(spec, 2, nullptr);
  CHECK(read_text_file((root / "aggregate.csv").string()) == aggregate_a);
  CHECK(read_text_file((probe / "run.csv").string()) == run_a);
  CHECK(read_text_file((probe / "model.txt").string()) == model_a);

  fs::remove_all(root);
}

TEST_CASE("a diverging run is reported, recorded, and isolated") {
  const fs::path root = fs::temp_directory_path() / "supercm_exp_failure";
  fs::remove_all(root);
  ExperimentSpec spec = tiny_spec(root.string());
  spec.train.lr = static_cast<real>(1e155);
  spec.train.iterations = 20;
  spec.train.decay_at = 20;

  const ExperimentOutcome outcome = run_experiment(spec, 1, nullptr);
  CHECK(outcome.exit_code == 3);
  REQUIRE(outcome.runs.size() == 1);
  CHECK_FALSE(outcome.runs[0].ok);
  CHECK(outcome.runs[0].error.find("non-finite") != std::string::npos);

  const fs::path dir = root / run_dir_name(expand_sweep(spec)[0]);
  CHECK(fs::exists(dir / "failure.txt"));
  const std::string aggregate =
      read_text_file((root / "aggregate.csv").string());
  CHECK(count_lines(aggregate) == 1);  // header only

  fs::remove_all(root);
}
