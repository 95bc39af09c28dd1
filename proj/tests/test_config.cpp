#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "supercm/config.hpp"
#include "supercm/errors.hpp"

using namespace supercm;

namespace {

bool mentions(const std::vector<std::string>& violations,
              const std::string& needle) {
  for (const std::string& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a full experiment file parses into an ExperimentSpec") {
  const std::string text = R"(
# clustering-regularized ssl on moons
output_dir sweeps/moons
dataset {
  generator two_moons
  seed 13
  n 400
  noise_sd 0.15
}
split {
  labels_per_class 5
  train_fraction 0.5
  validation_fraction 0.25
}
model {
  hidden [8, 8]
  activation tanh
  embedding_dim 3
  clusters 2
}
train {
  beta 2
  delta 0.25
  lr 0.001
  iterations 500
  decay_at 400
  decay_factor 0.2
  n_labeled 12
  n_unlabeled 48
  swa_start_fraction 0.75
  augment_sd 0.05
  seed 3
  eval_every 25
  eq2_mode literal
  alpha [1, 1.25]
  ssl {
    method pseudo_label
    pl_threshold 0.9
  }
}
sweep {
  beta [0.5 1 2]
  seeds [1, 2, 3]
}
)";
  const ParsedExperiment parsed = parse_experiment_text(text);
  CHECK(parsed.violations.empty());
  const ExperimentSpec& spec = parsed.spec;
  CHECK(spec.output_dir == "sweeps/moons");
  CHECK(spec.dataset.generator == "two_moons");
  CHECK(spec.dataset.seed == 13);
  CHECK(spec.dataset.n == 400);
  CHECK(spec.dataset.noise_sd == doctest::Approx(0.15));
  CHECK(spec.dataset.fractions.train == doctest::Approx(0.5));
  CHECK(spec.dataset.fractions.validation == doctest::Approx(0.25));
  CHECK(spec.train.labels_per_class == 5);
  CHECK(spec.model.hidden == std::vector<std::size_t>{8, 8});
  CHECK(spec.model.activation == Activation::kTanh);
  CHECK(spec.model.embedding_dim == 3);
  CHECK(spec.model.num_clusters == 2);
  CHECK(spec.train.beta == doctest::Approx(2));
  CHECK(spec.train.delta == doctest::Approx(0.25));
  CHECK(spec.train.lr == doctest::Approx(0.001));
  CHECK(spec.train.iterations == 500);
  CHECK(spec.train.decay_at == 400);
  CHECK(spec.train.decay_factor == doctest::Approx(0.2));
  CHECK(spec.train.n_labeled == 12);
  CHECK(spec.train.n_unlabeled == 48);
  CHECK(spec.train.swa_start_fraction == doctest::Approx(0.75));
  CHECK(spec.train.augment_sd == doctest::Approx(0.05));
  CHECK(spec.train.seed == 3);
  CHECK(spec.train.eval_every == 25);
  CHECK(spec.train.eq2_mode == Eq2Mode::kLiteral);
  REQUIRE(spec.train.alpha.size() == 2);
  CHECK(spec.train.alpha[1] == doctest::Approx(1.25));
  CHECK(spec.train.ssl.method == SslMethod::kPseudoLabel);
  CHECK(spec.train.ssl.pl_threshold == doctest::Approx(0.9));
  CHECK(spec.sweep.beta == std::vector<real>{real(0.5), real(1), real(2)});
  CHECK(spec.sweep.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(spec.sweep.delta.empty());
}

TEST_CASE("an empty file yields the runnable defaults") {
  const ParsedExperiment parsed = parse_experiment_text("");
  CHECK(parsed.violations.empty());
  CHECK(parsed.spec.dataset.generator == "two_moons");
  CHECK(parsed.spec.dataset.n == 1600);
  CHECK(parsed.spec.output_dir == "runs");
  CHECK(parsed.spec.sweep.beta.empty());
}

TEST_CASE("comments run to the end of the line") {
  const ParsedExperiment parsed = parse_experiment_text(
      "# header\ndataset { n 100 } # trailing\n# done\n");
  CHECK(parsed.violations.empty());
  CHECK(parsed.spec.dataset.n == 100);
}

TEST_CASE("a positive delta without a base model is flagged") {
  const ParsedExperiment parsed =
      parse_experiment_text("train { delta 0.5 }");
  CHECK(mentions(parsed.violations, "train.delta"));
  CHECK(mentions(parsed.violations, "train.ssl.method"));

  // the same rule applies when only the sweep makes delta positive
  const ParsedExperiment swept =
      parse_experiment_text("sweep { delta [0, 0.5] }");
  CHECK(mentions(swept.violations, "train.ssl.method"));

  // naming a base model resolves it
  const ParsedExperiment fixed = parse_experiment_text(
      "train { delta 0.5 ssl { method vat vat_epsilon 0.5 } }");
  CHECK(fixed.violations.empty());
  CHECK(fixed.spec.train.ssl.method == SslMethod::kVat);
  CHECK(fixed.spec.train.ssl.vat_epsilon == doctest::Approx(0.5));
}

TEST_CASE("label budgets are checked against the split arithmetic") {
  // 20 samples -> 10 per class -> 6 in train
  const ParsedExperiment parsed = parse_experiment_text(
      "dataset { n 20 } split { labels_per_class 7 }");
  CHECK(mentions(parsed.violations, "exceeds the per-class train population"));
  CHECK(mentions(parsed.violations, "(6)"));

  const ParsedExperiment ok = parse_experiment_text(
      "dataset { n 20 } split { labels_per_class 6 }");
  CHECK(ok.violations.empty());

  const ParsedExperiment swept = parse_experiment_text(
      "dataset { n 20 } sweep { labels_per_class [2, 9] }");
  CHECK(mentions(swept.violations, "sweep.labels_per_class"));
}

TEST_CASE("unknown keys carry their line number") {
  const ParsedExperiment parsed = parse_experiment_text(
      "train {\n  lr 0.01\n  warmup 5\n}\n");
  REQUIRE(parsed.violations.size() == 1);
  CHECK(parsed.violations[0].find("line 3:") == 0);
  CHECK(mentions(parsed.violations, "warmup"));
}

TEST_CASE("grammar failures throw instead of accumulating") {
  CHECK_THROWS_AS(parse_experiment_text("train {"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_text("beta"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_text("} train { }"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_text("train { beta [1, 2 }"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_text("train { beta }"), ConfigError);
}

TEST_CASE("list commas are optional") {
  const ParsedExperiment parsed =
      parse_experiment_text("sweep { beta [0.5 1 2] seeds [4 5] }");
  CHECK(parsed.spec.sweep.beta.size() == 3);
  CHECK(parsed.spec.sweep.seeds == std::vector<std::uint64_t>{4, 5});
}

TEST_CASE("an empty sweep list is rejected") {
  const ParsedExperiment parsed = parse_experiment_text("sweep { beta [] }");
  CHECK(mentions(parsed.violations, "sweep list 'beta' must not be empty"));
}

TEST_CASE("malformed numbers keep the default and are reported") {
  const ParsedExperiment parsed =
      parse_experiment_text("train { lr banana iterations -5 }");
  CHECK(mentions(parsed.violations, "'banana' is not a number"));
  CHECK(mentions(parsed.violations, "'-5' is not a non-negative integer"));
  CHECK(parsed.spec.train.lr == doctest::Approx(3e-3));
  CHECK(parsed.spec.train.iterations == 1000);
}

TEST_CASE("model clusters must match the dataset classes") {
  const ParsedExperiment parsed = parse_experiment_text(
      "dataset { generator gaussian_blobs clusters 4 } model { clusters 2 }");
  CHECK(mentions(parsed.violations, "model.clusters"));

  const ParsedExperiment ok = parse_experiment_text(
      "dataset { generator gaussian_blobs clusters 4 } model { clusters 4 }");
  CHECK(ok.violations.empty());
}

TEST_CASE("range violations are collected together") {
  const ParsedExperiment parsed = parse_experiment_text(
      "train { lr 0 decay_at 2000 ssl { pl_threshold 1.5 } } "
      "model { hidden [] embedding_dim 0 }");
  CHECK(mentions(parsed.violations, "train.lr must be > 0"));
  CHECK(mentions(parsed.violations,
                 "train.decay_at must be <= train.iterations"));
  CHECK(mentions(parsed.violations, "train.ssl.pl_threshold"));
  CHECK(mentions(parsed.violations, "model.hidden must list >= 1 width"));
  CHECK(mentions(parsed.violations, "model.embedding_dim must be >= 1"));
}

TEST_CASE("alpha entries below one are rejected") {
  const ParsedExperiment parsed =
      parse_experiment_text("train { alpha [0.5] }");
  CHECK(mentions(parsed.violations, "train.alpha entries must be >= 1"));
  const ParsedExperiment wide =
      parse_experiment_text("train { alpha [1, 1, 1] }");  // 3 vs 2 clusters
  CHECK(mentions(wide.violations, "one value per cluster"));
}

TEST_CASE("validate_spec works on programmatically built specs") {
  ExperimentSpec spec;
  CHECK(validate_spec(spec).empty());
  spec.train.lr = 0;
  spec.output_dir = "";
  const std::vector<std::string> v = validate_spec(spec);
  CHECK(mentions(v, "train.lr"));
  CHECK(mentions(v, "output_dir"));
}

TEST_CASE("load_experiment reads files and reports missing ones") {
  CHECK_THROWS_AS(load_experiment("no/such/file.cfg"), IoError);

  const char* path = "config_probe.cfg";
  {
    std::ofstream out(path);
    out << "dataset { n 64 }\n";
  }
  const ParsedExperiment parsed = load_experiment(path);
  CHECK(parsed.spec.dataset.n == 64);
  CHECK(parsed.violations.empty());
  std::remove(path);
}

TEST_CASE("build_dataset follows the generator choice") {
  DatasetSpec ds;
  ds.n = 100;
  ds.seed = 5;
  const Dataset moons = build_dataset(ds);
  CHECK(moons.size() == 100);
  CHECK(moons.num_classes() == 2);

  ds.generator = "gaussian_blobs";
  ds.blobs_k = 3;
  ds.blobs_n_per = 20;
  const Dataset blobs = build_dataset(ds);
  CHECK(blobs.size() == 60);
  CHECK(blobs.num_classes() == 3);

  ds.generator = "mystery";
  CHECK_THROWS_AS(build_dataset(ds), ArgumentError);

  // same seed, same bytes
  DatasetSpec again;
  again.n = 100;
  again.seed = 5;
  CHECK(build_dataset(again).features == moons.features);
}
