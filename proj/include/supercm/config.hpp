#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "supercm/data.hpp"
#include "supercm/errors.hpp"
#include "supercm/trainer.hpp"

namespace supercm {

// Grammar-level failure while reading an experiment file. The message starts
// with "line N:" when a source line is known.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  std::string generator = "two_moons";  // or "gaussian_blobs"
  std::uint64_t seed = 7;
  SplitFractions fractions;
  // two_moons
  std::size_t n = 1600;
  real noise_sd = static_cast<real>(0.1);
  // gaussian_blobs
  std::size_t blobs_k = 4;
  std::size_t blobs_n_per = 100;
  std::size_t blobs_d = 2;
  real center_scale = 10;
  real cluster_sd = static_cast<real>(0.5);
};

// Class count implied by the generator parameters.
std::size_t dataset_num_classes(const DatasetSpec& ds);
// Samples per class before splitting.
std::size_t dataset_class_size(const DatasetSpec& ds);

Dataset build_dataset(const DatasetSpec& ds);

// Empty lists mean "not swept": the train block's single value is used.
struct SweepSpec {
  std::vector<real> beta;
  std::vector<real> delta;
  std::vector<std::size_t> labels_per_class;
  std::vector<std::uint64_t> seeds;
};

struct ExperimentSpec {
  DatasetSpec dataset;
  ModelArch model;
  TrainConfig train;
  SweepSpec sweep;
  std::string output_dir = "runs";
};

struct ParsedExperiment {
  ExperimentSpec spec;
  // Line-anchored schema and invariant problems; empty means runnable.
  std::vector<std::string> violations;
};

// Parses the nested key-value format:
//   - `key value` scalar entries, `key [v1, v2]` lists, `key { ... }` blocks
//   - `#` starts a comment to end of line; commas in lists are optional
// Throws ConfigError on grammar failures (unbalanced braces, missing values);
// anything recoverable (unknown key, bad number, out-of-range setting) is
// collected into `violations` instead so a single pass reports everything.
ParsedExperiment parse_experiment_text(const std::string& text);

// Reads and parses a file; unreadable file raises IoError.
ParsedExperiment load_experiment(const std::string& path);

// Semantic checks on an already-built spec (value ranges, cross-field rules
// like delta > 0 with ssl.method none). parse_experiment_text already calls
// this; exposed for programmatically built specs.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

}  // namespace supercm
