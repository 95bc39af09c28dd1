#pragma once

#include <cstdint>
#include <vector>

#include "supercm/clustering.hpp"
#include "supercm/data.hpp"
#include "supercm/mlp.hpp"
#include "supercm/nn.hpp"
#include "supercm/ssl.hpp"

namespace supercm {

struct ModelArch {
  std::vector<std::size_t> hidden{10, 10, 10};
  Activation activation = Activation::kRelu;
  std::size_t embedding_dim = 2;
  std::size_t num_clusters = 2;
};

// Everything a single run depends on. With beta = delta = 0 the loop reduces
// exactly to supervised cross-entropy training.
struct TrainConfig {
  real beta = 1;                // weight of the clustering loss
  real delta = 0;               // weight of the SSL base-model loss
  std::vector<real> alpha;      // Dirichlet concentrations; empty = all ones
  real lr = static_cast<real>(3e-3);
  std::size_t iterations = 1000;
  std::size_t decay_at = 800;   // lr *= decay_factor after this many steps
  real decay_factor = static_cast<real>(0.1);
  std::size_t n_labeled = 10;   // labeled samples per batch
  std::size_t n_unlabeled = 90; // unlabeled samples per batch
  std::size_t labels_per_class = 3;
  real swa_start_fraction = static_cast<real>(0.8);
  SslLossConfig ssl;
  Eq2Mode eq2_mode = Eq2Mode::kClassMean;
  real augment_sd = 0;          // Gaussian noise added to batch inputs
  std::uint64_t seed = 1;
  std::size_t eval_every = 0;   // 0 = max(iterations / 50, 1)
};

struct Models {
  MlpState backbone;
  ClusteringModuleState cm;

  bool operator==(const Models&) const = default;
};

// Backbone first (weights then bias per layer), then encoder weights and
// bias. Centroids are excluded: they are never updated by gradients.
std::vector<DenseMatrix*> trainable_params(Models& models);
std::vector<const DenseMatrix*> trainable_params(const Models& models);

Models init_models(std::size_t input_dim, const ModelArch& arch, Rng& rng);

struct IterationLog {
  std::size_t iter = 0;
  real ce = 0;
  real cm_recon = 0;
  real cm_var = 0;
  real cm_cross = 0;
  real cm_dirichlet = 0;
  real ssl = 0;
  real total = 0;  // ce + beta * cm total + delta * ssl
  real lr = 0;
};

struct EvalLog {
  std::size_t iter = 0;
  Split split = Split::kValidation;
  real accuracy = 0;
};

struct RunRecord {
  std::vector<IterationLog> iterations;
  std::vector<EvalLog> evaluations;
  real best_val_acc = 0;
  std::size_t best_val_iter = 0;
  real final_val_acc = 0;   // averaged weights
  real final_test_acc = 0;  // averaged weights
};

// Running average over late-training snapshots; sums are kept so that the
// mean of k snapshots is their exact arithmetic mean.
struct SwaAccumulator {
  Models sum;
  std::size_t count = 0;

  void add(const Models& models);
  Models average() const;  // ContractError when nothing was accumulated
};

struct TrainerState {
  Models models;
  AdamState opt;
  real lr = 0;
  std::size_t iter = 0;  // completed steps
};

TrainerState init_trainer(std::size_t input_dim, const ModelArch& arch,
                          const TrainConfig& config, Rng& init_rng);

// One combined-loss step: forward both batch parts through the backbone,
// moving-average centroid update from the labeled features, clustering-module
// forward over the concatenation, CE + beta * CM + delta * SSL, backprop into
// encoder and backbone only, Adam update. Throws NumericError when the loss
// is non-finite.
IterationLog train_step(TrainerState& state, const Batch& batch,
                        const TrainConfig& config, Rng& ssl_rng);

// Argmax over responsibilities; cluster index is the class index. Ties go to
// the lowest index.
std::vector<int> predict(const Models& models, const DenseMatrix& inputs);
real evaluate(const Models& models, const DenseMatrix& inputs,
              const std::vector<int>& labels);

struct TrainResult {
  RunRecord record;
  Models final_models;  // last-iterate weights
  Models swa_models;    // averaged weights (evaluation model)
  LabeledSplit pools;
};

// Full run: labeled/unlabeled pooling, initialization, the iteration loop
// with one-shot lr decay, periodic validation, weight averaging over the
// final (1 - swa_start_fraction) span, and the final evaluations.
TrainResult train(const Dataset& ds, const ModelArch& arch,
                  const TrainConfig& config);

}  // namespace supercm
