#pragma once

#include <string>
#include <vector>

#include "supercm/matrix.hpp"
#include "supercm/rng.hpp"

namespace supercm {

enum class Split { kTrain, kValidation, kTest };

std::string split_name(Split s);

struct SplitFractions {
  real train = static_cast<real>(0.6);
  real validation = static_cast<real>(0.2);
  // test takes the remainder
};

struct Dataset {
  DenseMatrix features;      // N x d_in raw inputs
  std::vector<int> labels;   // class index per sample
  std::vector<Split> split;  // per-sample split tag

  std::size_t size() const { return features.rows; }
  int num_classes() const;
  std::vector<std::size_t> indices_of(Split s) const;
};

// Deterministic per-class split counts for n samples of one class under the
// given fractions: floor for train and validation, remainder to test. Shared
// by the split assignment and by config validation.
struct ClassSplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};
ClassSplitCounts class_split_counts(std::size_t class_size,
                                    const SplitFractions& fractions);

// Stratified split assignment: shuffles each class's indices and tags them
// train/validation/test per class_split_counts.
void assign_splits(Dataset& ds, const SplitFractions& fractions, Rng& rng);

// Interleaved half-circles with isotropic Gaussian noise. Class 0 is the unit
// upper half-circle at the origin; class 1 is the unit lower half-circle
// shifted by (1, 0.5), so it dips to y = -0.5. Angles are evenly spaced, n/2
// points per moon.
Dataset two_moons(std::size_t n, real noise_sd, Rng& rng,
                  const SplitFractions& fractions = {});

// Isotropic Gaussian blobs around explicit centers (one class per center row).
Dataset gaussian_blobs_at(const DenseMatrix& centers, std::size_t n_per,
                          real cluster_sd, Rng& rng,
                          const SplitFractions& fractions = {});

// Centers drawn uniformly in [-center_scale, center_scale]^d; the drawn
// centers are reported through centers_out when non-null.
Dataset gaussian_blobs(std::size_t k, std::size_t n_per, std::size_t d,
                       real center_scale, real cluster_sd, Rng& rng,
                       const SplitFractions& fractions = {},
                       DenseMatrix* centers_out = nullptr);

struct LabeledSplit {
  std::vector<std::size_t> labeled;    // exactly labels_per_class per class
  std::vector<std::size_t> unlabeled;  // remaining train samples
};

// Draws the labeled pool from the train split only, without replacement,
// exactly labels_per_class per class; every other train sample becomes
// unlabeled.
LabeledSplit split_labeled(const Dataset& ds, std::size_t labels_per_class,
                           Rng& rng);

struct Batch {
  DenseMatrix labeled_features;    // n_l x d_in
  std::vector<int> labeled_labels;
  DenseMatrix unlabeled_features;  // n_u x d_in (may have zero rows)
};

// Samples with replacement from both pools and applies additive Gaussian
// noise of std augment_sd to both parts (0 disables).
Batch sample_batch(const Dataset& ds, const std::vector<std::size_t>& labeled,
                   const std::vector<std::size_t>& unlabeled, std::size_t n_l,
                   std::size_t n_u, real augment_sd, Rng& rng);

struct SplitView {
  DenseMatrix features;
  std::vector<int> labels;
};

SplitView gather_split(const Dataset& ds, Split s);

}  // namespace supercm
