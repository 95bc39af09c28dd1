#pragma once

#include <cstdint>
#include <vector>

#include "supercm/clustering.hpp"
#include "supercm/mlp.hpp"

namespace supercm {

// counts(true class, predicted cluster)
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::int64_t> counts;  // k x k, row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k_) : k(k_), counts(k_ * k_, 0) {}

  std::int64_t& at(std::size_t true_class, std::size_t pred) {
    return counts[true_class * k + pred];
  }
  std::int64_t at(std::size_t true_class, std::size_t pred) const {
    return counts[true_class * k + pred];
  }
  std::int64_t total() const;
};

ConfusionMatrix confusion_from_predictions(const std::vector<int>& labels,
                                           const std::vector<int>& predictions,
                                           std::size_t k);

struct MatchedAccuracy {
  real accuracy = 0;
  std::vector<std::size_t> cluster_to_class;  // permutation, one class per cluster
};

// Optimal cluster-to-class assignment by the Hungarian algorithm (max trace
// over permutations); works for any k.
MatchedAccuracy hungarian_match_accuracy(const ConfusionMatrix& confusion);

// Same objective by exhaustive permutation search; the built-in oracle,
// limited to k <= 8.
MatchedAccuracy exhaustive_match_accuracy(const ConfusionMatrix& confusion);

struct GridPoint {
  real x = 0;
  real y = 0;
  int pred = 0;
  real confidence = 0;  // max responsibility
};

// Evaluates argmax responsibility over a regular resolution x resolution
// lattice covering [x_lo, x_hi] x [y_lo, y_hi] (inclusive endpoints; points
// ordered x-major). Requires a 2-D input model.
std::vector<GridPoint> decision_grid(const MlpState& backbone,
                                     const ClusteringModuleState& cm,
                                     real x_lo, real x_hi, real y_lo, real y_hi,
                                     std::size_t resolution);

}  // namespace supercm
