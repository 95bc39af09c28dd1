#pragma once

#include <cstdint>
#include <vector>

#include "supercm/matrix.hpp"
#include "supercm/rng.hpp"

namespace supercm {

// One-layer clustering autoencoder: a linear encoder with softmax produces
// cluster responsibilities, the decoder weights are the centroids. Centroids
// are never trained by gradient descent; they follow a moving average of
// labeled features (see update_centroids).
struct ClusteringModuleState {
  DenseMatrix weights;    // d x K encoder weights
  DenseMatrix bias;       // 1 x K encoder bias
  DenseMatrix centroids;  // K x d
  std::uint64_t ma_counter = 0;

  std::size_t num_clusters() const { return weights.cols; }
  std::size_t feature_dim() const { return weights.rows; }

  bool operator==(const ClusteringModuleState&) const = default;
};

// Encoder weights uniform in [-1/sqrt(d), 1/sqrt(d)], bias zero, centroids
// zero (the first moving-average update overwrites them entirely).
ClusteringModuleState init_clustering_module(std::size_t feature_dim,
                                             std::size_t num_clusters,
                                             Rng& rng);

// Responsibilities: softmax over the encoder's affine map, one row per sample.
DenseMatrix encode(const DenseMatrix& features,
                   const ClusteringModuleState& state);

// Decoder: each output row is the responsibility-weighted combination of
// centroids, so it lies in their convex hull.
DenseMatrix reconstruct(const DenseMatrix& responsibilities,
                        const DenseMatrix& centroids);

// The four summands of the clustering loss, each already carrying its 1/N
// factor and sign; total is their sum.
struct CMLossBreakdown {
  real reconstruction = 0;    // mean squared reconstruction error
  real variance_penalty = 0;  // responsibility-spread penalty on centroid norms
  real cross_centroid = 0;    // negative cross-centroid interaction
  real dirichlet = 0;         // cluster-usage prior, zero when alpha is 1
  real total = 0;
};

// Clustering loss over a batch:
//   (1/N) [ sum_i |x_i - xbar_i|^2
//         + sum_{i,k} g_ik (1 - g_ik) |mu_k|^2
//         - sum_i sum_{k != l} g_ik g_il mu_k . mu_l
//         + sum_k (1 - alpha_k) log gtilde_k ]
// with gtilde_k the batch mean of column k of gamma, clamped at kLogClamp
// before the log. alpha must have one entry >= 1 per cluster.
CMLossBreakdown cm_loss(const DenseMatrix& features,
                        const DenseMatrix& responsibilities,
                        const DenseMatrix& reconstructions,
                        const DenseMatrix& centroids,
                        const std::vector<real>& alpha);

// Gradient of cm_loss total w.r.t. the responsibilities, holding the centroids
// fixed and treating reconstructions as gamma * centroids. This is the
// pre-softmax-chain gradient; exposed for the finite-difference suite.
DenseMatrix cm_loss_gamma_grad(const DenseMatrix& features,
                               const DenseMatrix& responsibilities,
                               const DenseMatrix& centroids,
                               const std::vector<real>& alpha);

// Gradients of the clustering loss w.r.t. the encoder inputs and parameters.
// The centroids receive no gradient by construction: they appear only as
// constants and are deliberately absent from this struct.
struct CmGradients {
  CMLossBreakdown loss;
  DenseMatrix d_features;  // N x d; direct path plus the path through gamma
  DenseMatrix d_weights;   // d x K
  DenseMatrix d_bias;      // 1 x K
};

// Overload taking precomputed responsibilities; they must equal
// encode(features, state).
CmGradients cm_loss_grads(const DenseMatrix& features,
                          const DenseMatrix& responsibilities,
                          const ClusteringModuleState& state,
                          const std::vector<real>& alpha);

CmGradients cm_loss_grads(const DenseMatrix& features,
                          const ClusteringModuleState& state,
                          const std::vector<real>& alpha);

enum class Eq2Mode {
  kClassMean,  // divide class sums by the per-class count in the batch
  kLiteral,    // divide class sums by the whole labeled batch size
};

// Moving-average centroid update from labeled features. Increments the
// counter t once per call; for each class present in the batch,
//   mu_k <- ((t-1)/t) mu_k + (1/t) m_k
// where m_k is the batch statistic under the selected mode. Classes absent
// from the batch keep their previous centroid.
void update_centroids(ClusteringModuleState& state,
                      const DenseMatrix& labeled_features,
                      const std::vector<int>& labels,
                      Eq2Mode mode = Eq2Mode::kClassMean);

// alpha = 1 for every cluster; zeroes the Dirichlet term.
std::vector<real> uniform_alpha(std::size_t num_clusters, real value = 1);

}  // namespace supercm
