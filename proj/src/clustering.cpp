#include "supercm/clustering.hpp"

#include <cmath>
#include <string>

#include "supercm/errors.hpp"
#include "supercm/nn.hpp"

namespace supercm {

ClusteringModuleState init_clustering_module(std::size_t feature_dim,
                                             std::size_t num_clusters,
                                             Rng& rng) {
  if (feature_dim == 0 || num_clusters == 0) {
    throw ArgumentError("init_clustering_module: zero dimension");
  }
  ClusteringModuleState state;
  const real bound =
      static_cast<real>(1.0) / std::sqrt(static_cast<real>(feature_dim));
  state.weights = random_uniform(feature_dim, num_clusters, -bound, bound, rng);
  state.bias = DenseMatrix(1, num_clusters);
  state.centroids = DenseMatrix(num_clusters, feature_dim);
  state.ma_counter = 0;
  return state;
}

DenseMatrix encode(const DenseMatrix& features,
                   const ClusteringModuleState& state) {
  if (features.cols != state.feature_dim()) {
    throw ShapeError("encode: features " + shape_string(features) +
                     " vs encoder " + shape_string(state.weights));
  }
  return softmax_rows(linear_forward(features, state.weights, state.bias));
}

DenseMatrix reconstruct(const DenseMatrix& responsibilities,
                        const DenseMatrix& centroids) {
  if (responsibilities.cols != centroids.rows) {
    throw ShapeError("reconstruct: responsibilities " +
                     shape_string(responsibilities) + " vs centroids " +
                     shape_string(centroids));
  }
  return matmul(responsibilities, centroids);
}

static void check_cm_shapes(const DenseMatrix& features,
                            const DenseMatrix& responsibilities,
                            const DenseMatrix& centroids,
                            const std::vector<real>& alpha) {
  if (features.rows == 0) {
    throw ArgumentError("cm_loss: empty batch");
  }
  if (responsibilities.rows != features.rows ||
      responsibilities.cols != centroids.rows ||
      centroids.cols != features.cols) {
    throw ShapeError("cm_loss: features " + shape_string(features) +
                     ", responsibilities " + shape_string(responsibilities) +
                     ", centroids " + shape_string(centroids));
  }
  if (alpha.size() != centroids.rows) {
    throw ShapeError("cm_loss: alpha size " + std::to_string(alpha.size()) +
                     " vs " + std::to_string(centroids.rows) + " clusters");
  }
  for (real a : alpha) {
    if (a < 1) {
      throw ArgumentError("cm_loss: alpha entries must be >= 1");
    }
  }
}

// Batch mean of each responsibility column.
static std::vector<real> column_means(const DenseMatrix& gamma) {
  std::vector<real> mean(gamma.cols, 0);
  for (std::size_t i = 0; i < gamma.rows; ++i) {
    const real* g = gamma.row(i);
    for (std::size_t k = 0; k < gamma.cols; ++k) mean[k] += g[k];
  }
  for (real& m : mean) m /= static_cast<real>(gamma.rows);
  return mean;
}

CMLossBreakdown cm_loss(const DenseMatrix& features,
                        const DenseMatrix& responsibilities,
                        const DenseMatrix& reconstructions,
                        const DenseMatrix& centroids,
                        const std::vector<real>& alpha) {
  check_cm_shapes(features, responsibilities, centroids, alpha);
  require_same_shape(features, reconstructions, "cm_loss");
  const std::size_t n = features.rows;
  const std::size_t k_clusters = centroids.rows;
  const real inv_n = static_cast<real>(1.0) / static_cast<real>(n);

  CMLossBreakdown out;
  for (std::size_t i = 0; i < n; ++i) {
    out.reconstruction += squared_distance_rows(features, i, reconstructions, i);
  }
  out.reconstruction *= inv_n;

  // Gram matrix of the centroids; diagonal feeds the variance penalty, the
  // off-diagonal the cross-centroid term.
  DenseMatrix gram = matmul_a_bt(centroids, centroids);
  for (std::size_t i = 0; i < n; ++i) {
    const real* g = responsibilities.row(i);
    for (std::size_t k = 0; k < k_clusters; ++k) {
      out.variance_penalty += g[k] * (1 - g[k]) * gram(k, k);
      for (std::size_t l = 0; l < k_clusters; ++l) {
        if (l == k) continue;
        out.cross_centroid -= g[k] * g[l] * gram(k, l);
      }
    }
  }
  out.variance_penalty *= inv_n;
  out.cross_centroid *= inv_n;

  const std::vector<real> usage = column_means(responsibilities);
  for (std::size_t k = 0; k < k_clusters; ++k) {
    out.dirichlet +=
        (1 - alpha[k]) * std::log(std::max(usage[k], kLogClamp));
  }
  out.dirichlet *= inv_n;

  out.total = out.reconstruction + out.variance_penalty + out.cross_centroid +
              out.dirichlet;
  return out;
}

DenseMatrix cm_loss_gamma_grad(const DenseMatrix& features,
                               const DenseMatrix& responsibilities,
                               const DenseMatrix& centroids,
                               const std::vector<real>& alpha) {
  check_cm_shapes(features, responsibilities, centroids, alpha);
  const std::size_t n = features.rows;
  const std::size_t k_clusters = centroids.rows;
  const real inv_n = static_cast<real>(1.0) / static_cast<real>(n);

  const DenseMatrix recon = reconstruct(responsibilities, centroids);
  const DenseMatrix gram = matmul_a_bt(centroids, centroids);
  // gamma * gram gives, per (i, k), the sum over l of g_il mu_k . mu_l.
  const DenseMatrix gamma_gram = matmul(responsibilities, gram);
  const std::vector<real> usage = column_means(responsibilities);

  DenseMatrix grad(n, k_clusters);
  for (std::size_t i = 0; i < n; ++i) {
    const real* g = responsibilities.row(i);
    real* out = grad.row(i);
    for (std::size_t k = 0; k < k_clusters; ++k) {
      // reconstruction: d/dg_ik |x_i - sum_l g_il mu_l|^2 = -2 (x_i-xbar_i).mu_k
      real dot = 0;
      for (std::size_t j = 0; j < features.cols; ++j) {
        dot += (features(i, j) - recon(i, j)) * centroids(k, j);
      }
      real d = -2 * dot;
      // variance penalty
      d += (1 - 2 * g[k]) * gram(k, k);
      // cross-centroid (each unordered pair appears twice in the double sum)
      d -= 2 * (gamma_gram(i, k) - g[k] * gram(k, k));
      out[k] = d * inv_n;
      // Dirichlet: flows through the batch usage mean; frozen when clamped.
      if (usage[k] > kLogClamp) {
        out[k] += (1 - alpha[k]) * inv_n * inv_n / usage[k];
      }
    }
  }
  return grad;
}

CmGradients cm_loss_grads(const DenseMatrix& features,
                          const DenseMatrix& responsibilities,
                          const ClusteringModuleState& state,
                          const std::vector<real>& alpha) {
  const DenseMatrix recon = reconstruct(responsibilities, state.centroids);
  CmGradients out;
  out.loss = cm_loss(features, responsibilities, recon, state.centroids, alpha);

  const DenseMatrix gamma_grad =
      cm_loss_gamma_grad(features, responsibilities, state.centroids, alpha);
  const DenseMatrix logit_grad = softmax_backward(responsibilities, gamma_grad);
  LinearGrads lin = linear_backward(features, state.weights, logit_grad);
  out.d_weights = std::move(lin.d_weights);
  out.d_bias = std::move(lin.d_bias);

  // Direct path of the reconstruction term plus the path through the encoder.
  out.d_features = std::move(lin.d_input);
  const real scale = static_cast<real>(2.0) / static_cast<real>(features.rows);
  for (std::size_t i = 0; i < features.data.size(); ++i) {
    out.d_features.data[i] += scale * (features.data[i] - recon.data[i]);
  }
  return out;
}

CmGradients cm_loss_grads(const DenseMatrix& features,
                          const ClusteringModuleState& state,
                          const std::vector<real>& alpha) {
  return cm_loss_grads(features, encode(features, state), state, alpha);
}

void update_centroids(ClusteringModuleState& state,
                      const DenseMatrix& labeled_features,
                      const std::vector<int>& labels, Eq2Mode mode) {
  const std::size_t n = labeled_features.rows;
  const std::size_t k_clusters = state.num_clusters();
  if (n == 0) {
    throw ArgumentError("update_centroids: empty labeled batch");
  }
  if (labeled_features.cols != state.feature_dim() || labels.size() != n) {
    throw ShapeError("update_centroids: features " +
                     shape_string(labeled_features) + " with " +
                     std::to_string(labels.size()) + " labels vs state d=" +
                     std::to_string(state.feature_dim()));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k_clusters) {
      throw IndexError("update_centroids: label " + std::to_string(y) +
                       " out of [0, " + std::to_string(k_clusters) + ")");
    }
  }

  DenseMatrix class_sum(k_clusters, state.feature_dim());
  std::vector<std::size_t> class_count(k_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(labels[i]);
    class_count[k] += 1;
    const real* x = labeled_features.row(i);
    real* s = class_sum.row(k);
    for (std::size_t j = 0; j < labeled_features.cols; ++j) s[j] += x[j];
  }

  state.ma_counter += 1;
  const real t = static_cast<real>(state.ma_counter);
  for (std::size_t k = 0; k < k_clusters; ++k) {
    if (class_count[k] == 0) continue;  // absent classes keep their centroid
    const real denom = mode == Eq2Mode::kClassMean
                           ? static_cast<real>(class_count[k])
                           : static_cast<real>(n);
    real* mu = state.centroids.row(k);
    const real* s = class_sum.row(k);
    for (std::size_t j = 0; j < state.feature_dim(); ++j) {
      mu[j] = (t - 1) / t * mu[j] + s[j] / (t * denom);
    }
  }
}

std::vector<real> uniform_alpha(std::size_t num_clusters, real value) {
  return std::vector<real>(num_clusters, value);
}

}  // namespace supercm
