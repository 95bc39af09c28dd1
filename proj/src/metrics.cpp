#include "supercm/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "supercm/errors.hpp"

namespace supercm {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion_from_predictions(const std::vector<int>& labels,
                                           const std::vector<int>& predictions,
                                           std::size_t k) {
  if (labels.size() != predictions.size()) {
    throw ShapeError("confusion_from_predictions: size mismatch");
  }
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k || p < 0 ||
        static_cast<std::size_t>(p) >= k) {
      throw IndexError("confusion_from_predictions: entry out of range");
    }
    cm.at(static_cast<std::size_t>(y), static_cast<std::size_t>(p)) += 1;
  }
  return cm;
}

static void check_square(const ConfusionMatrix& confusion) {
  if (confusion.k == 0 || confusion.counts.size() != confusion.k * confusion.k) {
    throw ShapeError("match_accuracy: confusion matrix must be square");
  }
}

static MatchedAccuracy finish(const ConfusionMatrix& confusion,
                              std::vector<std::size_t> cluster_to_class) {
  MatchedAccuracy out;
  std::int64_t matched = 0;
  for (std::size_t c = 0; c < confusion.k; ++c) {
    matched += confusion.at(cluster_to_class[c], c);
  }
  const std::int64_t total = confusion.total();
  out.accuracy = total == 0 ? 0
                            : static_cast<real>(matched) /
                                  static_cast<real>(total);
  out.cluster_to_class = std::move(cluster_to_class);
  return out;
}

// Jonker-style shortest augmenting path assignment on a cost matrix (minimize),
// 1-based with a dummy row/column 0.
static std::vector<std::size_t> min_cost_assignment(
    const std::vector<double>& cost, std::size_t n) {
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

MatchedAccuracy hungarian_match_accuracy(const ConfusionMatrix& confusion) {
  check_square(confusion);
  const std::size_t n = confusion.k;
  // maximize matched counts == minimize negated counts
  std::vector<double> cost(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      cost[r * n + c] = -static_cast<double>(confusion.at(r, c));
    }
  }
  // column j (cluster) gets row (class) row_of_col[j]
  return finish(confusion, min_cost_assignment(cost, n));
}

MatchedAccuracy exhaustive_match_accuracy(const ConfusionMatrix& confusion) {
  check_square(confusion);
  if (confusion.k > 8) {
    throw ArgumentError(
        "exhaustive_match_accuracy: limited to k <= 8, use the Hungarian "
        "solver");
  }
  std::vector<std::size_t> perm(confusion.k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  std::int64_t best_matched = -1;
  do {
    std::int64_t matched = 0;
    for (std::size_t c = 0; c < confusion.k; ++c) {
      matched += confusion.at(perm[c], c);
    }
    if (matched > best_matched) {
      best_matched = matched;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return finish(confusion, best);
}

std::vector<GridPoint> decision_grid(const MlpState& backbone,
                                     const ClusteringModuleState& cm,
                                     real x_lo, real x_hi, real y_lo, real y_hi,
                                     std::size_t resolution) {
  if (backbone.input_dim() != 2) {
    throw ArgumentError("decision_grid: model input must be 2-D");
  }
  if (resolution == 0) {
    throw ArgumentError("decision_grid: resolution must be >= 1");
  }
  const real sx = resolution > 1
                      ? (x_hi - x_lo) / static_cast<real>(resolution - 1)
                      : 0;
  const real sy = resolution > 1
                      ? (y_hi - y_lo) / static_cast<real>(resolution - 1)
                      : 0;
  DenseMatrix points(resolution * resolution, 2);
  std::size_t row = 0;
  for (std::size_t ix = 0; ix < resolution; ++ix) {
    for (std::size_t iy = 0; iy < resolution; ++iy, ++row) {
      points(row, 0) = x_lo + sx * static_cast<real>(ix);
      points(row, 1) = y_lo + sy * static_cast<real>(iy);
    }
  }
  const DenseMatrix gamma = encode(mlp_forward(points, backbone).features, cm);
  std::vector<GridPoint> grid(points.rows);
  for (std::size_t i = 0; i < points.rows; ++i) {
    GridPoint& g = grid[i];
    g.x = points(i, 0);
    g.y = points(i, 1);
    const real* p = gamma.row(i);
    g.pred = 0;
    g.confidence = p[0];
    for (std::size_t k = 1; k < gamma.cols; ++k) {
      if (p[k] > g.confidence) {
        g.confidence = p[k];
        g.pred = static_cast<int>(k);
      }
    }
  }
  return grid;
}

}  // namespace supercm
