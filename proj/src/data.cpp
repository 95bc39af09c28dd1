#include "supercm/data.hpp"

#include <algorithm>
#include <cmath>

#include "supercm/errors.hpp"

namespace supercm {

std::string split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

int Dataset::num_classes() const {
  int k = 0;
  for (int y : labels) k = std::max(k, y + 1);
  return k;
}

std::vector<std::size_t> Dataset::indices_of(Split s) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) idx.push_back(i);
  }
  return idx;
}

ClassSplitCounts class_split_counts(std::size_t class_size,
                                    const SplitFractions& fractions) {
  ClassSplitCounts c;
  c.train = static_cast<std::size_t>(
      std::floor(static_cast<real>(class_size) * fractions.train));
  c.validation = static_cast<std::size_t>(
      std::floor(static_cast<real>(class_size) * fractions.validation));
  if (c.train + c.validation > class_size) {
    c.validation = class_size - c.train;
  }
  c.test = class_size - c.train - c.validation;
  return c;
}

static void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.index(i)]);
  }
}

void assign_splits(Dataset& ds, const SplitFractions& fractions, Rng& rng) {
  if (fractions.train < 0 || fractions.validation < 0 ||
      fractions.train + fractions.validation > 1) {
    throw ArgumentError("assign_splits: fractions out of range");
  }
  ds.split.assign(ds.size(), Split::kTest);
  const int k = ds.num_classes();
  for (int c = 0; c < k; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] == c) idx.push_back(i);
    }
    shuffle_indices(idx, rng);
    const ClassSplitCounts counts = class_split_counts(idx.size(), fractions);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ds.split[idx[i]] = i < counts.train ? Split::kTrain
                         : i < counts.train + counts.validation
                             ? Split::kValidation
                             : Split::kTest;
    }
  }
}

Dataset two_moons(std::size_t n, real noise_sd, Rng& rng,
                  const SplitFractions& fractions) {
  if (n < 2 || n % 2 != 0) {
    throw ArgumentError("two_moons: n must be even and >= 2");
  }
  const std::size_t per_moon = n / 2;
  Dataset ds;
  ds.features = DenseMatrix(n, 2);
  ds.labels.resize(n);
  constexpr real kPi = static_cast<real>(3.14159265358979323846);
  for (std::size_t i = 0; i < per_moon; ++i) {
    const real t = per_moon == 1
                       ? 0
                       : kPi * static_cast<real>(i) /
                             static_cast<real>(per_moon - 1);
    // upper half-circle
    ds.features(i, 0) = std::cos(t);
    ds.features(i, 1) = std::sin(t);
    ds.labels[i] = 0;
    // lower half-circle shifted by (1, 0.5)
    ds.features(per_moon + i, 0) = 1 - std::cos(t);
    ds.features(per_moon + i, 1) = static_cast<real>(0.5) - std::sin(t);
    ds.labels[per_moon + i] = 1;
  }
  if (noise_sd > 0) {
    for (real& v : ds.features.data) v += noise_sd * rng.normal();
  }
  assign_splits(ds, fractions, rng);
  return ds;
}

Dataset gaussian_blobs_at(const DenseMatrix& centers, std::size_t n_per,
                          real cluster_sd, Rng& rng,
                          const SplitFractions& fractions) {
  if (centers.rows < 1 || n_per < 1) {
    throw ArgumentError("gaussian_blobs_at: need >= 1 center and n_per >= 1");
  }
  Dataset ds;
  ds.features = DenseMatrix(centers.rows * n_per, centers.cols);
  ds.labels.resize(ds.features.rows);
  std::size_t row = 0;
  for (std::size_t k = 0; k < centers.rows; ++k) {
    for (std::size_t s = 0; s < n_per; ++s, ++row) {
      real* x = ds.features.row(row);
      const real* c = centers.row(k);
      for (std::size_t j = 0; j < centers.cols; ++j) {
        x[j] = c[j] + cluster_sd * rng.normal();
      }
      ds.labels[row] = static_cast<int>(k);
    }
  }
  assign_splits(ds, fractions, rng);
  return ds;
}

Dataset gaussian_blobs(std::size_t k, std::size_t n_per, std::size_t d,
                       real center_scale, real cluster_sd, Rng& rng,
                       const SplitFractions& fractions,
                       DenseMatrix* centers_out) {
  if (k < 2) {
    throw ArgumentError("gaussian_blobs: need >= 2 clusters");
  }
  DenseMatrix centers =
      random_uniform(k, d, -center_scale, center_scale, rng);
  if (centers_out) *centers_out = centers;
  return gaussian_blobs_at(centers, n_per, cluster_sd, rng, fractions);
}

LabeledSplit split_labeled(const Dataset& ds, std::size_t labels_per_class,
                           Rng& rng) {
  if (labels_per_class == 0) {
    throw ArgumentError("split_labeled: labels_per_class must be >= 1");
  }
  const int k = ds.num_classes();
  std::vector<std::vector<std::size_t>> per_class(
      static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.split[i] == Split::kTrain) {
      per_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }
  }
  LabeledSplit out;
  for (int c = 0; c < k; ++c) {
    auto& idx = per_class[static_cast<std::size_t>(c)];
    if (idx.size() < labels_per_class) {
      throw ArgumentError("split_labeled: class " + std::to_string(c) +
                          " has " + std::to_string(idx.size()) +
                          " train samples, need " +
                          std::to_string(labels_per_class));
    }
    shuffle_indices(idx, rng);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < labels_per_class ? out.labeled : out.unlabeled).push_back(idx[i]);
    }
  }
  std::sort(out.labeled.begin(), out.labeled.end());
  std::sort(out.unlabeled.begin(), out.unlabeled.end());
  return out;
}

static DenseMatrix gather_rows(const DenseMatrix& src,
                               const std::vector<std::size_t>& rows) {
  DenseMatrix out(rows.size(), src.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const real* s = src.row(rows[i]);
    std::copy(s, s + src.cols, out.row(i));
  }
  return out;
}

Batch sample_batch(const Dataset& ds, const std::vector<std::size_t>& labeled,
                   const std::vector<std::size_t>& unlabeled, std::size_t n_l,
                   std::size_t n_u, real augment_sd, Rng& rng) {
  if (labeled.empty()) {
    throw ContractError("sample_batch: empty labeled pool");
  }
  if (n_l == 0) {
    throw ArgumentError("sample_batch: n_l must be >= 1");
  }
  if (n_u > 0 && unlabeled.empty()) {
    throw ContractError("sample_batch: empty unlabeled pool with n_u > 0");
  }
  Batch batch;
  std::vector<std::size_t> pick(n_l);
  batch.labeled_labels.resize(n_l);
  for (std::size_t i = 0; i < n_l; ++i) {
    pick[i] = labeled[rng.index(labeled.size())];
    batch.labeled_labels[i] = ds.labels[pick[i]];
  }
  batch.labeled_features = gather_rows(ds.features, pick);
  pick.resize(n_u);
  for (std::size_t i = 0; i < n_u; ++i) {
    pick[i] = unlabeled[rng.index(unlabeled.size())];
  }
  batch.unlabeled_features = gather_rows(ds.features, pick);
  if (augment_sd > 0) {
    for (real& v : batch.labeled_features.data) v += augment_sd * rng.normal();
    for (real& v : batch.unlabeled_features.data) {
      v += augment_sd * rng.normal();
    }
  }
  return batch;
}

SplitView gather_split(const Dataset& ds, Split s) {
  const std::vector<std::size_t> idx = ds.indices_of(s);
  SplitView view;
  view.features = gather_rows(ds.features, idx);
  view.labels.reserve(idx.size());
  for (std::size_t i : idx) view.labels.push_back(ds.labels[i]);
  return view;
}

}  // namespace supercm
