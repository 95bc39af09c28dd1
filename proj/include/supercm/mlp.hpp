#pragma once

#include <vector>

#include "supercm/matrix.hpp"
#include "supercm/nn.hpp"
#include "supercm/rng.hpp"

namespace supercm {

enum class Activation { kRelu, kTanh };

struct MlpLayer {
  DenseMatrix weights;  // in x out
  DenseMatrix bias;     // 1 x out

  bool operator==(const MlpLayer&) const = default;
};

// Feed-forward backbone mapping raw inputs to embedding features. The
// activation is applied after every layer except the last, which stays linear
// and produces the embedding.
struct MlpState {
  std::vector<MlpLayer> layers;
  Activation activation = Activation::kRelu;

  std::size_t input_dim() const { return layers.front().weights.rows; }
  std::size_t output_dim() const { return layers.back().weights.cols; }

  bool operator==(const MlpState&) const = default;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
// widths = hidden widths; the embedding layer is appended after them.
MlpState init_mlp(std::size_t input_dim, const std::vector<std::size_t>& widths,
                  std::size_t embedding_dim, Activation activation, Rng& rng);

struct MlpCache {
  DenseMatrix input;
  std::vector<DenseMatrix> pre;   // pre-activation per layer
  std::vector<DenseMatrix> post;  // post-activation per layer; back() = output
};

struct MlpForward {
  DenseMatrix features;
  MlpCache cache;
};

MlpForward mlp_forward(const DenseMatrix& inputs, const MlpState& state);

struct MlpGrads {
  std::vector<MlpLayer> layers;  // (d_weights, d_bias) per layer
  DenseMatrix d_input;
};

// Exact reverse-mode gradients of mlp_forward. The cache must come from a
// forward call against a structurally identical state; mismatches raise
// ContractError.
MlpGrads mlp_backward(const DenseMatrix& d_features, const MlpCache& cache,
                      const MlpState& state);

}  // namespace supercm
