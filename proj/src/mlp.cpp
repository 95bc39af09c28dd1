#include "supercm/mlp.hpp"

#include <cmath>

#include "supercm/errors.hpp"

namespace supercm {

MlpState init_mlp(std::size_t input_dim, const std::vector<std::size_t>& widths,
                  std::size_t embedding_dim, Activation activation, Rng& rng) {
  if (input_dim == 0 || embedding_dim == 0) {
    throw ArgumentError("init_mlp: zero input or embedding dimension");
  }
  MlpState state;
  state.activation = activation;
  std::size_t in = input_dim;
  std::vector<std::size_t> outs = widths;
  outs.push_back(embedding_dim);
  for (std::size_t out : outs) {
    if (out == 0) throw ArgumentError("init_mlp: zero layer width");
    const real bound =
        static_cast<real>(1.0) / std::sqrt(static_cast<real>(in));
    MlpLayer layer;
    layer.weights = random_uniform(in, out, -bound, bound, rng);
    layer.bias = DenseMatrix(1, out);
    state.layers.push_back(std::move(layer));
    in = out;
  }
  return state;
}

static real activate(real x, Activation a) {
  return a == Activation::kRelu ? (x > 0 ? x : 0) : std::tanh(x);
}

MlpForward mlp_forward(const DenseMatrix& inputs, const MlpState& state) {
  if (state.layers.empty()) {
    throw ContractError("mlp_forward: state has no layers");
  }
  if (inputs.cols != state.input_dim()) {
    throw ShapeError("mlp_forward: input " + shape_string(inputs) +
                     " vs first layer " +
                     shape_string(state.layers.front().weights));
  }
  MlpForward fwd;
  fwd.cache.input = inputs;
  const DenseMatrix* cur = &fwd.cache.input;
  const std::size_t last = state.layers.size() - 1;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    DenseMatrix pre =
        linear_forward(*cur, state.layers[l].weights, state.layers[l].bias);
    DenseMatrix post = pre;
    if (l != last) {
      for (real& v : post.data) v = activate(v, state.activation);
    }
    fwd.cache.pre.push_back(std::move(pre));
    fwd.cache.post.push_back(std::move(post));
    cur = &fwd.cache.post.back();
  }
  fwd.features = fwd.cache.post.back();
  return fwd;
}

MlpGrads mlp_backward(const DenseMatrix& d_features, const MlpCache& cache,
                      const MlpState& state) {
  const std::size_t n_layers = state.layers.size();
  if (cache.pre.size() != n_layers || cache.post.size() != n_layers) {
    throw ContractError("mlp_backward: cache does not match state layout");
  }
  if (cache.input.cols != state.input_dim() ||
      d_features.rows != cache.input.rows ||
      d_features.cols != state.output_dim()) {
    throw ContractError("mlp_backward: cache/gradient shape mismatch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.pre[l].rows != cache.input.rows ||
        cache.pre[l].cols != state.layers[l].weights.cols ||
        !cache.post[l].same_shape(cache.pre[l])) {
      throw ContractError("mlp_backward: cache layer " + std::to_string(l) +
                          " does not match the state");
    }
  }
  MlpGrads grads;
  grads.layers.resize(n_layers);
  DenseMatrix upstream = d_features;  // gradient w.r.t. post[l]
  for (std::size_t l = n_layers; l-- > 0;) {
    if (l != n_layers - 1) {
      // chain through the activation: upstream is w.r.t. post, need pre
      const DenseMatrix& pre = cache.pre[l];
      if (state.activation == Activation::kRelu) {
        for (std::size_t i = 0; i < upstream.data.size(); ++i) {
          if (pre.data[i] <= 0) upstream.data[i] = 0;
        }
      } else {
        const DenseMatrix& post = cache.post[l];
        for (std::size_t i = 0; i < upstream.data.size(); ++i) {
          upstream.data[i] *= 1 - post.data[i] * post.data[i];
        }
      }
    }
    const DenseMatrix& layer_in = l == 0 ? cache.input : cache.post[l - 1];
    LinearGrads lg =
        linear_backward(layer_in, state.layers[l].weights, upstream);
    grads.layers[l].weights = std::move(lg.d_weights);
    grads.layers[l].bias = std::move(lg.d_bias);
    upstream = std::move(lg.d_input);
  }
  grads.d_input = std::move(upstream);
  return grads;
}

}  // namespace supercm
