#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "supercm/errors.hpp"
#include "supercm/mlp.hpp"

using namespace supercm;

namespace {

MlpState single_identity_layer() {
  MlpState state;
  state.activation = Activation::kRelu;
  MlpLayer layer;
  layer.weights = DenseMatrix::from_rows({{1, 0}, {0, 1}});
  layer.bias = DenseMatrix(1, 2);
  state.layers.push_back(layer);
  return state;
}

}  // namespace

TEST_CASE("init_mlp produces chained shapes with bounded weights") {
  Rng rng(2);
  const MlpState state = init_mlp(3, {5, 4}, 2, Activation::kRelu, rng);
  REQUIRE(state.layers.size() == 3);
  CHECK(state.layers[0].weights.rows == 3);
  CHECK(state.layers[0].weights.cols == 5);
  CHECK(state.layers[1].weights.rows == 5);
  CHECK(state.layers[1].weights.cols == 4);
  CHECK(state.layers[2].weights.rows == 4);
  CHECK(state.layers[2].weights.cols == 2);
  CHECK(state.input_dim() == 3);
  CHECK(state.output_dim() == 2);
  for (const MlpLayer& layer : state.layers) {
    const real bound = 1 / std::sqrt(static_cast<real>(layer.weights.rows));
    for (real w : layer.weights.data) {
      CHECK(std::fabs(w) <= bound);
    }
    CHECK(layer.bias == DenseMatrix(1, layer.weights.cols));
  }
}

TEST_CASE("single identity layer passes inputs through") {
  const MlpState state = single_identity_layer();
  const DenseMatrix x = DenseMatrix::from_rows({{-1, 2}, {3, -4}});
  // one layer = the linear embedding layer: no activation applied
  CHECK(mlp_forward(x, state).features == x);
}

TEST_CASE("1-2-1 tanh network against a hand calculation") {
  MlpState state;
  state.activation = Activation::kTanh;
  MlpLayer h;
  h.weights = DenseMatrix::from_rows({{0.5, -1.0}});
  h.bias = DenseMatrix::from_rows({{0.1, 0.2}});
  MlpLayer out;
  out.weights = DenseMatrix::from_rows({{2.0}, {-3.0}});
  out.bias = DenseMatrix::from_rows({{0.25}});
  state.layers = {h, out};

  const real x = 0.8;
  const real h0 = std::tanh(0.5 * x + 0.1);
  const real h1 = std::tanh(-1.0 * x + 0.2);
  const real y = 2.0 * h0 - 3.0 * h1 + 0.25;

  const MlpForward fwd =
      mlp_forward(DenseMatrix::from_rows({{x}}), state);
  CHECK(fwd.features(0, 0) == doctest::Approx(y).epsilon(1e-12));
}

TEST_CASE("relu zeroes all-negative hidden pre-activations") {
  MlpState state;
  state.activation = Activation::kRelu;
  MlpLayer h;
  h.weights = DenseMatrix::from_rows({{1.0, 1.0}});
  h.bias = DenseMatrix::from_rows({{-100.0, -100.0}});
  MlpLayer out;
  out.weights = DenseMatrix::from_rows({{5.0}, {7.0}});
  out.bias = DenseMatrix::from_rows({{0.5}});
  state.layers = {h, out};
  const MlpForward fwd =
      mlp_forward(DenseMatrix::from_rows({{1.0}, {2.0}}), state);
  // hidden is clamped to zero, so only the output bias survives
  CHECK(fwd.features(0, 0) == 0.5);
  CHECK(fwd.features(1, 0) == 0.5);
}

TEST_CASE("identity net, sum loss: input gradient is all ones") {
  const MlpState state = single_identity_layer();
  const DenseMatrix x = DenseMatrix::from_rows({{1, 2}, {3, 4}});
  const MlpForward fwd = mlp_forward(x, state);
  const MlpGrads grads =
      mlp_backward(DenseMatrix(2, 2, 1), fwd.cache, state);
  CHECK(grads.d_input == DenseMatrix(2, 2, 1));
}

TEST_CASE("zero upstream gradient gives all-zero parameter gradients") {
  Rng rng(5);
  const MlpState state = init_mlp(3, {4}, 2, Activation::kTanh, rng);
  const DenseMatrix x = random_uniform(5, 3, -1, 1, rng);
  const MlpForward fwd = mlp_forward(x, state);
  const MlpGrads grads = mlp_backward(DenseMatrix(5, 2), fwd.cache, state);
  for (const MlpLayer& layer : grads.layers) {
    CHECK(layer.weights == DenseMatrix(layer.weights.rows, layer.weights.cols));
    CHECK(layer.bias == DenseMatrix(1, layer.bias.cols));
  }
  CHECK(grads.d_input == DenseMatrix(5, 3));
}

TEST_CASE("mlp_backward matches finite differences for both activations") {
  for (Activation activation : {Activation::kRelu, Activation::kTanh}) {
    CAPTURE(static_cast<int>(activation));
    Rng rng(activation == Activation::kRelu ? 100 : 200);
    for (int trial = 0; trial < 5; ++trial) {
      MlpState state = init_mlp(3, {6, 5}, 2, activation, rng);
      const DenseMatrix x = random_uniform(4, 3, -1, 1, rng);
      const DenseMatrix upstream = random_uniform(4, 2, -1, 1, rng);

      auto objective = [&](const MlpState& s, const DenseMatrix& input) {
        const DenseMatrix y = mlp_forward(input, s).features;
        real sum = 0;
        for (std::size_t i = 0; i < y.data.size(); ++i) {
          sum += upstream.data[i] * y.data[i];
        }
        return sum;
      };

      const MlpForward fwd = mlp_forward(x, state);
      const MlpGrads grads = mlp_backward(upstream, fwd.cache, state);

      CHECK(oracles::compare_grads(
                grads.d_input,
                finite_diff_grad(
                    [&](const DenseMatrix& xx) { return objective(state, xx); },
                    x))
                .pass);
      for (std::size_t l = 0; l < state.layers.size(); ++l) {
        MlpState probe = state;
        CHECK(oracles::compare_grads(
                  grads.layers[l].weights,
                  finite_diff_grad(
                      [&](const DenseMatrix& w) {
                        probe.layers[l].weights = w;
                        return objective(probe, x);
                      },
                      state.layers[l].weights))
                  .pass);
        CHECK(oracles::compare_grads(
                  grads.layers[l].bias,
                  finite_diff_grad(
                      [&](const DenseMatrix& b) {
                        probe.layers[l].bias = b;
                        return objective(probe, x);
                      },
                      state.layers[l].bias))
                  .pass);
      }
    }
  }
}

TEST_CASE("mlp_backward rejects a mismatched cache") {
  Rng rng(6);
  const MlpState state = init_mlp(2, {3}, 2, Activation::kRelu, rng);
  const MlpState other = init_mlp(2, {4}, 2, Activation::kRelu, rng);
  const DenseMatrix x = random_uniform(3, 2, -1, 1, rng);
  const MlpForward fwd = mlp_forward(x, state);
  CHECK_THROWS_AS(mlp_backward(DenseMatrix(3, 2), fwd.cache, other),
                  ContractError);
}

TEST_CASE("forward is deterministic") {
  Rng rng(44);
  const MlpState state = init_mlp(2, {8}, 3, Activation::kRelu, rng);
  const DenseMatrix x = random_uniform(6, 2, -2, 2, rng);
  CHECK(mlp_forward(x, state).features == mlp_forward(x, state).features);
}
