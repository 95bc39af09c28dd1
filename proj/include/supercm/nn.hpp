#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "supercm/matrix.hpp"
#include "supercm/scalar.hpp"

namespace supercm {

// Row-wise softmax, stabilized by subtracting the row maximum. Every output
// row is non-negative and sums to 1.
DenseMatrix softmax_rows(const DenseMatrix& logits);

// Reverse-mode step through softmax_rows: given probs = softmax_rows(logits)
// and an upstream gradient w.r.t. probs, returns the gradient w.r.t. logits.
DenseMatrix softmax_backward(const DenseMatrix& probs,
                             const DenseMatrix& upstream);

// Mean over rows of -log(probs[i, labels[i]]), probabilities clamped below at
// kLogClamp.
real cross_entropy(const DenseMatrix& probs, const std::vector<int>& labels);

// Gradient of cross_entropy w.r.t. probs (zero where the clamp is active).
DenseMatrix cross_entropy_grad(const DenseMatrix& probs,
                               const std::vector<int>& labels);

// output = input * weights + bias (bias is 1 x out, broadcast over rows).
DenseMatrix linear_forward(const DenseMatrix& input, const DenseMatrix& weights,
                           const DenseMatrix& bias);

struct LinearGrads {
  DenseMatrix d_input;
  DenseMatrix d_weights;
  DenseMatrix d_bias;  // 1 x out
};

LinearGrads linear_backward(const DenseMatrix& input,
                            const DenseMatrix& weights,
                            const DenseMatrix& d_output);

// Adam over a fixed list of parameter tensors; one shared step counter,
// per-tensor moment buffers.
struct AdamState {
  std::vector<DenseMatrix> first_moment;
  std::vector<DenseMatrix> second_moment;
  std::uint64_t step = 0;
  real beta1 = static_cast<real>(0.9);
  real beta2 = static_cast<real>(0.999);
  real epsilon = static_cast<real>(1e-8);

  static AdamState for_params(const std::vector<const DenseMatrix*>& params);
};

// Bias-corrected Adam update applied to all tensors; increments state.step by
// exactly 1. params and grads must shape-match the state buffers.
void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<DenseMatrix>& grads, AdamState& state,
               real lr);

// Single-tensor convenience wrapper (state must hold exactly one buffer pair).
void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state,
               real lr);

// Central-difference gradient oracle: (f(x+h*e) - f(x-h*e)) / (2h) per
// coordinate. Throws NumericError if f returns a non-finite value.
DenseMatrix finite_diff_grad(const std::function<real(const DenseMatrix&)>& f,
                             const DenseMatrix& at,
                             real h = static_cast<real>(1e-5));

}  // namespace supercm
