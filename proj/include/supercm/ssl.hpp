#pragma once

#include <functional>

#include "supercm/matrix.hpp"
#include "supercm/rng.hpp"

namespace supercm {

enum class SslMethod { kNone, kPseudoLabel, kVat };

struct SslLossConfig {
  SslMethod method = SslMethod::kNone;
  real pl_threshold = static_cast<real>(0.95);  // confidence cutoff tau
  real vat_epsilon = static_cast<real>(1.0);    // perturbation radius
  real vat_xi = static_cast<real>(1e-6);        // power-iteration probe scale
  std::size_t vat_power_iters = 1;
};

// Mean KL(p_i || q_i) over rows, logs clamped at kLogClamp.
real kl_divergence_rows(const DenseMatrix& p, const DenseMatrix& q);

// Gradient of kl_divergence_rows w.r.t. q (p treated as constant; zero where
// the clamp on q is active).
DenseMatrix kl_divergence_rows_grad_q(const DenseMatrix& p,
                                      const DenseMatrix& q);

// Entropy-minimization loss: rows whose top probability reaches the threshold
// contribute cross-entropy against their argmax class (ties toward the lowest
// index); mean over the selected rows, 0 when none qualify.
real pseudo_label_loss(const DenseMatrix& probs, const SslLossConfig& config);

// Sum over selected rows instead of the mean; monotonically non-increasing in
// the threshold.
real pseudo_label_loss_sum(const DenseMatrix& probs,
                           const SslLossConfig& config);

struct PseudoLabelGrads {
  real loss = 0;
  DenseMatrix d_probs;  // zero on unselected rows
};

// Gradient of the mean-form loss; the argmax choice and row selection are
// treated as constants.
PseudoLabelGrads pseudo_label_loss_grads(const DenseMatrix& probs,
                                         const SslLossConfig& config);

// Differentiable map from raw inputs to class probabilities. input_grad is the
// vector-Jacobian product: given upstream gradients w.r.t. the probabilities,
// it returns gradients w.r.t. the inputs.
struct DifferentiableModel {
  std::function<DenseMatrix(const DenseMatrix&)> forward;
  std::function<DenseMatrix(const DenseMatrix&, const DenseMatrix&)> input_grad;
};

struct VatResult {
  real loss = 0;
  DenseMatrix perturbation;  // N x d, every row has L2 norm vat_epsilon
};

// Virtual adversarial loss: estimates the most sensitive input direction per
// sample by power iteration (gradient of KL(p(x) || p(x + xi r)) w.r.t. r via
// the model's VJP), scales it to radius epsilon, and returns the mean
// KL(p(x) || p(x + r_adv)) with p(x) treated as a constant.
VatResult vat_loss(const DenseMatrix& inputs, const DifferentiableModel& model,
                   const SslLossConfig& config, Rng& rng);

}  // namespace supercm
