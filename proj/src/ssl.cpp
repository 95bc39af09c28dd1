#include "supercm/ssl.hpp"

#include <cmath>

#include "supercm/errors.hpp"

namespace supercm {

real kl_divergence_rows(const DenseMatrix& p, const DenseMatrix& q) {
  require_same_shape(p, q, "kl_divergence_rows");
  if (p.empty()) {
    throw ArgumentError("kl_divergence_rows: empty input");
  }
  real sum = 0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const real pi = p.data[i];
    sum += pi * (std::log(std::max(pi, kLogClamp)) -
                 std::log(std::max(q.data[i], kLogClamp)));
  }
  return sum / static_cast<real>(p.rows);
}

DenseMatrix kl_divergence_rows_grad_q(const DenseMatrix& p,
                                      const DenseMatrix& q) {
  require_same_shape(p, q, "kl_divergence_rows_grad_q");
  DenseMatrix grad(q.rows, q.cols);
  const real inv_n = static_cast<real>(1.0) / static_cast<real>(q.rows);
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    if (q.data[i] > kLogClamp) {
      grad.data[i] = -p.data[i] / q.data[i] * inv_n;
    }
  }
  return grad;
}

namespace {

struct RowSelection {
  std::size_t argmax = 0;
  real max_prob = 0;
  bool selected = false;
};

RowSelection select_row(const DenseMatrix& probs, std::size_t i,
                        real threshold) {
  RowSelection sel;
  const real* p = probs.row(i);
  sel.max_prob = p[0];
  for (std::size_t k = 1; k < probs.cols; ++k) {
    if (p[k] > sel.max_prob) {  // strict: ties keep the lowest index
      sel.max_prob = p[k];
      sel.argmax = k;
    }
  }
  sel.selected = sel.max_prob >= threshold;
  return sel;
}

}  // namespace

real pseudo_label_loss_sum(const DenseMatrix& probs,
                           const SslLossConfig& config) {
  if (probs.empty()) return 0;
  real sum = 0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const RowSelection sel = select_row(probs, i, config.pl_threshold);
    if (sel.selected) {
      sum += -std::log(std::max(sel.max_prob, kLogClamp));
    }
  }
  return sum;
}

real pseudo_label_loss(const DenseMatrix& probs, const SslLossConfig& config) {
  return pseudo_label_loss_grads(probs, config).loss;
}

PseudoLabelGrads pseudo_label_loss_grads(const DenseMatrix& probs,
                                         const SslLossConfig& config) {
  PseudoLabelGrads out;
  out.d_probs = DenseMatrix(probs.rows, probs.cols);
  if (probs.empty()) return out;
  std::size_t selected = 0;
  real sum = 0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const RowSelection sel = select_row(probs, i, config.pl_threshold);
    if (!sel.selected) continue;
    selected += 1;
    sum += -std::log(std::max(sel.max_prob, kLogClamp));
    if (sel.max_prob > kLogClamp) {
      out.d_probs(i, sel.argmax) = -1 / sel.max_prob;
    }
  }
  if (selected == 0) return out;  // loss 0, zero gradient
  const real inv_s = static_cast<real>(1.0) / static_cast<real>(selected);
  out.loss = sum * inv_s;
  scale_in_place(out.d_probs, inv_s);
  return out;
}

namespace {

// Scales each row to unit L2 norm. Rows at or below `floor` are left as-is
// and reported through the return value.
bool normalize_rows(DenseMatrix& m, real floor) {
  bool all_ok = true;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const real norm = std::sqrt(row_squared_norm(m, i));
    if (norm <= floor) {
      all_ok = false;
      continue;
    }
    real* r = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) r[j] /= norm;
  }
  return all_ok;
}

DenseMatrix add_scaled(const DenseMatrix& a, real s, const DenseMatrix& b) {
  DenseMatrix out = a;
  axpy_in_place(out, s, b);
  return out;
}

}  // namespace

VatResult vat_loss(const DenseMatrix& inputs, const DifferentiableModel& model,
                   const SslLossConfig& config, Rng& rng) {
  if (inputs.rows == 0) {
    throw ArgumentError("vat_loss: empty input");
  }
  if (config.vat_epsilon <= 0 || config.vat_xi <= 0) {
    throw ArgumentError("vat_loss: epsilon and xi must be positive");
  }
  if (config.vat_power_iters == 0) {
    throw ArgumentError("vat_loss: at least one power iteration required");
  }
  constexpr real kNormFloor = static_cast<real>(1e-30);

  const DenseMatrix clean_probs = model.forward(inputs);

  DenseMatrix direction = random_normal(inputs.rows, inputs.cols, 0, 1, rng);
  if (!normalize_rows(direction, kNormFloor)) {
    direction = random_normal(inputs.rows, inputs.cols, 0, 1, rng);
    if (!normalize_rows(direction, kNormFloor)) {
      throw NumericError("vat_loss: degenerate noise direction after redraw");
    }
  }

  for (std::size_t it = 0; it < config.vat_power_iters; ++it) {
    const DenseMatrix probed =
        model.forward(add_scaled(inputs, config.vat_xi, direction));
    // Per-sample KL upstream (no 1/N): each row's gradient is independent and
    // only its direction survives the normalization below.
    DenseMatrix upstream(probed.rows, probed.cols);
    for (std::size_t i = 0; i < probed.data.size(); ++i) {
      if (probed.data[i] > kLogClamp) {
        upstream.data[i] = -clean_probs.data[i] / probed.data[i];
      }
    }
    DenseMatrix grad = model.input_grad(
        add_scaled(inputs, config.vat_xi, direction), upstream);
    require_same_shape(grad, direction, "vat_loss input_grad");
    // Rows with a vanishing gradient (flat model) keep their previous
    // direction; the loss there is zero either way.
    for (std::size_t i = 0; i < grad.rows; ++i) {
      const real norm = std::sqrt(row_squared_norm(grad, i));
      if (norm <= kNormFloor) continue;
      real* d = direction.row(i);
      const real* g = grad.row(i);
      for (std::size_t j = 0; j < grad.cols; ++j) d[j] = g[j] / norm;
    }
  }

  VatResult out;
  out.perturbation = direction;
  scale_in_place(out.perturbation, config.vat_epsilon);
  const DenseMatrix adv_probs =
      model.forward(add_scaled(inputs, 1, out.perturbation));
  out.loss = kl_divergence_rows(clean_probs, adv_probs);
  return out;
}

}  // namespace supercm
