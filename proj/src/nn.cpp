#include "supercm/nn.hpp"

#include <algorithm>
#include <cmath>

#include "supercm/errors.hpp"

namespace supercm {

DenseMatrix softmax_rows(const DenseMatrix& logits) {
  if (logits.empty()) {
    throw ArgumentError("softmax_rows: empty input " + shape_string(logits));
  }
  DenseMatrix out(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const real* in = logits.row(i);
    real* o = out.row(i);
    real m = in[0];
    for (std::size_t j = 1; j < logits.cols; ++j) m = std::max(m, in[j]);
    real sum = 0;
    for (std::size_t j = 0; j < logits.cols; ++j) {
      o[j] = std::exp(in[j] - m);
      sum += o[j];
    }
    for (std::size_t j = 0; j < logits.cols; ++j) o[j] /= sum;
  }
  return out;
}

DenseMatrix softmax_backward(const DenseMatrix& probs,
                             const DenseMatrix& upstream) {
  require_same_shape(probs, upstream, "softmax_backward");
  DenseMatrix out(probs.rows, probs.cols);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const real* p = probs.row(i);
    const real* u = upstream.row(i);
    real* o = out.row(i);
    real dot = 0;
    for (std::size_t j = 0; j < probs.cols; ++j) dot += u[j] * p[j];
    for (std::size_t j = 0; j < probs.cols; ++j) o[j] = p[j] * (u[j] - dot);
  }
  return out;
}

static void check_labels(const DenseMatrix& probs,
                         const std::vector<int>& labels, const char* what) {
  if (labels.size() != probs.rows) {
    throw ShapeError(std::string(what) + ": " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(probs.rows) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols) {
      throw IndexError(std::string(what) + ": label " +
                       std::to_string(labels[i]) + " out of [0, " +
                       std::to_string(probs.cols) + ") at row " +
                       std::to_string(i));
    }
  }
}

real cross_entropy(const DenseMatrix& probs, const std::vector<int>& labels) {
  if (probs.empty()) {
    throw ArgumentError("cross_entropy: empty input");
  }
  check_labels(probs, labels, "cross_entropy");
  real sum = 0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const real p = probs(i, static_cast<std::size_t>(labels[i]));
    sum += -std::log(std::max(p, kLogClamp));
  }
  return sum / static_cast<real>(probs.rows);
}

DenseMatrix cross_entropy_grad(const DenseMatrix& probs,
                               const std::vector<int>& labels) {
  if (probs.empty()) {
    throw ArgumentError("cross_entropy_grad: empty input");
  }
  check_labels(probs, labels, "cross_entropy_grad");
  DenseMatrix grad(probs.rows, probs.cols);
  const real inv_n = static_cast<real>(1.0) / static_cast<real>(probs.rows);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    const real p = probs(i, y);
    if (p > kLogClamp) {
      grad(i, y) = -inv_n / p;
    }
  }
  return grad;
}

DenseMatrix linear_forward(const DenseMatrix& input, const DenseMatrix& weights,
                           const DenseMatrix& bias) {
  if (input.cols != weights.rows) {
    throw ShapeError("linear_forward: input " + shape_string(input) +
                     " vs weights " + shape_string(weights));
  }
  if (bias.rows != 1 || bias.cols != weights.cols) {
    throw ShapeError("linear_forward: bias " + shape_string(bias) +
                     " vs weights " + shape_string(weights));
  }
  DenseMatrix out = matmul(input, weights);
  for (std::size_t i = 0; i < out.rows; ++i) {
    real* oi = out.row(i);
    for (std::size_t j = 0; j < out.cols; ++j) oi[j] += bias.data[j];
  }
  return out;
}

LinearGrads linear_backward(const DenseMatrix& input,
                            const DenseMatrix& weights,
                            const DenseMatrix& d_output) {
  if (d_output.rows != input.rows || d_output.cols != weights.cols) {
    throw ShapeError("linear_backward: d_output " + shape_string(d_output));
  }
  LinearGrads g;
  g.d_input = matmul_a_bt(d_output, weights);
  g.d_weights = matmul_at_b(input, d_output);
  g.d_bias = column_sums(d_output);
  return g;
}

AdamState AdamState::for_params(
    const std::vector<const DenseMatrix*>& params) {
  AdamState s;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const DenseMatrix* p : params) {
    s.first_moment.push_back(zeros_like(*p));
    s.second_moment.push_back(zeros_like(*p));
  }
  return s;
}

void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<DenseMatrix>& grads, AdamState& state,
               real lr) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  }
  state.step += 1;
  const real bc1 =
      1 - std::pow(state.beta1, static_cast<real>(state.step));
  const real bc2 =
      1 - std::pow(state.beta2, static_cast<real>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    DenseMatrix& p = *params[t];
    const DenseMatrix& g = grads[t];
    require_same_shape(p, g, "adam_step");
    require_same_shape(p, state.first_moment[t], "adam_step");
    DenseMatrix& m = state.first_moment[t];
    DenseMatrix& v = state.second_moment[t];
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const real gi = g.data[i];
      m.data[i] = state.beta1 * m.data[i] + (1 - state.beta1) * gi;
      v.data[i] = state.beta2 * v.data[i] + (1 - state.beta2) * gi * gi;
      const real m_hat = m.data[i] / bc1;
      const real v_hat = v.data[i] / bc2;
      p.data[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state,
               real lr) {
  std::vector<DenseMatrix*> p{&params};
  std::vector<DenseMatrix> g{grads};
  adam_step(p, g, state, lr);
}

DenseMatrix finite_diff_grad(const std::function<real(const DenseMatrix&)>& f,
                             const DenseMatrix& at, real h) {
  if (h <= 0) {
    throw ArgumentError("finite_diff_grad: h must be positive");
  }
  DenseMatrix grad(at.rows, at.cols);
  DenseMatrix x = at;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const real orig = x.data[i];
    x.data[i] = orig + h;
    const real fp = f(x);
    x.data[i] = orig - h;
    const real fm = f(x);
    x.data[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_diff_grad: non-finite f at coordinate " +
                         std::to_string(i));
    }
    grad.data[i] = (fp - fm) / (2 * h);
  }
  return grad;
}

}  // namespace supercm
