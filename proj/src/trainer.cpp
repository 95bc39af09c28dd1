#include "supercm/trainer.hpp"

#include <cmath>
#include <string>

#include "supercm/errors.hpp"

namespace supercm {

std::vector<DenseMatrix*> trainable_params(Models& models) {
  std::vector<DenseMatrix*> out;
  for (MlpLayer& layer : models.backbone.layers) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
  out.push_back(&models.cm.weights);
  out.push_back(&models.cm.bias);
  return out;
}

std::vector<const DenseMatrix*> trainable_params(const Models& models) {
  std::vector<const DenseMatrix*> out;
  for (const MlpLayer& layer : models.backbone.layers) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
  out.push_back(&models.cm.weights);
  out.push_back(&models.cm.bias);
  return out;
}

Models init_models(std::size_t input_dim, const ModelArch& arch, Rng& rng) {
  Models models;
  models.backbone = init_mlp(input_dim, arch.hidden, arch.embedding_dim,
                             arch.activation, rng);
  models.cm = init_clustering_module(arch.embedding_dim, arch.num_clusters, rng);
  return models;
}

void SwaAccumulator::add(const Models& models) {
  if (count == 0) {
    sum = models;
  } else {
    const std::vector<const DenseMatrix*> src = trainable_params(models);
    const std::vector<DenseMatrix*> dst = trainable_params(sum);
    for (std::size_t i = 0; i < src.size(); ++i) {
      add_in_place(*dst[i], *src[i]);
    }
    add_in_place(sum.cm.centroids, models.cm.centroids);
    sum.cm.ma_counter = models.cm.ma_counter;
  }
  count += 1;
}

Models SwaAccumulator::average() const {
  if (count == 0) {
    throw ContractError("SwaAccumulator: no snapshots accumulated");
  }
  Models avg = sum;
  const real inv = static_cast<real>(1.0) / static_cast<real>(count);
  for (DenseMatrix* p : trainable_params(avg)) scale_in_place(*p, inv);
  scale_in_place(avg.cm.centroids, inv);
  return avg;
}

TrainerState init_trainer(std::size_t input_dim, const ModelArch& arch,
                          const TrainConfig& config, Rng& init_rng) {
  TrainerState state;
  state.models = init_models(input_dim, arch, init_rng);
  const Models& frozen = state.models;
  state.opt = AdamState::for_params(trainable_params(frozen));
  state.lr = config.lr;
  state.iter = 0;
  return state;
}

namespace {

std::vector<real> resolve_alpha(const TrainConfig& config,
                                std::size_t num_clusters) {
  if (config.alpha.empty()) return uniform_alpha(num_clusters);
  if (config.alpha.size() == 1) {
    return uniform_alpha(num_clusters, config.alpha.front());
  }
  if (config.alpha.size() != num_clusters) {
    throw ShapeError("train: alpha size " +
                     std::to_string(config.alpha.size()) + " vs " +
                     std::to_string(num_clusters) + " clusters");
  }
  return config.alpha;
}

DifferentiableModel full_model(const Models& models) {
  DifferentiableModel m;
  m.forward = [&models](const DenseMatrix& x) {
    return encode(mlp_forward(x, models.backbone).features, models.cm);
  };
  m.input_grad = [&models](const DenseMatrix& x, const DenseMatrix& upstream) {
    MlpForward fwd = mlp_forward(x, models.backbone);
    const DenseMatrix gamma = encode(fwd.features, models.cm);
    const DenseMatrix d_logits = softmax_backward(gamma, upstream);
    LinearGrads lin =
        linear_backward(fwd.features, models.cm.weights, d_logits);
    return mlp_backward(lin.d_input, fwd.cache, models.backbone).d_input;
  };
  return m;
}

void accumulate_mlp_grads(std::vector<DenseMatrix>& grads,
                          const MlpGrads& mlp, real scale) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    axpy_in_place(grads[2 * l], scale, mlp.layers[l].weights);
    axpy_in_place(grads[2 * l + 1], scale, mlp.layers[l].bias);
  }
}

}  // namespace

IterationLog train_step(TrainerState& state, const Batch& batch,
                        const TrainConfig& config, Rng& ssl_rng) {
  Models& models = state.models;
  const std::size_t n_l = batch.labeled_features.rows;
  const std::size_t n_u = batch.unlabeled_features.rows;
  if (n_l == 0) {
    throw ArgumentError("train_step: batch has no labeled samples");
  }
  const std::vector<real> alpha =
      resolve_alpha(config, models.cm.num_clusters());
  const real delta =
      config.ssl.method == SslMethod::kNone ? 0 : config.delta;

  // (1) backbone forward on both parts
  MlpForward fwd_l = mlp_forward(batch.labeled_features, models.backbone);
  MlpForward fwd_u;
  if (n_u > 0) {
    fwd_u = mlp_forward(batch.unlabeled_features, models.backbone);
  }

  // (2) moving-average centroid update from the labeled features (detached)
  update_centroids(models.cm, fwd_l.features, batch.labeled_labels,
                   config.eq2_mode);

  // (3) clustering module over the concatenation, labeled rows first
  const DenseMatrix features = vstack(fwd_l.features, fwd_u.features);
  const DenseMatrix gamma = encode(features, models.cm);
  const DenseMatrix recon = reconstruct(gamma, models.cm.centroids);
  const DenseMatrix gamma_l = slice_rows(gamma, 0, n_l);

  // (4) losses
  const real ce = cross_entropy(gamma_l, batch.labeled_labels);
  const CMLossBreakdown cm =
      cm_loss(features, gamma, recon, models.cm.centroids, alpha);

  real ssl_value = 0;
  PseudoLabelGrads pl;
  VatResult vat;
  if (config.ssl.method == SslMethod::kPseudoLabel && n_u > 0) {
    pl = pseudo_label_loss_grads(slice_rows(gamma, n_l, n_l + n_u), config.ssl);
    ssl_value = pl.loss;
  } else if (config.ssl.method == SslMethod::kVat && n_u > 0) {
    vat = vat_loss(batch.unlabeled_features, full_model(models), config.ssl,
                   ssl_rng);
    ssl_value = vat.loss;
  }

  IterationLog log;
  log.iter = state.iter + 1;
  log.ce = ce;
  log.cm_recon = cm.reconstruction;
  log.cm_var = cm.variance_penalty;
  log.cm_cross = cm.cross_centroid;
  log.cm_dirichlet = cm.dirichlet;
  log.ssl = ssl_value;
  log.total = ce + config.beta * cm.total + delta * ssl_value;
  log.lr = state.lr;
  if (!std::isfinite(log.total)) {
    throw NumericError("train_step: non-finite loss at iteration " +
                       std::to_string(log.iter));
  }

  // (5) backpropagation; mu stays a constant throughout
  DenseMatrix d_gamma(gamma.rows, gamma.cols);
  {
    const DenseMatrix d_ce = cross_entropy_grad(gamma_l, batch.labeled_labels);
    for (std::size_t i = 0; i < d_ce.data.size(); ++i) {
      d_gamma.data[i] = d_ce.data[i];
    }
  }
  if (delta > 0 && config.ssl.method == SslMethod::kPseudoLabel && n_u > 0) {
    for (std::size_t i = 0; i < pl.d_probs.data.size(); ++i) {
      d_gamma.data[n_l * gamma.cols + i] += delta * pl.d_probs.data[i];
    }
  }
  if (config.beta != 0) {
    const DenseMatrix cm_gamma_grad =
        cm_loss_gamma_grad(features, gamma, models.cm.centroids, alpha);
    axpy_in_place(d_gamma, config.beta, cm_gamma_grad);
  }

  const DenseMatrix d_logits = softmax_backward(gamma, d_gamma);
  LinearGrads enc = linear_backward(features, models.cm.weights, d_logits);
  DenseMatrix d_features = std::move(enc.d_input);
  if (config.beta != 0) {
    // direct path of the reconstruction term
    const real scale =
        config.beta * 2 / static_cast<real>(features.rows);
    for (std::size_t i = 0; i < d_features.data.size(); ++i) {
      d_features.data[i] += scale * (features.data[i] - recon.data[i]);
    }
  }

  const std::size_t n_backbone = 2 * models.backbone.layers.size();
  std::vector<DenseMatrix> grads;
  grads.reserve(n_backbone + 2);
  for (const DenseMatrix* p : trainable_params(models)) {
    grads.push_back(zeros_like(*p));
  }
  const MlpGrads mlp_l = mlp_backward(slice_rows(d_features, 0, n_l),
                                      fwd_l.cache, models.backbone);
  accumulate_mlp_grads(grads, mlp_l, 1);
  if (n_u > 0) {
    const MlpGrads mlp_u =
        mlp_backward(slice_rows(d_features, n_l, n_l + n_u), fwd_u.cache,
                     models.backbone);
    accumulate_mlp_grads(grads, mlp_u, 1);
  }
  grads[n_backbone] = std::move(enc.d_weights);
  grads[n_backbone + 1] = std::move(enc.d_bias);

  if (delta > 0 && config.ssl.method == SslMethod::kVat && n_u > 0) {
    // Consistency branch: backprop KL(clean || adversarial) through the
    // adversarial forward pass only; the clean distribution and the
    // perturbation are constants.
    DenseMatrix adv_inputs = batch.unlabeled_features;
    add_in_place(adv_inputs, vat.perturbation);
    MlpForward fwd_adv = mlp_forward(adv_inputs, models.backbone);
    const DenseMatrix gamma_adv = encode(fwd_adv.features, models.cm);
    DenseMatrix d_q = kl_divergence_rows_grad_q(
        slice_rows(gamma, n_l, n_l + n_u), gamma_adv);
    scale_in_place(d_q, delta);
    const DenseMatrix d_logits_adv = softmax_backward(gamma_adv, d_q);
    LinearGrads enc_adv =
        linear_backward(fwd_adv.features, models.cm.weights, d_logits_adv);
    add_in_place(grads[n_backbone], enc_adv.d_weights);
    add_in_place(grads[n_backbone + 1], enc_adv.d_bias);
    const MlpGrads mlp_adv =
        mlp_backward(enc_adv.d_input, fwd_adv.cache, models.backbone);
    accumulate_mlp_grads(grads, mlp_adv, 1);
  }

  // (6) optimizer update
  adam_step(trainable_params(models), grads, state.opt, state.lr);
  state.iter += 1;
  return log;
}

std::vector<int> predict(const Models& models, const DenseMatrix& inputs) {
  const DenseMatrix gamma =
      encode(mlp_forward(inputs, models.backbone).features, models.cm);
  std::vector<int> pred(gamma.rows);
  for (std::size_t i = 0; i < gamma.rows; ++i) {
    const real* g = gamma.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < gamma.cols; ++k) {
      if (g[k] > g[best]) best = k;
    }
    pred[i] = static_cast<int>(best);
  }
  return pred;
}

real evaluate(const Models& models, const DenseMatrix& inputs,
              const std::vector<int>& labels) {
  if (inputs.rows == 0) {
    throw ArgumentError("evaluate: empty evaluation set");
  }
  if (labels.size() != inputs.rows) {
    throw ShapeError("evaluate: label count mismatch");
  }
  const std::vector<int> pred = predict(models, inputs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == labels[i]) correct += 1;
  }
  return static_cast<real>(correct) / static_cast<real>(pred.size());
}

TrainResult train(const Dataset& ds, const ModelArch& arch,
                  const TrainConfig& config) {
  if (config.decay_at > config.iterations) {
    throw ArgumentError("train: decay_at exceeds iterations");
  }
  if (config.swa_start_fraction < 0 || config.swa_start_fraction > 1) {
    throw ArgumentError("train: swa_start_fraction outside [0, 1]");
  }
  Rng root(config.seed);
  Rng pool_rng = root.split(0);
  Rng init_rng = root.split(1);
  Rng loop_rng = root.split(2);
  Rng ssl_rng = root.split(3);

  TrainResult result;
  result.pools = split_labeled(ds, config.labels_per_class, pool_rng);
  TrainerState state =
      init_trainer(ds.features.cols, arch, config, init_rng);

  const SplitView val = gather_split(ds, Split::kValidation);
  const SplitView test = gather_split(ds, Split::kTest);
  const std::size_t cadence =
      config.eval_every > 0
          ? config.eval_every
          : std::max<std::size_t>(config.iterations / 50, 1);
  // Guarantee at least one averaged snapshot by starting no later than the
  // final iteration.
  const std::size_t swa_start = std::min<std::size_t>(
      static_cast<std::size_t>(config.swa_start_fraction *
                               static_cast<real>(config.iterations)),
      config.iterations > 0 ? config.iterations - 1 : 0);
  SwaAccumulator swa;

  for (std::size_t i = 1; i <= config.iterations; ++i) {
    if (i == config.decay_at + 1) {
      state.lr *= config.decay_factor;
    }
    const Batch batch = sample_batch(
        ds, result.pools.labeled, result.pools.unlabeled, config.n_labeled,
        config.n_unlabeled, config.augment_sd, loop_rng);
    result.record.iterations.push_back(
        train_step(state, batch, config, ssl_rng));
    if (i > swa_start) {
      swa.add(state.models);
    }
    if ((i % cadence == 0 || i == config.iterations) && val.features.rows > 0) {
      EvalLog e;
      e.iter = i;
      e.split = Split::kValidation;
      e.accuracy = evaluate(state.models, val.features, val.labels);
      result.record.evaluations.push_back(e);
      if (e.accuracy > result.record.best_val_acc ||
          result.record.best_val_iter == 0) {
        result.record.best_val_acc = e.accuracy;
        result.record.best_val_iter = i;
      }
    }
  }

  result.final_models = state.models;
  result.swa_models = swa.count > 0 ? swa.average() : state.models;
  if (val.features.rows > 0) {
    result.record.final_val_acc =
        evaluate(result.swa_models, val.features, val.labels);
  }
  if (test.features.rows > 0) {
    result.record.final_test_acc =
        evaluate(result.swa_models, test.features, test.labels);
  }
  return result;
}

}  // namespace supercm
