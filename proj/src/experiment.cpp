#include "supercm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include "supercm/io.hpp"
#include "supercm/metrics.hpp"

namespace supercm {

namespace {

std::string compact_real(real v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", static_cast<double>(v));
  return buf;
}

const char* ssl_method_name(SslMethod m) {
  switch (m) {
    case SslMethod::kPseudoLabel:
      return "pseudo_label";
    case SslMethod::kVat:
      return "vat";
    default:
      return "none";
  }
}

constexpr std::size_t kGridResolution = 201;
constexpr real kGridMargin = static_cast<real>(0.5);

}  // namespace

std::vector<RunPoint> expand_sweep(const ExperimentSpec& spec) {
  const std::vector<real> betas =
      spec.sweep.beta.empty() ? std::vector<real>{spec.train.beta}
                              : spec.sweep.beta;
  const std::vector<real> deltas =
      spec.sweep.delta.empty() ? std::vector<real>{spec.train.delta}
                               : spec.sweep.delta;
  const std::vector<std::size_t> budgets =
      spec.sweep.labels_per_class.empty()
          ? std::vector<std::size_t>{spec.train.labels_per_class}
          : spec.sweep.labels_per_class;
  const std::vector<std::uint64_t> seeds =
      spec.sweep.seeds.empty() ? std::vector<std::uint64_t>{spec.train.seed}
                               : spec.sweep.seeds;
  std::vector<RunPoint> out;
  out.reserve(betas.size() * deltas.size() * budgets.size() * seeds.size());
  for (real beta : betas) {
    for (real delta : deltas) {
      for (std::size_t lpc : budgets) {
        for (std::uint64_t seed : seeds) {
          out.push_back({beta, delta, lpc, seed});
        }
      }
    }
  }
  return out;
}

std::string run_dir_name(const RunPoint& point) {
  return "run_beta" + compact_real(point.beta) + "_delta" +
         compact_real(point.delta) + "_lpc" +
         std::to_string(point.labels_per_class) + "_seed" +
         std::to_string(point.seed);
}

TrainConfig config_for_point(const TrainConfig& base, const RunPoint& point) {
  TrainConfig config = base;
  config.beta = point.beta;
  config.delta = point.delta;
  config.labels_per_class = point.labels_per_class;
  config.seed = point.seed;
  return config;
}

std::string aggregate_csv(const std::vector<RunSummary>& rows) {
  std::string out =
      "beta,delta,labels_per_class,seed,final_test_acc,best_val_acc\n";
  for (const RunSummary& r : rows) {
    if (!r.ok) continue;
    out += format_real(r.point.beta);
    out += ',';
    out += format_real(r.point.delta);
    out += ',';
    out += std::to_string(r.point.labels_per_class);
    out += ',';
    out += std::to_string(r.point.seed);
    out += ',';
    out += format_real(r.final_test_acc);
    out += ',';
    out += format_real(r.best_val_acc);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> summary_entries(
    const ExperimentSpec& spec, const TrainConfig& config,
    const RunRecord& record) {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("final_test_acc", format_real(record.final_test_acc));
  e.emplace_back("best_val_acc", format_real(record.best_val_acc));
  e.emplace_back("best_val_iter", std::to_string(record.best_val_iter));
  e.emplace_back("final_val_acc", format_real(record.final_val_acc));
  e.emplace_back("generator", spec.dataset.generator);
  e.emplace_back("dataset_seed", std::to_string(spec.dataset.seed));
  if (spec.dataset.generator == "gaussian_blobs") {
    e.emplace_back("dataset_clusters", std::to_string(spec.dataset.blobs_k));
    e.emplace_back("dataset_n_per_cluster",
                   std::to_string(spec.dataset.blobs_n_per));
    e.emplace_back("dataset_dim", std::to_string(spec.dataset.blobs_d));
    e.emplace_back("dataset_center_scale",
                   format_real(spec.dataset.center_scale));
    e.emplace_back("dataset_cluster_sd", format_real(spec.dataset.cluster_sd));
  } else {
    e.emplace_back("dataset_n", std::to_string(spec.dataset.n));
    e.emplace_back("dataset_noise_sd", format_real(spec.dataset.noise_sd));
  }
  std::string hidden;
  for (std::size_t w : spec.model.hidden) {
    if (!hidden.empty()) hidden += ' ';
    hidden += std::to_string(w);
  }
  e.emplace_back("model_hidden", hidden);
  e.emplace_back("model_activation",
                 spec.model.activation == Activation::kRelu ? "relu" : "tanh");
  e.emplace_back("model_embedding_dim",
                 std::to_string(spec.model.embedding_dim));
  e.emplace_back("model_clusters", std::to_string(spec.model.num_clusters));
  e.emplace_back("beta", format_real(config.beta));
  e.emplace_back("delta", format_real(config.delta));
  e.emplace_back("labels_per_class", std::to_string(config.labels_per_class));
  e.emplace_back("seed", std::to_string(config.seed));
  e.emplace_back("lr", format_real(config.lr));
  e.emplace_back("iterations", std::to_string(config.iterations));
  e.emplace_back("decay_at", std::to_string(config.decay_at));
  e.emplace_back("decay_factor", format_real(config.decay_factor));
  e.emplace_back("n_labeled", std::to_string(config.n_labeled));
  e.emplace_back("n_unlabeled", std::to_string(config.n_unlabeled));
  e.emplace_back("swa_start_fraction",
                 format_real(config.swa_start_fraction));
  e.emplace_back("augment_sd", format_real(config.augment_sd));
  e.emplace_back("ssl_method", ssl_method_name(config.ssl.method));
  if (config.ssl.method == SslMethod::kPseudoLabel) {
    e.emplace_back("ssl_pl_threshold", format_real(config.ssl.pl_threshold));
  } else if (config.ssl.method == SslMethod::kVat) {
    e.emplace_back("ssl_vat_epsilon", format_real(config.ssl.vat_epsilon));
    e.emplace_back("ssl_vat_xi", format_real(config.ssl.vat_xi));
    e.emplace_back("ssl_vat_power_iters",
                   std::to_string(config.ssl.vat_power_iters));
  }
  e.emplace_back("eq2_mode", config.eq2_mode == Eq2Mode::kClassMean
                                 ? "class_mean"
                                 : "literal");
  return e;
}

}  // namespace

RunSummary execute_run(const Dataset& ds, const ExperimentSpec& spec,
                       const RunPoint& point, const std::string& dir) {
  RunSummary summary;
  summary.point = point;
  const TrainConfig config = config_for_point(spec.train, point);
  std::filesystem::create_directories(dir);
  try {
    const TrainResult result = train(ds, spec.model, config);
    write_text_file(dir + "/run.csv", run_csv(result.record));
    write_text_file(dir + "/evals.csv", evals_csv(result.record));
    write_text_file(dir + "/summary.txt",
                    summary_text(summary_entries(spec, config, result.record)));
    write_text_file(dir + "/features.csv",
                    features_csv(ds, result.pools.labeled));
    save_models(dir + "/model.txt", result.swa_models);
    if (ds.features.cols == 2) {
      real x_lo = ds.features(0, 0), x_hi = x_lo;
      real y_lo = ds.features(0, 1), y_hi = y_lo;
      for (std::size_t i = 1; i < ds.features.rows; ++i) {
        x_lo = std::min(x_lo, ds.features(i, 0));
        x_hi = std::max(x_hi, ds.features(i, 0));
        y_lo = std::min(y_lo, ds.features(i, 1));
        y_hi = std::max(y_hi, ds.features(i, 1));
      }
      const std::vector<GridPoint> grid = decision_grid(
          result.swa_models.backbone, result.swa_models.cm,
          x_lo - kGridMargin, x_hi + kGridMargin, y_lo - kGridMargin,
          y_hi + kGridMargin, kGridResolution);
      write_text_file(dir + "/grid.csv", grid_csv(grid));
    }
    summary.ok = true;
    summary.final_test_acc = result.record.final_test_acc;
    summary.best_val_acc = result.record.best_val_acc;
  } catch (const std::exception& ex) {
    summary.ok = false;
    summary.error = ex.what();
    // Diagnostic record for the aborted run.
    write_text_file(dir + "/failure.txt", std::string(ex.what()) + "\n");
  }
  return summary;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t jobs,
                                 std::ostream* log) {
  const std::vector<RunPoint> points = expand_sweep(spec);
  std::filesystem::create_directories(spec.output_dir);
  const Dataset ds = build_dataset(spec.dataset);

  ExperimentOutcome outcome;
  outcome.runs.resize(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const std::string dir =
          spec.output_dir + "/" + run_dir_name(points[i]);
      outcome.runs[i] = execute_run(ds, spec, points[i], dir);
      if (log != nullptr) {
        std::lock_guard<std::mutex> guard(log_mutex);
        const RunSummary& r = outcome.runs[i];
        if (r.ok) {
          *log << run_dir_name(points[i])
               << ": test acc " << format_real(r.final_test_acc) << "\n";
        } else {
          *log << run_dir_name(points[i]) << ": FAILED (" << r.error << ")\n";
        }
      }
    }
  };

  const std::size_t n_workers =
      std::max<std::size_t>(1, std::min(jobs, points.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  write_text_file(spec.output_dir + "/aggregate.csv",
                  aggregate_csv(outcome.runs));
  for (const RunSummary& r : outcome.runs) {
    if (!r.ok) {
      outcome.exit_code = 3;
      break;
    }
  }
  return outcome;
}

}  // namespace supercm
