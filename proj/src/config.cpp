#include "supercm/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace supercm {

std::size_t dataset_num_classes(const DatasetSpec& ds) {
  return ds.generator == "gaussian_blobs" ? ds.blobs_k : 2;
}

std::size_t dataset_class_size(const DatasetSpec& ds) {
  return ds.generator == "gaussian_blobs" ? ds.blobs_n_per : ds.n / 2;
}

Dataset build_dataset(const DatasetSpec& ds) {
  Rng rng(ds.seed);
  if (ds.generator == "two_moons") {
    return two_moons(ds.n, ds.noise_sd, rng, ds.fractions);
  }
  if (ds.generator == "gaussian_blobs") {
    return gaussian_blobs(ds.blobs_k, ds.blobs_n_per, ds.blobs_d,
                          ds.center_scale, ds.cluster_sd, rng, ds.fractions);
  }
  throw ArgumentError("build_dataset: unknown generator '" + ds.generator +
                      "'");
}

namespace {

struct Token {
  std::string text;
  std::size_t line = 0;
};

bool is_punct(char c) {
  return c == '{' || c == '}' || c == '[' || c == ']' || c == ',';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (is_punct(c)) {
      out.push_back({std::string(1, c), line});
      ++i;
    } else {
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             !is_punct(text[i]) && text[i] != '#') {
        ++i;
      }
      out.push_back({text.substr(start, i - start), line});
    }
  }
  return out;
}

std::string at_line(std::size_t line) {
  return "line " + std::to_string(line) + ": ";
}

// One parsed entry: `key scalar`, `key [list]`, or `key { children }`.
struct RawEntry {
  std::string key;
  std::size_t line = 0;
  bool is_block = false;
  bool is_list = false;
  std::vector<Token> values;
  std::vector<RawEntry> children;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<RawEntry> parse_top() {
    std::vector<RawEntry> out = parse_entries(/*nested=*/false);
    if (pos_ < tokens_.size()) {
      throw ConfigError(at_line(tokens_[pos_].line) + "unexpected '" +
                        tokens_[pos_].text + "'");
    }
    return out;
  }

 private:
  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  std::vector<RawEntry> parse_entries(bool nested) {
    std::vector<RawEntry> out;
    while (!done() && peek().text != "}") {
      out.push_back(parse_entry());
    }
    if (nested && done()) {
      throw ConfigError("unexpected end of file: missing '}'");
    }
    return out;
  }

  RawEntry parse_entry() {
    const Token key = peek();
    if (is_punct(key.text[0])) {
      throw ConfigError(at_line(key.line) + "expected a key, got '" +
                        key.text + "'");
    }
    ++pos_;
    RawEntry e;
    e.key = key.text;
    e.line = key.line;
    if (done()) {
      throw ConfigError(at_line(key.line) + "key '" + key.text +
                        "' has no value");
    }
    const Token& next = peek();
    if (next.text == "{") {
      ++pos_;
      e.is_block = true;
      e.children = parse_entries(/*nested=*/true);
      ++pos_;  // consume '}'
    } else if (next.text == "[") {
      ++pos_;
      e.is_list = true;
      while (!done() && peek().text != "]") {
        if (peek().text == ",") {
          ++pos_;
          continue;
        }
        if (is_punct(peek().text[0])) {
          throw ConfigError(at_line(peek().line) + "unexpected '" +
                            peek().text + "' inside list '" + key.text + "'");
        }
        e.values.push_back(peek());
        ++pos_;
      }
      if (done()) {
        throw ConfigError(at_line(key.line) + "list '" + key.text +
                          "' is missing ']'");
      }
      ++pos_;  // consume ']'
    } else if (next.text == "}" || next.text == "]" || next.text == ",") {
      throw ConfigError(at_line(key.line) + "key '" + key.text +
                        "' has no value");
    } else {
      e.values.push_back(next);
      ++pos_;
    }
    return e;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Applies typed entries to a spec while accumulating violations. Conversion
// helpers leave the target untouched on failure so defaults survive.
class SpecBuilder {
 public:
  explicit SpecBuilder(std::vector<std::string>& violations)
      : violations_(violations) {}

  void flag(std::size_t line, const std::string& message) {
    violations_.push_back(at_line(line) + message);
  }

  bool to_real(const Token& t, real& out) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (end != t.text.c_str() + t.text.size() || errno == ERANGE) {
      flag(t.line, "'" + t.text + "' is not a number");
      return false;
    }
    out = static_cast<real>(v);
    return true;
  }

  bool to_count(const Token& t, std::size_t& out) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.text.c_str(), &end, 10);
    if (end != t.text.c_str() + t.text.size() || errno == ERANGE ||
        t.text.front() == '-') {
      flag(t.line, "'" + t.text + "' is not a non-negative integer");
      return false;
    }
    out = static_cast<std::size_t>(v);
    return true;
  }

  bool to_seed(const Token& t, std::uint64_t& out) {
    std::size_t v = 0;
    if (!to_count(t, v)) return false;
    out = static_cast<std::uint64_t>(v);
    return true;
  }

  void scalar_only(const RawEntry& e, const char* what) {
    if (e.is_block || e.is_list || e.values.size() != 1) {
      flag(e.line, std::string("'") + e.key + "' expects a single " + what);
    }
  }

  void set_real(const RawEntry& e, real& out) {
    scalar_only(e, "number");
    if (e.values.size() == 1) to_real(e.values[0], out);
  }

  void set_count(const RawEntry& e, std::size_t& out) {
    scalar_only(e, "count");
    if (e.values.size() == 1) to_count(e.values[0], out);
  }

  void set_seed(const RawEntry& e, std::uint64_t& out) {
    scalar_only(e, "seed");
    if (e.values.size() == 1) to_seed(e.values[0], out);
  }

  void set_word(const RawEntry& e, std::string& out) {
    scalar_only(e, "word");
    if (e.values.size() == 1) out = e.values[0].text;
  }

  void set_real_list(const RawEntry& e, std::vector<real>& out) {
    if (e.is_block) {
      flag(e.line, "'" + e.key + "' expects a list of numbers");
      return;
    }
    std::vector<real> parsed;
    for (const Token& t : e.values) {
      real v = 0;
      if (to_real(t, v)) parsed.push_back(v);
    }
    out = std::move(parsed);
  }

  void set_count_list(const RawEntry& e, std::vector<std::size_t>& out) {
    if (e.is_block) {
      flag(e.line, "'" + e.key + "' expects a list of counts");
      return;
    }
    std::vector<std::size_t> parsed;
    for (const Token& t : e.values) {
      std::size_t v = 0;
      if (to_count(t, v)) parsed.push_back(v);
    }
    out = std::move(parsed);
  }

  void set_seed_list(const RawEntry& e, std::vector<std::uint64_t>& out) {
    if (e.is_block) {
      flag(e.line, "'" + e.key + "' expects a list of seeds");
      return;
    }
    std::vector<std::uint64_t> parsed;
    for (const Token& t : e.values) {
      std::uint64_t v = 0;
      if (to_seed(t, v)) parsed.push_back(v);
    }
    out = std::move(parsed);
  }

  void unknown(const RawEntry& e, const char* block) {
    flag(e.line, std::string("unknown key '") + e.key + "' in " + block);
  }

  void apply_dataset(const RawEntry& e, DatasetSpec& ds) {
    if (e.key == "generator") set_word(e, ds.generator);
    else if (e.key == "seed") set_seed(e, ds.seed);
    else if (e.key == "n") set_count(e, ds.n);
    else if (e.key == "noise_sd") set_real(e, ds.noise_sd);
    else if (e.key == "clusters" || e.key == "k") set_count(e, ds.blobs_k);
    else if (e.key == "n_per_cluster") set_count(e, ds.blobs_n_per);
    else if (e.key == "dim") set_count(e, ds.blobs_d);
    else if (e.key == "center_scale") set_real(e, ds.center_scale);
    else if (e.key == "cluster_sd") set_real(e, ds.cluster_sd);
    else unknown(e, "dataset block");
  }

  void apply_split(const RawEntry& e, ExperimentSpec& spec) {
    if (e.key == "labels_per_class") {
      set_count(e, spec.train.labels_per_class);
    } else if (e.key == "train_fraction") {
      set_real(e, spec.dataset.fractions.train);
    } else if (e.key == "validation_fraction") {
      set_real(e, spec.dataset.fractions.validation);
    } else {
      unknown(e, "split block");
    }
  }

  void apply_model(const RawEntry& e, ModelArch& model) {
    if (e.key == "hidden") {
      set_count_list(e, model.hidden);
    } else if (e.key == "activation") {
      std::string word;
      set_word(e, word);
      if (word == "relu") model.activation = Activation::kRelu;
      else if (word == "tanh") model.activation = Activation::kTanh;
      else if (!word.empty()) flag(e.line, "unknown activation '" + word + "'");
    } else if (e.key == "embedding_dim") {
      set_count(e, model.embedding_dim);
    } else if (e.key == "clusters") {
      set_count(e, model.num_clusters);
    } else {
      unknown(e, "model block");
    }
  }

  void apply_ssl(const RawEntry& e, SslLossConfig& ssl) {
    if (e.key == "method") {
      std::string word;
      set_word(e, word);
      if (word == "none") ssl.method = SslMethod::kNone;
      else if (word == "pseudo_label") ssl.method = SslMethod::kPseudoLabel;
      else if (word == "vat") ssl.method = SslMethod::kVat;
      else if (!word.empty()) flag(e.line, "unknown ssl method '" + word + "'");
    } else if (e.key == "pl_threshold") {
      set_real(e, ssl.pl_threshold);
    } else if (e.key == "vat_epsilon") {
      set_real(e, ssl.vat_epsilon);
    } else if (e.key == "vat_xi") {
      set_real(e, ssl.vat_xi);
    } else if (e.key == "vat_power_iters") {
      set_count(e, ssl.vat_power_iters);
    } else {
      unknown(e, "ssl block");
    }
  }

  void apply_train(const RawEntry& e, TrainConfig& train) {
    if (e.key == "beta") set_real(e, train.beta);
    else if (e.key == "delta") set_real(e, train.delta);
    else if (e.key == "alpha") set_real_list(e, train.alpha);
    else if (e.key == "lr") set_real(e, train.lr);
    else if (e.key == "iterations") set_count(e, train.iterations);
    else if (e.key == "decay_at") set_count(e, train.decay_at);
    else if (e.key == "decay_factor") set_real(e, train.decay_factor);
    else if (e.key == "n_labeled") set_count(e, train.n_labeled);
    else if (e.key == "n_unlabeled") set_count(e, train.n_unlabeled);
    else if (e.key == "swa_start_fraction") set_real(e, train.swa_start_fraction);
    else if (e.key == "augment_sd") set_real(e, train.augment_sd);
    else if (e.key == "seed") set_seed(e, train.seed);
    else if (e.key == "eval_every") set_count(e, train.eval_every);
    else if (e.key == "eq2_mode") {
      std::string word;
      set_word(e, word);
      if (word == "class_mean") train.eq2_mode = Eq2Mode::kClassMean;
      else if (word == "literal") train.eq2_mode = Eq2Mode::kLiteral;
      else if (!word.empty()) flag(e.line, "unknown eq2_mode '" + word + "'");
    } else if (e.key == "ssl" && e.is_block) {
      for (const RawEntry& child : e.children) apply_ssl(child, train.ssl);
    } else {
      unknown(e, "train block");
    }
  }

  void apply_sweep(const RawEntry& e, SweepSpec& sweep) {
    if (!e.is_block && e.values.empty()) {
      flag(e.line, "sweep list '" + e.key + "' must not be empty");
      return;
    }
    if (e.key == "beta") set_real_list(e, sweep.beta);
    else if (e.key == "delta") set_real_list(e, sweep.delta);
    else if (e.key == "labels_per_class") set_count_list(e, sweep.labels_per_class);
    else if (e.key == "seeds") set_seed_list(e, sweep.seeds);
    else unknown(e, "sweep block");
  }

  void apply_top(const RawEntry& e, ExperimentSpec& spec) {
    if (e.key == "output_dir") {
      set_word(e, spec.output_dir);
    } else if (e.key == "dataset" && e.is_block) {
      for (const RawEntry& child : e.children) {
        apply_dataset(child, spec.dataset);
      }
    } else if (e.key == "split" && e.is_block) {
      for (const RawEntry& child : e.children) apply_split(child, spec);
    } else if (e.key == "model" && e.is_block) {
      for (const RawEntry& child : e.children) apply_model(child, spec.model);
    } else if (e.key == "train" && e.is_block) {
      for (const RawEntry& child : e.children) apply_train(child, spec.train);
    } else if (e.key == "sweep" && e.is_block) {
      if (e.children.empty()) return;  // empty sweep block = single run
      for (const RawEntry& child : e.children) apply_sweep(child, spec.sweep);
    } else if (e.is_block) {
      flag(e.line, "unknown block '" + e.key + "'");
    } else {
      unknown(e, "the top level");
    }
  }

 private:
  std::vector<std::string>& violations_;
};

void check(std::vector<std::string>& out, bool ok, const std::string& message) {
  if (!ok) out.push_back(message);
}

}  // namespace

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> v;
  const DatasetSpec& ds = spec.dataset;
  const TrainConfig& t = spec.train;

  const bool known_generator =
      ds.generator == "two_moons" || ds.generator == "gaussian_blobs";
  check(v, known_generator,
        "dataset.generator '" + ds.generator + "' is not a known generator");
  if (ds.generator == "two_moons") {
    check(v, ds.n >= 2 && ds.n % 2 == 0,
          "dataset.n must be an even count >= 2");
    check(v, ds.noise_sd >= 0, "dataset.noise_sd must be >= 0");
  } else if (ds.generator == "gaussian_blobs") {
    check(v, ds.blobs_k >= 2, "dataset.clusters must be >= 2");
    check(v, ds.blobs_n_per >= 1, "dataset.n_per_cluster must be >= 1");
    check(v, ds.blobs_d >= 1, "dataset.dim must be >= 1");
    check(v, ds.cluster_sd >= 0, "dataset.cluster_sd must be >= 0");
  }
  check(v,
        ds.fractions.train > 0 && ds.fractions.validation >= 0 &&
            ds.fractions.train + ds.fractions.validation <= 1,
        "split fractions must satisfy 0 < train, 0 <= validation, sum <= 1");

  check(v, !spec.model.hidden.empty(), "model.hidden must list >= 1 width");
  for (std::size_t w : spec.model.hidden) {
    if (w == 0) {
      v.push_back("model.hidden widths must be >= 1");
      break;
    }
  }
  check(v, spec.model.embedding_dim >= 1, "model.embedding_dim must be >= 1");
  if (known_generator) {
    check(v, spec.model.num_clusters == dataset_num_classes(ds),
          "model.clusters must equal the dataset's class count (" +
              std::to_string(dataset_num_classes(ds)) +
              "); centroids are class-anchored");
  }

  check(v, t.beta >= 0, "train.beta must be >= 0");
  check(v, t.delta >= 0, "train.delta must be >= 0");
  check(v, t.lr > 0, "train.lr must be > 0");
  check(v, t.decay_at <= t.iterations,
        "train.decay_at must be <= train.iterations");
  check(v, t.decay_factor > 0, "train.decay_factor must be > 0");
  check(v, t.n_labeled >= 1, "train.n_labeled must be >= 1");
  check(v, t.swa_start_fraction >= 0 && t.swa_start_fraction <= 1,
        "train.swa_start_fraction must lie in [0, 1]");
  check(v, t.augment_sd >= 0, "train.augment_sd must be >= 0");
  for (real a : t.alpha) {
    if (a < 1) {
      v.push_back("train.alpha entries must be >= 1");
      break;
    }
  }
  check(v,
        t.alpha.empty() || t.alpha.size() == 1 ||
            t.alpha.size() == spec.model.num_clusters,
        "train.alpha must be empty, a single value, or one value per cluster");

  const bool delta_swept_positive = [&] {
    for (real d : spec.sweep.delta) {
      if (d > 0) return true;
    }
    return false;
  }();
  if ((t.delta > 0 || delta_swept_positive) &&
      t.ssl.method == SslMethod::kNone) {
    v.push_back(
        "train.delta > 0 requires train.ssl.method to name a base model "
        "(train.delta vs train.ssl.method)");
  }
  check(v, t.ssl.pl_threshold > 0 && t.ssl.pl_threshold < 1,
        "train.ssl.pl_threshold must lie in (0, 1)");
  check(v, t.ssl.vat_epsilon > 0, "train.ssl.vat_epsilon must be > 0");
  check(v, t.ssl.vat_xi > 0, "train.ssl.vat_xi must be > 0");
  check(v, t.ssl.vat_power_iters >= 1,
        "train.ssl.vat_power_iters must be >= 1");

  if (known_generator &&
      (ds.generator != "two_moons" || (ds.n >= 2 && ds.n % 2 == 0))) {
    const std::size_t train_per_class =
        class_split_counts(dataset_class_size(ds), ds.fractions).train;
    auto check_budget = [&](std::size_t lpc, const char* key) {
      if (lpc < 1) {
        v.push_back(std::string(key) + " must be >= 1");
      } else if (lpc > train_per_class) {
        v.push_back(std::string(key) + " (" + std::to_string(lpc) +
                    ") exceeds the per-class train population (" +
                    std::to_string(train_per_class) + ")");
      }
    };
    check_budget(t.labels_per_class, "split.labels_per_class");
    for (std::size_t lpc : spec.sweep.labels_per_class) {
      check_budget(lpc, "sweep.labels_per_class entry");
    }
  }

  check(v, !spec.output_dir.empty(), "output_dir must not be empty");
  return v;
}

ParsedExperiment parse_experiment_text(const std::string& text) {
  ParsedExperiment out;
  Parser parser(tokenize(text));
  const std::vector<RawEntry> entries = parser.parse_top();
  SpecBuilder builder(out.violations);
  for (const RawEntry& e : entries) builder.apply_top(e, out.spec);
  std::vector<std::string> semantic = validate_spec(out.spec);
  out.violations.insert(out.violations.end(), semantic.begin(),
                        semantic.end());
  return out;
}

ParsedExperiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read experiment file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_text(buffer.str());
}

}  // namespace supercm
