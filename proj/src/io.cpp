#include "supercm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "supercm/errors.hpp"

namespace supercm {

std::string format_real(real v) {
  // Shortest decimal form that parses back to the same value, so artifacts
  // stay both diffable and lossless.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), static_cast<double>(v));
  return std::string(buf, res.ptr);
}

std::string run_csv(const RunRecord& record) {
  std::string out = "iter,ce,cm_recon,cm_var,cm_cross,cm_dirichlet,ssl,total,lr\n";
  for (const IterationLog& it : record.iterations) {
    out += std::to_string(it.iter);
    out += ',';
    out += format_real(it.ce);
    out += ',';
    out += format_real(it.cm_recon);
    out += ',';
    out += format_real(it.cm_var);
    out += ',';
    out += format_real(it.cm_cross);
    out += ',';
    out += format_real(it.cm_dirichlet);
    out += ',';
    out += format_real(it.ssl);
    out += ',';
    out += format_real(it.total);
    out += ',';
    out += format_real(it.lr);
    out += '\n';
  }
  return out;
}

std::string evals_csv(const RunRecord& record) {
  std::string out = "iter,split,accuracy\n";
  for (const EvalLog& e : record.evaluations) {
    out += std::to_string(e.iter);
    out += ',';
    out += split_name(e.split);
    out += ',';
    out += format_real(e.accuracy);
    out += '\n';
  }
  return out;
}

std::string summary_text(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [key, value] : entries) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

std::string grid_csv(const std::vector<GridPoint>& grid) {
  std::string out = "x,y,pred,confidence\n";
  for (const GridPoint& p : grid) {
    out += format_real(p.x);
    out += ',';
    out += format_real(p.y);
    out += ',';
    out += std::to_string(p.pred);
    out += ',';
    out += format_real(p.confidence);
    out += '\n';
  }
  return out;
}

std::string features_csv(const Dataset& ds,
                         const std::vector<std::size_t>& labeled) {
  std::vector<bool> is_labeled(ds.size(), false);
  for (std::size_t idx : labeled) {
    if (idx >= ds.size()) {
      throw IndexError("features_csv: labeled index out of range");
    }
    is_labeled[idx] = true;
  }
  std::string out;
  for (std::size_t j = 0; j < ds.features.cols; ++j) {
    if (j > 0) out += ',';
    out += "feature_" + std::to_string(j);
  }
  out += ",label,split,labeled_flag\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.features.cols; ++j) {
      if (j > 0) out += ',';
      out += format_real(ds.features(i, j));
    }
    out += ',';
    out += std::to_string(ds.labels[i]);
    out += ',';
    out += split_name(ds.split[i]);
    out += ',';
    out += is_labeled[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

namespace {

void append_matrix(std::string& out, const DenseMatrix& m) {
  out += std::to_string(m.rows);
  out += ' ';
  out += std::to_string(m.cols);
  out += '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j > 0) out += ' ';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
}

DenseMatrix read_matrix(std::istream& in, const char* what) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(in >> rows >> cols)) {
    throw IoError(std::string("checkpoint: missing shape for ") + what);
  }
  DenseMatrix m(rows, cols);
  for (real& v : m.data) {
    double x = 0;
    if (!(in >> x)) {
      throw IoError(std::string("checkpoint: truncated matrix ") + what);
    }
    v = static_cast<real>(x);
  }
  return m;
}

void expect_word(std::istream& in, const char* expected) {
  std::string word;
  if (!(in >> word) || word != expected) {
    throw IoError(std::string("checkpoint: expected '") + expected +
                  "', got '" + word + "'");
  }
}

}  // namespace

std::string serialize_models(const Models& models) {
  std::string out = "supercm-model 1\n";
  out += "activation ";
  out += models.backbone.activation == Activation::kRelu ? "relu" : "tanh";
  out += '\n';
  out += "layers " + std::to_string(models.backbone.layers.size()) + '\n';
  for (const MlpLayer& layer : models.backbone.layers) {
    out += "weights ";
    append_matrix(out, layer.weights);
    out += "bias ";
    append_matrix(out, layer.bias);
  }
  out += "cm_weights ";
  append_matrix(out, models.cm.weights);
  out += "cm_bias ";
  append_matrix(out, models.cm.bias);
  out += "centroids ";
  append_matrix(out, models.cm.centroids);
  out += "ma_counter " + std::to_string(models.cm.ma_counter) + '\n';
  return out;
}

Models deserialize_models(const std::string& text) {
  std::istringstream in(text);
  expect_word(in, "supercm-model");
  std::size_t version = 0;
  if (!(in >> version) || version != 1) {
    throw IoError("checkpoint: unsupported version");
  }
  Models models;
  expect_word(in, "activation");
  std::string act;
  in >> act;
  if (act == "relu") {
    models.backbone.activation = Activation::kRelu;
  } else if (act == "tanh") {
    models.backbone.activation = Activation::kTanh;
  } else {
    throw IoError("checkpoint: unknown activation '" + act + "'");
  }
  expect_word(in, "layers");
  std::size_t n_layers = 0;
  if (!(in >> n_layers) || n_layers == 0) {
    throw IoError("checkpoint: bad layer count");
  }
  models.backbone.layers.resize(n_layers);
  for (MlpLayer& layer : models.backbone.layers) {
    expect_word(in, "weights");
    layer.weights = read_matrix(in, "layer weights");
    expect_word(in, "bias");
    layer.bias = read_matrix(in, "layer bias");
  }
  expect_word(in, "cm_weights");
  models.cm.weights = read_matrix(in, "cm weights");
  expect_word(in, "cm_bias");
  models.cm.bias = read_matrix(in, "cm bias");
  expect_word(in, "centroids");
  models.cm.centroids = read_matrix(in, "centroids");
  expect_word(in, "ma_counter");
  if (!(in >> models.cm.ma_counter)) {
    throw IoError("checkpoint: missing ma_counter");
  }
  return models;
}

void save_models(const std::string& path, const Models& models) {
  write_text_file(path, serialize_models(models));
}

Models load_models(const std::string& path) {
  return deserialize_models(read_text_file(path));
}

}  // namespace supercm
