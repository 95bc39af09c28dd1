#include "supercm/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace supercm {

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<real>> init) {
  DenseMatrix m;
  m.rows = init.size();
  m.cols = init.size() ? init.begin()->size() : 0;
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : init) {
    if (r.size() != m.cols) {
      throw ShapeError("from_rows: ragged initializer");
    }
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

bool DenseMatrix::all_finite() const {
  for (real v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     shape_string(a) + " vs " + shape_string(b));
  }
}

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.all_finite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

DenseMatrix zeros_like(const DenseMatrix& m) {
  return DenseMatrix(m.rows, m.cols);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul: " + shape_string(a) + " * " + shape_string(b));
  }
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const real* ai = a.row(i);
    real* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const real aik = ai[k];
      if (aik == 0) continue;
      const real* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += aik * bk[j];
      }
    }
  }
  return c;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows) {
    throw ShapeError("matmul_at_b: " + shape_string(a) + "^T * " +
                     shape_string(b));
  }
  DenseMatrix c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const real* ak = a.row(k);
    const real* bk = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const real aki = ak[i];
      if (aki == 0) continue;
      real* ci = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += aki * bk[j];
      }
    }
  }
  return c;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.cols) {
    throw ShapeError("matmul_a_bt: " + shape_string(a) + " * " +
                     shape_string(b) + "^T");
  }
  DenseMatrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const real* ai = a.row(i);
    real* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const real* bj = b.row(j);
      real s = 0;
      for (std::size_t k = 0; k < a.cols; ++k) {
        s += ai[k] * bj[k];
      }
      ci[j] = s;
    }
  }
  return c;
}

void add_in_place(DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void axpy_in_place(DenseMatrix& a, real s, const DenseMatrix& b) {
  require_same_shape(a, b, "axpy_in_place");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

void scale_in_place(DenseMatrix& a, real s) {
  for (real& v : a.data) v *= s;
}

DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows == 0) return b;
  if (b.rows == 0) return a;
  if (a.cols != b.cols) {
    throw ShapeError("vstack: " + shape_string(a) + " on " + shape_string(b));
  }
  DenseMatrix out(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
  return out;
}

DenseMatrix slice_rows(const DenseMatrix& m, std::size_t begin,
                       std::size_t end) {
  if (begin > end || end > m.rows) {
    throw ArgumentError("slice_rows: range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") for " + shape_string(m));
  }
  DenseMatrix out(end - begin, m.cols);
  std::copy(m.data.begin() + begin * m.cols, m.data.begin() + end * m.cols,
            out.data.begin());
  return out;
}

DenseMatrix column_sums(const DenseMatrix& m) {
  DenseMatrix s(1, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const real* mi = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) s.data[j] += mi[j];
  }
  return s;
}

real row_squared_norm(const DenseMatrix& m, std::size_t i) {
  const real* r = m.row(i);
  real s = 0;
  for (std::size_t j = 0; j < m.cols; ++j) s += r[j] * r[j];
  return s;
}

real squared_distance_rows(const DenseMatrix& a, std::size_t i,
                           const DenseMatrix& b, std::size_t j) {
  if (a.cols != b.cols) {
    throw ShapeError("squared_distance_rows: column mismatch");
  }
  const real* ra = a.row(i);
  const real* rb = b.row(j);
  real s = 0;
  for (std::size_t k = 0; k < a.cols; ++k) {
    const real d = ra[k] - rb[k];
    s += d * d;
  }
  return s;
}

DenseMatrix random_uniform(std::size_t rows, std::size_t cols, real lo,
                           real hi, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (real& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

DenseMatrix random_normal(std::size_t rows, std::size_t cols, real mean,
                          real sd, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (real& v : m.data) v = mean + sd * rng.normal();
  return m;
}

std::string shape_string(const DenseMatrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace supercm
