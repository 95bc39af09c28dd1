#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "supercm/errors.hpp"
#include "supercm/rng.hpp"
#include "supercm/scalar.hpp"

namespace supercm {

// Row-major dense matrix; the universal numeric carrier (samples are rows).
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<real> data;  // rows * cols, row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, real fill = 0)
      : rows(r), cols(c), data(r * c, fill) {}

  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<real>> init);

  real& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  real operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }

  const real* row(std::size_t i) const { return data.data() + i * cols; }
  real* row(std::size_t i) { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return rows == 0 || cols == 0; }

  bool same_shape(const DenseMatrix& other) const {
    return rows == other.rows && cols == other.cols;
  }

  bool all_finite() const;

  bool operator==(const DenseMatrix& other) const = default;
};

// Throws ShapeError unless a and b have identical shape. `what` names the
// operation for the message.
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* what);

// Throws NumericError if any entry is non-finite.
void require_finite(const DenseMatrix& m, const char* what);

DenseMatrix zeros_like(const DenseMatrix& m);

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

void add_in_place(DenseMatrix& a, const DenseMatrix& b);           // a += b
void axpy_in_place(DenseMatrix& a, real s, const DenseMatrix& b);  // a += s*b
void scale_in_place(DenseMatrix& a, real s);

// Sum of rows as a 1 x cols matrix.
DenseMatrix column_sums(const DenseMatrix& m);

// Rows of a stacked on top of rows of b (column counts must match; a matrix
// with zero rows passes through).
DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b);

// Copy of rows [begin, end).
DenseMatrix slice_rows(const DenseMatrix& m, std::size_t begin,
                       std::size_t end);

// Squared L2 norm of row i.
real row_squared_norm(const DenseMatrix& m, std::size_t i);

real squared_distance_rows(const DenseMatrix& a, std::size_t i,
                           const DenseMatrix& b, std::size_t j);

// i.i.d. samples, row-major fill order (deterministic given the rng state).
DenseMatrix random_uniform(std::size_t rows, std::size_t cols, real lo,
                           real hi, Rng& rng);
DenseMatrix random_normal(std::size_t rows, std::size_t cols, real mean,
                          real sd, Rng& rng);

std::string shape_string(const DenseMatrix& m);

}  // namespace supercm
