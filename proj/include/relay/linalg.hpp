#pragma once

#include <cstddef>
#include <vector>

namespace relay {

// Dense row-major matrix. Problem sizes here are tiny (gain matrices up to
// 8x8, KKT systems up to ~120x120), so no blocking or sparsity.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// In-place Cholesky factorization A = L L^T (lower triangle). Returns false
// when a pivot falls at or below min_pivot; the caller is expected to add
// diagonal regularization and retry.
bool cholesky_factor(Matrix& a, double min_pivot = 0.0);

// Solves L L^T x = rhs given the factor from cholesky_factor.
void cholesky_solve(const Matrix& chol, std::vector<double>& rhs);

}  // namespace relay
