#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "msgcn/core/error.hpp"

namespace msgcn {

// Dense row-major matrix of doubles. Training runs at 64-bit precision so
// gradient checks can use tight tolerances.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              fill) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double max_row_norm() const {
    double best = 0.0;
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* p = row(r);
      for (int c = 0; c < cols_; ++c) s += p[c] * p[c];
      best = std::max(best, std::sqrt(s));
    }
    return best;
  }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);

// out = a^T * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

// out = a * b^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

void add_in_place(Matrix& a, const Matrix& b);
void scale_in_place(Matrix& a, double s);

}  // namespace msgcn
