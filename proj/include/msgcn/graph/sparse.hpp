#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msgcn/core/matrix.hpp"

namespace msgcn {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed-row sparse matrix. Column indices are strictly increasing
// within each row and explicit zeros are never stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols)
      : n_rows_(n_rows), n_cols_(n_cols),
        row_offsets_(static_cast<std::size_t>(n_rows) + 1, 0) {}

  // Duplicate (row, col) entries are summed; zero values are dropped.
  static SparseMatrix from_triplets(int n_rows, int n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_parts(int n_rows, int n_cols,
                                 std::vector<std::size_t> row_offsets,
                                 std::vector<int> col_indices,
                                 std::vector<double> values);

  int n_rows() const { return n_rows_; }
  int n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_cols(int r) const {
    return {col_indices_.data() + row_offsets_[r],
            row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(int r) const {
    return {values_.data() + row_offsets_[r],
            row_offsets_[r + 1] - row_offsets_[r]};
  }
  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  double value_at(int r, int c) const;
  double row_sum(int r) const;
  bool is_symmetric() const;  // exact equality of (i,j) and (j,i)
  Matrix to_dense() const;

  // out = A * x, with x dense (n_cols x d).
  Matrix multiply(const Matrix& x) const;
  void multiply_into(const Matrix& x, Matrix& out) const;

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

// Degree-normalized adjacency with self-loops: D^(-1/2) (A + I) D^(-1/2)
// where D(i,i) is the row sum of A + I. Symmetric input yields exactly
// symmetric output; an isolated node keeps a unit self-loop.
SparseMatrix normalize_adjacency(const SparseMatrix& adj);

}  // namespace msgcn
