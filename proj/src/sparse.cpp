#include "msgcn/graph/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "msgcn/core/error.hpp"

namespace msgcn {

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  SparseMatrix m(n_rows, n_cols);
  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const int r = triplets[i].row;
    const int c = triplets[i].col;
    if (r < 0 || r >= n_rows || c < 0 || c >= n_cols) {
      throw Error(ErrorCode::kShapeMismatch, "triplet index out of range");
    }
    double v = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      v += triplets[i].value;
      ++i;
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kShapeMismatch, "non-finite sparse entry");
    }
    if (v == 0.0) continue;
    m.col_indices_.push_back(c);
    m.values_.push_back(v);
    ++m.row_offsets_[r + 1];
  }
  for (int r = 0; r < n_rows; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
  return m;
}

SparseMatrix SparseMatrix::from_parts(int n_rows, int n_cols,
                                      std::vector<std::size_t> row_offsets,
                                      std::vector<int> col_indices,
                                      std::vector<double> values) {
  if (row_offsets.size() != static_cast<std::size_t>(n_rows) + 1 ||
      col_indices.size() != values.size() || row_offsets.back() != values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "inconsistent CSR arrays");
  }
  SparseMatrix m(n_rows, n_cols);
  m.row_offsets_ = std::move(row_offsets);
  m.col_indices_ = std::move(col_indices);
  m.values_ = std::move(values);
  return m;
}

double SparseMatrix::value_at(int r, int c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
}

double SparseMatrix::row_sum(int r) const {
  double s = 0.0;
  for (double v : row_values(r)) s += v;
  return s;
}

bool SparseMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  for (int r = 0; r < n_rows_; ++r) {
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (value_at(cols[k], r) != vals[k]) return false;
    }
  }
  return true;
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(n_rows_, n_cols_);
  for (int r = 0; r < n_rows_; ++r) {
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) out(r, cols[k]) = vals[k];
  }
  return out;
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
  Matrix out(n_rows_, x.cols());
  multiply_into(x, out);
  return out;
}

void SparseMatrix::multiply_into(const Matrix& x, Matrix& out) const {
  if (x.rows() != n_cols_ || out.rows() != n_rows_ || out.cols() != x.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "sparse multiply shape mismatch");
  }
  const int d = x.cols();
  for (int r = 0; r < n_rows_; ++r) {
    double* orow = out.row(r);
    std::fill(orow, orow + d, 0.0);
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double v = vals[k];
      const double* xrow = x.row(cols[k]);
      for (int j = 0; j < d; ++j) orow[j] += v * xrow[j];
    }
  }
}

SparseMatrix normalize_adjacency(const SparseMatrix& adj) {
  if (adj.n_rows() != adj.n_cols()) {
    throw Error(ErrorCode::kShapeMismatch, "normalize expects a square matrix");
  }
  const int n = adj.n_rows();
  // Degrees of A + I; the unit self-loop keeps isolated nodes invertible.
  std::vector<double> inv_sqrt(n);
  for (int r = 0; r < n; ++r) {
    // row_sum already includes any stored diagonal; add the identity.
    double deg = adj.row_sum(r) + 1.0;
    inv_sqrt[r] = 1.0 / std::sqrt(deg);
  }
  std::vector<Triplet> triplets;
  triplets.reserve(adj.nnz() + static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    auto cols = adj.row_cols(r);
    auto vals = adj.row_values(r);
    bool diag_seen = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v = vals[k];
      if (cols[k] == r) {
        v += 1.0;
        diag_seen = true;
      }
      // Grouping the two scale factors first keeps the (i,j) and (j,i)
      // entries bit-identical; left-to-right evaluation would round the
      // two orders differently.
      triplets.push_back({r, cols[k], v * (inv_sqrt[r] * inv_sqrt[cols[k]])});
    }
    if (!diag_seen) {
      triplets.push_back({r, r, inv_sqrt[r] * inv_sqrt[r]});
    }
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

}  // namespace msgcn
