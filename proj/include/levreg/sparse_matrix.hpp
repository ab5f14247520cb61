#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace levreg {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Dense = Eigen::MatrixXd;
/// Column r of a block is one independent right-hand side.
using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RowView {
  std::span<const Index> cols;
  std::span<const double> vals;

  double dot(const double* x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * x[cols[k]];
    return s;
  }
  double norm_sq() const {
    double s = 0.0;
    for (double v : vals) s += v * v;
    return s;
  }
};

/// Immutable CSR matrix. Column indices are strictly increasing within a row
/// and no stored value is zero.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  /// Duplicates are summed; entries that sum to zero are dropped.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::vector<std::tuple<Index, Index, double>> entries);
  static SparseMatrix from_dense(const Dense& a, double drop_below = 0.0);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  Index row_nnz(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  /// s(A), the largest number of nonzeros in a row.
  Index max_row_nnz() const { return max_row_nnz_; }

  RowView row(Index i) const {
    const auto b = static_cast<std::size_t>(row_ptr_[i]);
    const auto e = static_cast<std::size_t>(row_ptr_[i + 1]);
    return {std::span<const Index>(col_idx_).subspan(b, e - b),
            std::span<const double>(values_).subspan(b, e - b)};
  }
  double row_norm_sq(Index i) const { return row(i).norm_sq(); }
  Vector row_norms_sq() const;

  Vector apply(const Vector& x) const;
  Vector apply_t(const Vector& y) const;
  Block apply(const Block& x) const;
  Block apply_t(const Block& y) const;

  Dense to_dense() const;

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

 private:
  void validate();

  Index rows_ = 0;
  Index cols_ = 0;
  Index max_row_nnz_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Per-column squared norms and inner products of row-major blocks.
Vector col_sq_norms(const Block& a);
Vector col_dots(const Block& a, const Block& b);

/// A_eta = [A; sqrt(eta) I] without materializing the identity rows.
/// With eta == 0 the view is A itself (no extra rows).
class AugmentedView {
 public:
  explicit AugmentedView(const SparseMatrix& a, double eta = 0.0);

  const SparseMatrix& base() const { return *a_; }
  double eta() const { return eta_; }
  bool augmented() const { return eta_ > 0.0; }
  Index rows() const { return a_->rows() + (augmented() ? a_->cols() : 0); }
  Index cols() const { return a_->cols(); }
  Index base_rows() const { return a_->rows(); }
  Index nnz() const { return a_->nnz() + (augmented() ? a_->cols() : 0); }

  double row_norm_sq(Index i) const;
  Vector row_norms_sq() const;

  Vector apply(const Vector& x) const;
  Vector apply_t(const Vector& y) const;
  Block apply(const Block& x) const;
  Block apply_t(const Block& y) const;

  Dense to_dense() const;

 private:
  const SparseMatrix* a_;
  double eta_;
};

}  // namespace levreg
