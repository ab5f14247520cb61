#include "levreg/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levreg/errors.hpp"

namespace levreg {

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr,
                           std::vector<Index> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() {
  if (rows_ < 0 || cols_ < 0) throw InvalidMatrix("negative shape");
  if (static_cast<Index>(row_ptr_.size()) != rows_ + 1)
    throw InvalidMatrix("row_ptr must have rows+1 entries");
  if (row_ptr_.front() != 0) throw InvalidMatrix("row_ptr must start at 0");
  if (col_idx_.size() != values_.size()) throw InvalidMatrix("col_idx and values differ in length");
  if (row_ptr_.back() != static_cast<Index>(values_.size()))
    throw InvalidMatrix("row_ptr must end at nnz");
  max_row_nnz_ = 0;
  for (Index i = 0; i < rows_; ++i) {
    const Index b = row_ptr_[i], e = row_ptr_[i + 1];
    if (e < b) throw InvalidMatrix("row_ptr must be nondecreasing");
    max_row_nnz_ = std::max(max_row_nnz_, e - b);
    for (Index k = b; k < e; ++k) {
      const Index c = col_idx_[k];
      if (c < 0 || c >= cols_) throw InvalidMatrix("column index out of range in row " + std::to_string(i));
      if (k > b && c <= col_idx_[k - 1])
        throw InvalidMatrix("column indices must be strictly increasing in row " + std::to_string(i));
      if (!std::isfinite(values_[k])) throw InvalidMatrix("non-finite value in row " + std::to_string(i));
      if (values_[k] == 0.0) throw InvalidMatrix("explicitly stored zero in row " + std::to_string(i));
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::vector<std::tuple<Index, Index, double>> entries) {
  for (const auto& [r, c, v] : entries) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) throw InvalidMatrix("triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y));
  });
  std::vector<Index> ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> idx;
  std::vector<double> val;
  idx.reserve(entries.size());
  val.reserve(entries.size());
  Index last_r = -1, last_c = -1;
  for (const auto& [r, c, v] : entries) {
    if (r == last_r && c == last_c) {
      val.back() += v;
      continue;
    }
    idx.push_back(c);
    val.push_back(v);
    ++ptr[r + 1];
    last_r = r;
    last_c = c;
  }
  // Drop entries that cancelled to zero.
  std::vector<Index> out_ptr{0};
  std::size_t w = 0, k = 0;
  for (Index i = 0; i < rows; ++i) {
    const std::size_t end = k + static_cast<std::size_t>(ptr[i + 1]);
    for (; k < end; ++k) {
      if (val[k] == 0.0) continue;
      idx[w] = idx[k];
      val[w] = val[k];
      ++w;
    }
    out_ptr.push_back(static_cast<Index>(w));
  }
  idx.resize(w);
  val.resize(w);
  return SparseMatrix(rows, cols, std::move(out_ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::from_dense(const Dense& a, double drop_below) {
  std::vector<Index> ptr{0};
  std::vector<Index> idx;
  std::vector<double> val;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (v != 0.0 && std::abs(v) >= drop_below) {
        idx.push_back(j);
        val.push_back(v);
      }
    }
    ptr.push_back(static_cast<Index>(idx.size()));
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

Vector SparseMatrix::row_norms_sq() const {
  Vector out(rows_);
  for (Index i = 0; i < rows_; ++i) out[i] = row_norm_sq(i);
  return out;
}

Vector SparseMatrix::apply(const Vector& x) const {
  if (x.size() != cols_) throw DimensionMismatch("apply: vector length != cols");
  Vector y(rows_);
  for (Index i = 0; i < rows_; ++i) y[i] = row(i).dot(x.data());
  return y;
}

Vector SparseMatrix::apply_t(const Vector& y) const {
  if (y.size() != rows_) throw DimensionMismatch("apply_t: vector length != rows");
  Vector x = Vector::Zero(cols_);
  for (Index i = 0; i < rows_; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) x[col_idx_[k]] += values_[k] * yi;
  }
  return x;
}

Block SparseMatrix::apply(const Block& x) const {
  if (x.rows() != cols_) throw DimensionMismatch("apply: block rows != cols");
  const Index w = x.cols();
  Block y = Block::Zero(rows_, w);
  for (Index i = 0; i < rows_; ++i) {
    double* __restrict yi = y.row(i).data();
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const double a = values_[k];
      const double* __restrict xr = x.row(col_idx_[k]).data();
      for (Index r = 0; r < w; ++r) yi[r] += a * xr[r];
    }
  }
  return y;
}

Block SparseMatrix::apply_t(const Block& y) const {
  if (y.rows() != rows_) throw DimensionMismatch("apply_t: block rows != rows");
  const Index w = y.cols();
  Block x = Block::Zero(cols_, w);
  for (Index i = 0; i < rows_; ++i) {
    const double* __restrict yi = y.row(i).data();
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const double a = values_[k];
      double* __restrict xr = x.row(col_idx_[k]).data();
      for (Index r = 0; r < w; ++r) xr[r] += a * yi[r];
    }
  }
  return x;
}

Vector col_sq_norms(const Block& a) {
  Vector out = Vector::Zero(a.cols());
  for (Index i = 0; i < a.rows(); ++i) out.array() += a.row(i).transpose().array().square();
  return out;
}

Vector col_dots(const Block& a, const Block& b) {
  Vector out = Vector::Zero(a.cols());
  for (Index i = 0; i < a.rows(); ++i) out.array() += a.row(i).transpose().array() * b.row(i).transpose().array();
  return out;
}

Dense SparseMatrix::to_dense() const {
  Dense a = Dense::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) a(i, col_idx_[k]) += values_[k];
  return a;
}

AugmentedView::AugmentedView(const SparseMatrix& a, double eta) : a_(&a), eta_(eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigurationError("eta must be finite and >= 0");
}

double AugmentedView::row_norm_sq(Index i) const {
  return i < a_->rows() ? a_->row_norm_sq(i) : eta_;
}

Vector AugmentedView::row_norms_sq() const {
  Vector out(rows());
  out.head(a_->rows()) = a_->row_norms_sq();
  if (augmented()) out.tail(a_->cols()).setConstant(eta_);
  return out;
}

Vector AugmentedView::apply(const Vector& x) const {
  Vector y(rows());
  y.head(a_->rows()) = a_->apply(x);
  if (augmented()) y.tail(a_->cols()) = std::sqrt(eta_) * x;
  return y;
}

Vector AugmentedView::apply_t(const Vector& y) const {
  if (y.size() != rows()) throw DimensionMismatch("apply_t: vector length != rows");
  Vector x = a_->apply_t(Vector(y.head(a_->rows())));
  if (augmented()) x += std::sqrt(eta_) * y.tail(a_->cols());
  return x;
}

Block AugmentedView::apply(const Block& x) const {
  Block y(rows(), x.cols());
  y.topRows(a_->rows()) = a_->apply(x);
  if (augmented()) y.bottomRows(a_->cols()) = std::sqrt(eta_) * x;
  return y;
}

Block AugmentedView::apply_t(const Block& y) const {
  if (y.rows() != rows()) throw DimensionMismatch("apply_t: block rows != rows");
  Block x = a_->apply_t(Block(y.topRows(a_->rows())));
  if (augmented()) x += std::sqrt(eta_) * y.bottomRows(a_->cols());
  return x;
}

Dense AugmentedView::to_dense() const {
  Dense a(rows(), cols());
  a.topRows(a_->rows()) = a_->to_dense();
  if (augmented()) a.bottomRows(a_->cols()) = std::sqrt(eta_) * Dense::Identity(cols(), cols());
  return a;
}

}  // namespace levreg
