#pragma once

#include <cstdint>

#include "levreg/sparse_matrix.hpp"

namespace levreg {

/// Exact leverage scores a_i^T (A^T A)^+ a_i, dense and O(n d^2).
Vector oracle_leverage(const Dense& a);
Vector oracle_leverage(const SparseMatrix& a);
Vector oracle_leverage(const AugmentedView& a);

struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 1.0;
  /// trace(A^T A) / lambda_min.
  double kappa_sum = 0.0;
};

/// Eigenvalues of A^T A in ascending order.
Vector oracle_eigenvalues(const Dense& a);
Vector oracle_eigenvalues(const SparseMatrix& a);

/// Throws RankDeficient when lambda_min <= 1e-12 lambda_max.
SpectralBounds oracle_spectral(const Dense& a);
SpectralBounds oracle_spectral(const SparseMatrix& a);
SpectralBounds oracle_spectral(const AugmentedView& a);

/// x* = (A^T A)^-1 A^T b by a pivoted Cholesky of A^T A.
/// Throws RankDeficient when a pivot falls below 1e-12 trace(A^T A).
Vector oracle_solve(const Dense& a, const Vector& b);
Vector oracle_solve(const SparseMatrix& a, const Vector& b);

/// Power iteration on A^T A. Returns the top eigenvalue estimate.
double power_iteration(const SparseMatrix& a, int max_iters, double tol, std::uint64_t seed);

}  // namespace levreg
