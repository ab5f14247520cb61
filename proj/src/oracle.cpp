#include "levreg/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "levreg/errors.hpp"
#include "levreg/random.hpp"

namespace levreg {

Vector oracle_leverage(const Dense& a) {
  Eigen::SelfAdjointEigenSolver<Dense> eig(a.transpose() * a);
  const Vector& w = eig.eigenvalues();
  const double cut = std::max(w.maxCoeff(), 0.0) * 1e-13 * static_cast<double>(a.cols());
  Dense q = a * eig.eigenvectors();
  for (Index j = 0; j < w.size(); ++j) q.col(j) *= w[j] > cut ? 1.0 / std::sqrt(w[j]) : 0.0;
  return q.rowwise().squaredNorm();
}

Vector oracle_leverage(const SparseMatrix& a) { return oracle_leverage(a.to_dense()); }
Vector oracle_leverage(const AugmentedView& a) { return oracle_leverage(a.to_dense()); }

Vector oracle_eigenvalues(const Dense& a) {
  Eigen::SelfAdjointEigenSolver<Dense> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

Vector oracle_eigenvalues(const SparseMatrix& a) { return oracle_eigenvalues(a.to_dense()); }

SpectralBounds oracle_spectral(const Dense& a) {
  const Vector ev = oracle_eigenvalues(a);
  SpectralBounds out;
  if (ev.size() == 0) throw RankDeficient("matrix has no columns");
  out.lambda_min = ev[0];
  out.lambda_max = ev[ev.size() - 1];
  if (!(out.lambda_min > 1e-12 * out.lambda_max)) throw RankDeficient("A^T A is numerically singular");
  out.kappa = out.lambda_max / out.lambda_min;
  out.kappa_sum = a.squaredNorm() / out.lambda_min;
  return out;
}

SpectralBounds oracle_spectral(const SparseMatrix& a) { return oracle_spectral(a.to_dense()); }
SpectralBounds oracle_spectral(const AugmentedView& a) { return oracle_spectral(a.to_dense()); }

Vector oracle_solve(const Dense& a, const Vector& b) {
  if (b.size() != a.rows()) throw DimensionMismatch("oracle_solve: rhs length != rows");
  const Dense gram = a.transpose() * a;
  Eigen::LDLT<Dense> ldlt(gram);
  const double floor = 1e-12 * gram.trace();
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > floor))
    throw RankDeficient("oracle_solve: A^T A is singular");
  Vector x = ldlt.solve(a.transpose() * b);
  // One refinement step against the normal equations.
  x += ldlt.solve(a.transpose() * (b - a * x));
  return x;
}

Vector oracle_solve(const SparseMatrix& a, const Vector& b) { return oracle_solve(a.to_dense(), b); }

double power_iteration(const SparseMatrix& a, int max_iters, double tol, std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0x5eed);
  std::normal_distribution<double> normal;
  Vector v(a.cols());
  for (Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = a.apply_t(a.apply(v));
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - est) <= tol * std::abs(next)) return next;
    est = next;
  }
  return est;
}

}  // namespace levreg
