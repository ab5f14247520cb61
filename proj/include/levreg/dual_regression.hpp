#pragma once

#include <functional>

#include "levreg/common.hpp"
#include "levreg/random.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

struct DualOptions {
  /// Prox weight; must not exceed lambda_min(B^T B).
  double lambda = 0.0;
  /// Relative duality-gap target for each prox subproblem.
  double inner_accuracy = 1e-3;
  /// 0 derives a cap from epsilon.
  int max_prox_steps = 0;
  Mode mode = Mode::fast;
};

/// Approximately minimizes ||Bx - d||^2 per column by prox-point steps whose
/// subproblems are solved in the dual with accelerated coordinate descent.
/// Stops once ||B dx||^2 + lambda ||dx||^2 <= epsilon times the first step's value.
Block dual_regression_solve(const SparseMatrix& b, const Block& rhs, const Block& x0, double epsilon,
                            const DualOptions& options, Rng& rng, WorkCounters* counters = nullptr);
Vector dual_regression_solve(const SparseMatrix& b, const Vector& rhs, const Vector& x0, double epsilon,
                             const DualOptions& options, Rng& rng, WorkCounters* counters = nullptr);

struct PrecondOptions {
  /// Lower bound on lambda_min(Bbar^T Bbar); also the ridge scale.
  double lambda = 0.0;
  double inner_target = 1.0 / 200.0;
  double inner_accuracy = 1e-3;
  int max_steps = 0;
  Mode mode = Mode::fast;
  std::function<void(const Block& x)> observer;
};

/// Iterates x <- argmin ||B x - d||^2 with B = [Bbar; sqrt(lambda/100) I] so that
/// B^T d = B^T B x - A^T (A x - b). Bbar should spectrally approximate A.
Block preconditioned_solve(const AugmentedView& a, const SparseMatrix& bbar, const Block& rhs, const Block& x0,
                           double epsilon, const PrecondOptions& options, Rng& rng,
                           WorkCounters* counters = nullptr);

/// [Bbar; sqrt(ridge) I].
SparseMatrix append_ridge(const SparseMatrix& bbar, double ridge);

}  // namespace levreg
