#pragma once

#include <functional>
#include <vector>

#include "levreg/common.hpp"
#include "levreg/random.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

struct SamplingOptions {
  double k = 8.0;
  double delta = 0.1;
  /// 0 uses k / delta^2.
  double k_prime = 0.0;
  /// 0 uses ceil(64 ln n).
  int max_attempts = 0;
  /// When positive, kept rows above C d delta^-2 ln n raise InvariantViolation.
  double kept_constant = 0.0;
};

struct SampledMatrix {
  SparseMatrix b;
  std::vector<Index> kept;
  Vector probabilities;
  int attempts = 0;
  Index zero_score_rows = 0;
};

/// Keeps row i with probability p_i = min(1, k' u_i ln n), rescaled by 1/sqrt(p_i).
/// Redraws until sum ||b_i|| <= 2 sum sqrt(k' u_i ln n) ||a_i||.
SampledMatrix sample_rows(const AugmentedView& a, const Vector& u, const SamplingOptions& options, Rng& rng);
SampledMatrix sample_rows(const SparseMatrix& a, const Vector& u, const SamplingOptions& options, Rng& rng);

/// Solves a block of regressions against a fixed matrix: (rhs, x0, epsilon, rng) -> x.
using RegressionSolver = std::function<Block(const Block& rhs, const Block& x0, double epsilon, Rng& rng)>;

struct LsOptions {
  /// Lower bound on lambda_min(A^T A) for the matrix being solved against.
  double lambda_min = 0.0;
  SamplingOptions sampling;
  double inner_accuracy = 1e-3;
  Mode mode = Mode::fast;
  /// Fresh samples drawn after a preconditioner or convergence failure.
  int retries = 3;
  std::function<void(const Block& x)> observer;
};

/// Samples a spectral approximation of A from the overestimates u and runs the
/// preconditioned iteration with it.
Block solve_using_ls(const AugmentedView& a, const Vector& u, const Block& rhs, const Block& x0, double epsilon,
                     const LsOptions& options, Rng& rng, WorkCounters* counters = nullptr);
Vector solve_using_ls(const AugmentedView& a, const Vector& u, const Vector& rhs, const Vector& x0,
                      double epsilon, const LsOptions& options, Rng& rng, WorkCounters* counters = nullptr);

struct JlOptions {
  double c = 48.0;
  /// 0 uses ceil(c ln n / delta^2).
  Index probes = 0;
  /// Upper bound on the condition number of A^T A.
  double kappa = 1.0;
  double epsilon_floor = 1e-12;
  /// Right-hand sides solved together; 0 picks from the row count.
  Index chunk = 0;
  Mode mode = Mode::fast;
};

struct LeverageEstimate {
  Vector scores;
  Index probes = 0;
  double epsilon_inner = 0.0;
  /// The inner accuracy hit epsilon_floor.
  bool clamped = false;
};

/// Johnson-Lindenstrauss leverage estimates from regressions against Gaussian
/// right-hand sides. Output satisfies sigma <= tau <= (1 + delta) sigma + delta / (n kappa) w.h.p.
LeverageEstimate compute_ls(const AugmentedView& a, double delta, const RegressionSolver& solver,
                            const JlOptions& options, Rng& rng, WorkCounters* counters = nullptr);

Index jl_probe_count(double c, Index rows, double delta);
double jl_inner_epsilon(Index rows, Index cols, double delta, double kappa);

}  // namespace levreg
