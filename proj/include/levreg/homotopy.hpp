#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levreg/common.hpp"
#include "levreg/leverage.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

struct PhaseRecord {
  double eta = 0.0;
  Index probes = 0;
  std::int64_t coordinate_updates = 0;
  std::int64_t sampled_rows = 0;
  bool clamped = false;
  /// Largest relative breach of sigma <= u <= 4 sigma + 1/(n kappa); verify mode only.
  std::optional<double> invariant_excess;
  double wall_ms = 0.0;
};

struct SolverReport {
  std::uint64_t seed = 0;
  Mode mode = Mode::fast;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::vector<PhaseRecord> phases;
  std::int64_t final_sampled_rows = 0;
  WorkCounters work;
  double final_gap_estimate = 0.0;
  bool certified = true;
  std::vector<std::string> warnings;
  /// Phase indices where the verify-mode bracket check failed.
  std::vector<std::string> breached_phases;

  std::vector<double> eta_schedule() const;
  bool any_clamped() const;
};

struct HomotopyOptions {
  double epsilon = 1e-8;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  Mode mode = Mode::fast;
  std::uint64_t seed = 0;
  /// Probe constant for each phase's leverage estimate.
  double jl_c = 3.0;
  /// Fast-mode floor on each phase's probe solve accuracy.
  double probe_epsilon_floor = 1e-6;
  /// Multiplier applied to each phase's estimates.
  double overestimate_factor = 2.0;
  SamplingOptions sampling;
  double inner_accuracy = 1e-2;
  Index chunk = 0;
  /// In verify mode, raise InvariantViolation after the run if any phase breached the bracket.
  bool strict_invariants = false;
  /// Raise NonConvergence once phase work passes this many coordinate updates; 0 disables.
  std::int64_t max_coordinate_updates = 0;
  /// Called at the start of every phase with eta and the scores for A_eta.
  std::function<void(double eta, const Vector& u)> observer;
};

struct SolveResult {
  Vector x;
  SolverReport report;
};

/// Least squares through the ridge homotopy eta_0 >= lambda_max, eta <- 3 eta / 4,
/// carrying leverage overestimates from phase to phase.
SolveResult homotopy_solve(const SparseMatrix& a, const Vector& b, const Vector& x0, const HomotopyOptions& options);

struct LeverageBootstrap {
  /// Overestimates of the leverage scores of A itself.
  Vector u;
  SolverReport report;
};

/// Runs only the eta phases and returns the overestimates they end with.
LeverageBootstrap homotopy_leverage(const SparseMatrix& a, const HomotopyOptions& options);

/// Number of phases the schedule runs for given eta_0 and lambda_min.
int homotopy_phase_count(double eta0, double lambda_min);

/// Largest relative breach of the bracket for u against A_eta; <= 0 means it holds.
double bracket_excess(const AugmentedView& a, const Vector& u);

}  // namespace levreg
