#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "levreg/errors.hpp"
#include "levreg/random.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

using ObjectiveFn = std::function<double(const Vector& x)>;
/// Randomized improvement step x -> x'.
using BaseAlgorithm = std::function<Vector(const Vector& x, Rng& rng)>;
/// Estimate m(x) with m / r <= F(x) - F* <= r m.
using GapEstimate = std::function<double(const Vector& x)>;

struct ReductionConfig {
  /// Contraction of a successful base call.
  double c = 0.5;
  /// Failure probability of one base call.
  double delta_fail = 0.5;
  /// Estimator distortion.
  double r = 1.0;
  /// Chain length ceil(log_{1/c}(2 r^2)).
  int T = 1;
  /// Base calls per chain step, ceil(log_{1/delta}(2 log_{1/c}(2 r^2))).
  int repeats_per_step = 1;

  static ReductionConfig make(double c, double delta_fail, double r);
};

struct ReductionOptions {
  /// Passes allowed per halving before giving up.
  int max_loops = 64;
  /// Return as soon as the estimate falls to this value; 0 disables.
  double certify_below = 0.0;
};

struct ReductionStats {
  int halvings = 0;
  /// Repeat-loop passes, one entry per halving.
  std::vector<int> loops;
  std::int64_t base_calls = 0;
  bool certified_early = false;
};

/// Boosts a constant-probability contraction into epsilon accuracy: each halving
/// repeats {T chain steps, each keeping the best of repeats_per_step base calls}
/// until E = m(x_T) / m(x_start) <= 1/2 and F did not increase.
Vector reduction_boost(const ObjectiveFn& f, const Vector& x0, const BaseAlgorithm& base, const GapEstimate& estimate,
                       const ReductionConfig& cfg, double epsilon, Rng& rng, const ReductionOptions& options = {},
                       ReductionStats* stats = nullptr);

struct TimedRun {
  Vector x;
  bool finished = false;
};

/// Runs an expected-time procedure under a hard budget: (epsilon, budget, rng) -> run.
using TimedProcedure = std::function<TimedRun(double epsilon, double budget, Rng& rng)>;

class BoostFailure : public Error {
 public:
  BoostFailure(const std::string& what, Vector best) : Error(what), best(std::move(best)) {}
  Vector best;
};

struct MarkovResult {
  Vector x;
  int repeats = 0;
};

/// Runs proc at accuracy epsilon / 2 with budget 2 * expected_time, up to
/// max(1, ceil(log2(1 / gamma))) times, stopping at the first run that finishes.
/// Returns the lowest-value iterate seen; throws BoostFailure if no run finished.
MarkovResult markov_boost(const TimedProcedure& proc, const ObjectiveFn& f, double epsilon, double gamma,
                          double expected_time, Rng& rng);

}  // namespace levreg
