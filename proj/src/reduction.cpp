#include "levreg/reduction.hpp"

#include <cmath>
#include <optional>

namespace levreg {

ReductionConfig ReductionConfig::make(double c, double delta_fail, double r) {
  if (!(c > 0.0 && c < 1.0)) throw ConfigurationError("contraction c must be in (0,1)");
  if (!(delta_fail > 0.0 && delta_fail < 1.0)) throw ConfigurationError("failure probability must be in (0,1)");
  if (!(r >= 1.0)) throw ConfigurationError("estimator distortion must be >= 1");
  ReductionConfig cfg;
  cfg.c = c;
  cfg.delta_fail = delta_fail;
  cfg.r = r;
  const double chain = std::log(2.0 * r * r) / std::log(1.0 / c);
  cfg.T = std::max(1, static_cast<int>(std::ceil(chain - 1e-12)));
  const double reps = std::log(2.0 * chain) / std::log(1.0 / delta_fail);
  cfg.repeats_per_step = std::max(1, static_cast<int>(std::ceil(reps - 1e-12)));
  return cfg;
}

Vector reduction_boost(const ObjectiveFn& f, const Vector& x0, const BaseAlgorithm& base, const GapEstimate& estimate,
                       const ReductionConfig& cfg, double epsilon, Rng& rng, const ReductionOptions& options,
                       ReductionStats* stats) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  if (cfg.T < 1 || cfg.repeats_per_step < 1) throw ConfigurationError("reduction chain must be nonempty");
  ReductionStats local;
  ReductionStats& st = stats ? *stats : local;
  st = ReductionStats{};

  auto checked = [&](const Vector& x) {
    const double m = estimate(x);
    if (!(m >= 0.0)) throw ConfigurationError("gap estimator returned a negative or NaN value");
    return m;
  };

  const int halvings = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / epsilon) - 1e-12)));
  Vector x = x0;
  for (int h = 0; h < halvings; ++h) {
    const double e1 = checked(x);
    if (e1 == 0.0) return x;
    const double f_start = f(x);
    st.halvings += 1;
    st.loops.push_back(0);
    for (;;) {
      if (++st.loops.back() > options.max_loops)
        throw NonConvergence("reduction loop exceeded " + std::to_string(options.max_loops) + " passes");
      Vector xi = x;
      for (int i = 0; i < cfg.T; ++i) {
        std::optional<Vector> best;
        double best_value = 0.0;
        for (int j = 0; j < cfg.repeats_per_step; ++j) {
          Vector cand = base(xi, rng);
          st.base_calls += 1;
          const double v = f(cand);
          if (!best || v < best_value) {
            best = std::move(cand);
            best_value = v;
          }
        }
        xi = std::move(*best);
        if (options.certify_below > 0.0 && checked(xi) <= options.certify_below) {
          st.certified_early = true;
          return xi;
        }
      }
      const double e2 = checked(xi);
      if (e2 / e1 <= 0.5 && f(xi) <= f_start) {
        x = std::move(xi);
        break;
      }
    }
  }
  return x;
}

MarkovResult markov_boost(const TimedProcedure& proc, const ObjectiveFn& f, double epsilon, double gamma,
                          double expected_time, Rng& rng) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigurationError("gamma must be in (0,1)");
  if (!(expected_time > 0.0)) throw ConfigurationError("expected time must be positive");
  const int repeats = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / gamma) - 1e-12)));
  MarkovResult out;
  double best = 0.0;
  bool have = false;
  for (int k = 0; k < repeats; ++k) {
    TimedRun run = proc(epsilon / 2.0, 2.0 * expected_time, rng);
    out.repeats = k + 1;
    const double v = f(run.x);
    if (!have || v < best) {
      out.x = run.x;
      best = v;
      have = true;
    }
    if (run.finished) return out;
  }
  throw BoostFailure("no run finished within its budget", out.x);
}

}  // namespace levreg
