#include <gtest/gtest.h>

#include <cmath>

#include "levreg/reduction.hpp"

using namespace levreg;

namespace {

double half_square(const Vector& x) { return 0.5 * x.squaredNorm(); }

}  // namespace

TEST(ReductionConfig, ChainLengthAndRepeats) {
  const ReductionConfig a = ReductionConfig::make(0.5, 0.5, 1.0);
  EXPECT_EQ(a.T, 1);
  EXPECT_EQ(a.repeats_per_step, 1);
  const ReductionConfig b = ReductionConfig::make(0.5, 0.5, 2.0);
  EXPECT_EQ(b.T, 3);
  EXPECT_EQ(b.repeats_per_step, 3);
  const ReductionConfig c = ReductionConfig::make(0.25, 0.1, 10.0);
  EXPECT_EQ(c.T, static_cast<int>(std::ceil(std::log(200.0) / std::log(4.0))));
  EXPECT_EQ(c.repeats_per_step, static_cast<int>(std::ceil(std::log(2.0 * std::log(200.0) / std::log(4.0)) /
                                                           std::log(10.0))));
  EXPECT_THROW(ReductionConfig::make(1.0, 0.5, 1.0), ConfigurationError);
  EXPECT_THROW(ReductionConfig::make(0.5, 0.5, 0.5), ConfigurationError);
}

TEST(ReductionBoost, DeterministicBaseAcceptsFirstPass) {
  const ReductionConfig cfg = ReductionConfig::make(0.5, 0.5, 1.0);
  const BaseAlgorithm base = [](const Vector& x, Rng&) { return Vector(x / std::sqrt(2.0)); };
  Rng rng(1);
  ReductionStats st;
  const Vector x0 = Vector::Constant(1, 3.0);
  const double eps = std::ldexp(1.0, -10);
  const Vector x = reduction_boost(half_square, x0, base, half_square, cfg, eps, rng, {}, &st);
  EXPECT_EQ(st.halvings, 10);
  for (const int l : st.loops) EXPECT_EQ(l, 1);
  EXPECT_EQ(st.base_calls, 10 * cfg.T * cfg.repeats_per_step);
  EXPECT_LE(half_square(x), eps * half_square(x0) * (1.0 + 1e-12));
}

TEST(ReductionBoost, CoinBaseReachesTarget) {
  const ReductionConfig cfg = ReductionConfig::make(0.5, 0.5, 2.0);
  const BaseAlgorithm base = [](const Vector& x, Rng& r) {
    return std::bernoulli_distribution(0.5)(r) ? Vector(x / std::sqrt(2.0)) : x;
  };
  const GapEstimate grad_sq = [](const Vector& x) { return x.squaredNorm(); };
  Rng rng(2);
  ReductionStats st;
  const Vector x0 = Vector::Constant(2, 1.0);
  const Vector x = reduction_boost(half_square, x0, base, grad_sq, cfg, 1e-6, rng, {}, &st);
  EXPECT_LE(half_square(x), 1e-6 * half_square(x0));
  EXPECT_EQ(st.halvings, 20);
}

TEST(ReductionBoost, CertifiedEarlyExitAndOptimumStart) {
  const ReductionConfig cfg = ReductionConfig::make(0.5, 0.5, 1.0);
  const BaseAlgorithm base = [](const Vector& x, Rng&) { return Vector(0.1 * x); };
  Rng rng(3);
  ReductionStats st;
  ReductionOptions o;
  o.certify_below = 1e-3;
  reduction_boost(half_square, Vector::Ones(1), base, half_square, cfg, 1e-12, rng, o, &st);
  EXPECT_TRUE(st.certified_early);
  EXPECT_LT(st.halvings, 40);

  const Vector zero = Vector::Zero(1);
  EXPECT_EQ(reduction_boost(half_square, zero, base, half_square, cfg, 1e-3, rng), zero);
}

TEST(ReductionBoost, NegativeEstimateAndStuckBaseAreErrors) {
  const ReductionConfig cfg = ReductionConfig::make(0.5, 0.5, 1.0);
  const BaseAlgorithm identity = [](const Vector& x, Rng&) { return x; };
  Rng rng(4);
  const GapEstimate negative = [](const Vector&) { return -1.0; };
  EXPECT_THROW(reduction_boost(half_square, Vector::Ones(1), identity, negative, cfg, 0.5, rng), ConfigurationError);
  ReductionOptions o;
  o.max_loops = 5;
  EXPECT_THROW(reduction_boost(half_square, Vector::Ones(1), identity, half_square, cfg, 0.5, rng, o),
               NonConvergence);
}

TEST(MarkovBoost, DeterministicProcedurePassesThrough) {
  const TimedProcedure proc = [](double, double, Rng&) { return TimedRun{Vector::Constant(1, 7.0), true}; };
  Rng rng(1);
  const MarkovResult r = markov_boost(proc, half_square, 1e-3, 1.0 / 32.0, 1.0, rng);
  EXPECT_EQ(r.repeats, 1);
  EXPECT_EQ(r.x[0], 7.0);
}

TEST(MarkovBoost, PassesHalfAccuracyAndDoubleBudget) {
  double seen_eps = 0.0, seen_budget = 0.0;
  const TimedProcedure proc = [&](double eps, double budget, Rng&) {
    seen_eps = eps;
    seen_budget = budget;
    return TimedRun{Vector::Zero(1), true};
  };
  Rng rng(1);
  markov_boost(proc, half_square, 0.2, 0.5, 3.0, rng);
  EXPECT_DOUBLE_EQ(seen_eps, 0.1);
  EXPECT_DOUBLE_EQ(seen_budget, 6.0);
}

TEST(MarkovBoost, GammaNearOneRunsOnce) {
  int calls = 0;
  const TimedProcedure proc = [&](double, double, Rng&) {
    ++calls;
    return TimedRun{Vector::Ones(1), false};
  };
  Rng rng(1);
  EXPECT_THROW(markov_boost(proc, half_square, 0.1, 1.0 - 1e-9, 1.0, rng), BoostFailure);
  EXPECT_EQ(calls, 1);
}

TEST(MarkovBoost, FailureCarriesBestIterate) {
  int k = 0;
  const TimedProcedure proc = [&](double, double, Rng&) {
    const double v[] = {3.0, -0.5, 2.0, 1.0, 4.0};
    return TimedRun{Vector::Constant(1, v[k++ % 5]), false};
  };
  Rng rng(1);
  try {
    markov_boost(proc, half_square, 0.1, 1.0 / 32.0, 1.0, rng);
    FAIL();
  } catch (const BoostFailure& e) {
    EXPECT_EQ(k, 5);
    EXPECT_EQ(e.best[0], -0.5);
  }
}
