#include <gtest/gtest.h>

#include <cmath>

#include "levreg/errors.hpp"
#include "levreg/generate.hpp"
#include "levreg/homotopy.hpp"
#include "levreg/oracle.hpp"
#include "levreg/report.hpp"

using namespace levreg;

namespace {

double gap(const SparseMatrix& a, const Vector& x, const Vector& x0, const Vector& xs) {
  return a.apply(Vector(x - xs)).squaredNorm() / a.apply(Vector(x0 - xs)).squaredNorm();
}

}  // namespace

TEST(Homotopy, IdentityReturnsRhs) {
  const SparseMatrix eye = SparseMatrix::from_dense(Dense::Identity(5, 5));
  const Vector b = Vector::LinSpaced(5, -1, 1);
  HomotopyOptions o;
  o.lambda_min = 1.0;
  const SolveResult r = homotopy_solve(eye, b, Vector::Zero(5), o);
  EXPECT_LT((r.x - b).norm(), 1e-4 * b.norm());
}

TEST(Homotopy, GaussianVerifyModeMeetsGapAndInvariant) {
  const Instance inst = generate(InstanceKind::gaussian, 400, 10, 1.0, 21);
  HomotopyOptions o;
  o.mode = Mode::verify;
  o.strict_invariants = true;
  o.seed = 3;
  const Vector x0 = Vector::Zero(10);
  const SolveResult r = homotopy_solve(inst.a, inst.b, x0, o);
  EXPECT_LE(gap(inst.a, r.x, x0, oracle_solve(inst.a, inst.b)), 1e-8);
  EXPECT_TRUE(r.report.breached_phases.empty());
  for (const PhaseRecord& p : r.report.phases) {
    ASSERT_TRUE(p.invariant_excess.has_value());
    EXPECT_LE(*p.invariant_excess, 1e-9);
  }
}

TEST(Homotopy, PhaseScheduleFollowsThreeQuarters) {
  const Instance inst = generate(InstanceKind::ill_conditioned, 100, 4, 1e4, 22);
  const SpectralBounds sb = oracle_spectral(inst.a);
  HomotopyOptions o;
  o.lambda_min = sb.lambda_min;
  o.seed = 1;
  const LeverageBootstrap boot = homotopy_leverage(inst.a, o);
  const std::vector<double> eta = boot.report.eta_schedule();
  ASSERT_FALSE(eta.empty());
  EXPECT_GE(eta.front(), sb.lambda_max);
  for (std::size_t k = 1; k < eta.size(); ++k) EXPECT_DOUBLE_EQ(eta[k], 0.75 * eta[k - 1]);
  EXPECT_GT(eta.back(), sb.lambda_min / 10.0);
  EXPECT_LE(0.75 * eta.back(), sb.lambda_min / 10.0);
  const int expected = static_cast<int>(std::ceil(std::log(10.0 * sb.kappa) / std::log(4.0 / 3.0)));
  EXPECT_LE(std::abs(static_cast<int>(eta.size()) - expected), 1);
  EXPECT_EQ(static_cast<int>(eta.size()), homotopy_phase_count(eta.front(), sb.lambda_min));
}

TEST(Homotopy, InitialOverestimatesAreValid) {
  const Instance inst = generate(InstanceKind::gaussian, 60, 4, 1.0, 23);
  HomotopyOptions o;
  o.lambda_min = oracle_spectral(inst.a).lambda_min;
  bool first = true;
  double excess = 1.0;
  Vector u0;
  double eta0 = 0.0;
  o.observer = [&](double eta, const Vector& u) {
    if (!first) return;
    first = false;
    eta0 = eta;
    u0 = u;
    excess = bracket_excess(AugmentedView(inst.a, eta), u);
  };
  homotopy_leverage(inst.a, o);
  EXPECT_LE(excess, 0.0);
  EXPECT_LT((u0.head(60) - inst.a.row_norms_sq() / eta0).norm(), 1e-14);
  EXPECT_EQ(u0.tail(4), Vector::Ones(4));
}

TEST(Homotopy, BracketExcessSign) {
  const Instance inst = generate(InstanceKind::gaussian, 40, 3, 1.0, 24);
  const AugmentedView v(inst.a, 0.5);
  const Vector sigma = oracle_leverage(v);
  EXPECT_LE(bracket_excess(v, sigma), 0.0);
  EXPECT_GT(bracket_excess(v, Vector(0.5 * sigma)), 0.0);
  EXPECT_GT(bracket_excess(v, Vector(5.0 * sigma.array() + 1.0)), 0.0);
}

TEST(Homotopy, MissingLambdaMinIsConfigurationError) {
  const Instance inst = generate(InstanceKind::gaussian, 20, 2, 1.0, 25);
  HomotopyOptions o;
  EXPECT_THROW(homotopy_solve(inst.a, inst.b, Vector::Zero(2), o), ConfigurationError);
  o.lambda_min = 1.0;
  EXPECT_THROW(homotopy_solve(inst.a, Vector::Ones(3), Vector::Zero(2), o), DimensionMismatch);
}

TEST(Homotopy, SameSeedSameReport) {
  const Instance inst = generate(InstanceKind::gaussian, 80, 4, 1.0, 26);
  HomotopyOptions o;
  o.lambda_min = oracle_spectral(inst.a).lambda_min;
  o.seed = 5;
  const SolveResult a = homotopy_solve(inst.a, inst.b, Vector::Zero(4), o);
  const SolveResult b = homotopy_solve(inst.a, inst.b, Vector::Zero(4), o);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(to_json(a.report).dump(), to_json(b.report).dump());
  EXPECT_GT(a.report.work.coordinate_updates, 0);
  EXPECT_GT(a.report.final_sampled_rows, 0);
}
