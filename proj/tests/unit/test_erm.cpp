#include <gtest/gtest.h>

#include <cmath>

#include "levreg/dual_regression.hpp"
#include "levreg/erm.hpp"
#include "levreg/errors.hpp"
#include "levreg/generate.hpp"
#include "levreg/oracle.hpp"

using namespace levreg;

namespace {

/// Logistic-augmented component with the closed form hidden, forcing Newton inversion.
class OpaqueLogistic : public ScalarComponent {
 public:
  double value(double t) const override { return inner_.value(t); }
  double first_derivative(double t) const override { return inner_.first_derivative(t); }
  double second_derivative(double t) const override { return inner_.second_derivative(t); }

 private:
  LogisticAugComponent inner_;
};

class OpaqueShiftedQuadratic : public ScalarComponent {
 public:
  explicit OpaqueShiftedQuadratic(double b) : b_(b) {}
  double value(double t) const override { return 0.5 * t * t + b_ * t; }
  double first_derivative(double t) const override { return t + b_; }
  double second_derivative(double) const override { return 1.0; }

 private:
  double b_;
};

class Cubic : public ScalarComponent {
 public:
  double value(double t) const override { return t * t * t; }
  double first_derivative(double t) const override { return 3 * t * t; }
  double second_derivative(double t) const override { return 6 * t; }
};

double bisect(const ScalarComponent& psi, double y) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi.first_derivative(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vector sampled_newton(const SampledErm& f, Vector x) {
  for (int it = 0; it < 100; ++it) {
    const Vector rx = f.rows.apply(x);
    Dense h = Dense::Zero(x.size(), x.size());
    const Dense r = f.rows.to_dense();
    for (Index t = 0; t < rx.size(); ++t)
      h += f.weight[t] * f.psi[static_cast<std::size_t>(t)]->second_derivative(rx[t]) * r.row(t).transpose() * r.row(t);
    const Vector step = h.ldlt().solve(f.gradient(x));
    x -= step;
    if (step.norm() < 1e-15 * std::max(1.0, x.norm())) break;
  }
  return x;
}

double gap_ratio(const ErmProblem& p, const Vector& x, const Vector& x0, const Vector& xs) {
  const double fs = erm_value_grad(p, xs).first;
  return (erm_value_grad(p, x).first - fs) / (erm_value_grad(p, x0).first - fs);
}

}  // namespace

TEST(ErmValue, QuadraticIsHalfSquaredNorm) {
  const Instance inst = generate(InstanceKind::gaussian, 30, 4, 1.0, 1);
  const ErmProblem p = make_erm_problem(inst.a, "quadratic");
  const Vector x = Vector::LinSpaced(4, -1, 2);
  const auto [v, g] = erm_value_grad(p, x);
  const Vector ax = inst.a.apply(x);
  EXPECT_NEAR(v, 0.5 * ax.squaredNorm(), 1e-12 * ax.squaredNorm());
  EXPECT_LT((g - inst.a.apply_t(ax)).norm(), 1e-12 * g.norm());
}

TEST(ErmValue, ShiftedScalar) {
  const ErmProblem p = make_erm_problem(SparseMatrix::from_dense(Dense::Identity(1, 1)), "quadratic",
                                        Vector::Constant(1, -1.0));
  const auto [v, g] = erm_value_grad(p, Vector::Constant(1, 2.0));
  EXPECT_DOUBLE_EQ(v, 4.0);
  EXPECT_DOUBLE_EQ(g[0], 3.0);
}

TEST(ErmValue, LogisticGradientMatchesCentralDifferences) {
  const Instance inst = generate(InstanceKind::gaussian, 50, 5, 1.0, 2);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  EXPECT_DOUBLE_EQ(p.m_bound, 1.25);
  check_components(p);
  const Vector x = Vector::LinSpaced(5, -0.3, 0.4);
  const Vector g = erm_value_grad(p, x).second;
  for (Index j = 0; j < 5; ++j) {
    Vector e = Vector::Zero(5);
    e[j] = 1e-5;
    const double fd = (erm_value_grad(p, x + e).first - erm_value_grad(p, x - e).first) / 2e-5;
    EXPECT_NEAR(fd, g[j], 1e-6 * std::max(1.0, std::abs(g[j])));
  }
}

TEST(ErmValue, ComponentChecksRejectBadCurvature) {
  ErmProblem p = make_erm_problem(SparseMatrix::from_dense(Dense::Identity(2, 2)), "quadratic");
  p.psi[1] = std::make_shared<Cubic>();
  EXPECT_THROW(check_components(p), ConfigurationError);
  EXPECT_THROW(make_erm_problem(SparseMatrix::from_dense(Dense::Identity(2, 2)), "hinge"), ConfigurationError);
}

TEST(ConjugateGradient1d, KnownInverses) {
  EXPECT_DOUBLE_EQ(conjugate_gradient_1d(QuadraticComponent(), 0.7), 0.7);
  EXPECT_DOUBLE_EQ(conjugate_gradient_1d(QuadraticComponent(2.0), 0.7), 0.7 - 2.0);
  EXPECT_NEAR(conjugate_gradient_1d(OpaqueShiftedQuadratic(2.0), 0.7), -1.3, 1e-12);
  const OpaqueLogistic psi;
  const double t = conjugate_gradient_1d(psi, 1.0);
  EXPECT_NEAR(t, bisect(psi, 1.0), 1e-11);
  EXPECT_NEAR(t + 1.0 / (1.0 + std::exp(-t)), 1.0, 1e-12);
  for (const double y : {-40.0, -3.0, 0.0, 5.0, 80.0})
    EXPECT_LE(std::abs(psi.first_derivative(conjugate_gradient_1d(psi, y, 30.0)) - y), 1e-12 * std::max(1.0, std::abs(y)));
}

TEST(BuildVr, UniformCase) {
  const Instance inst = generate(InstanceKind::gaussian, 20, 3, 1.0, 3);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  const Vector x0 = Vector::Constant(3, 0.2);
  const VrComponents vr = build_vr(p, x0, Vector::Ones(20));
  EXPECT_EQ(vr.tau, Vector::Ones(20));
  EXPECT_LT((vr.p - Vector::Constant(20, 1.0 / 20)).norm(), 1e-15);
  EXPECT_EQ(vr.m, static_cast<std::int64_t>(std::ceil(80.0 * 20 * std::pow(1.25, 4) - 1e-9)));
  const Vector x = Vector::LinSpaced(3, -1, 1);
  const auto [f0, g0] = erm_value_grad(p, x0);
  for (Index k = 0; k < 20; ++k) {
    const double t = inst.a.row(k).dot(x.data());
    const double t0 = inst.a.row(k).dot(x0.data());
    const auto& psi = *p.psi[static_cast<std::size_t>(k)];
    const double expect = 20.0 * (psi.value(t) - psi.first_derivative(t0) * t) + g0.dot(x);
    EXPECT_NEAR(vr_value(p, vr, k, x), expect, 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST(BuildVr, SingleRowAnchorsCancel) {
  const ErmProblem p = make_erm_problem(SparseMatrix::from_dense((Dense(1, 2) << 1.0, -2.0).finished()),
                                        "logistic-aug");
  const VrComponents vr = build_vr(p, Vector::Constant(2, 0.3), Vector::Ones(1));
  EXPECT_EQ(vr.p, Vector::Ones(1));
  const Vector x = (Vector(2) << 0.5, 1.5).finished();
  EXPECT_NEAR(vr_value(p, vr, 0, x), erm_value_grad(p, x).first, 1e-12);
  EXPECT_LT((vr_gradient(p, vr, 0, x) - erm_value_grad(p, x).second).norm(), 1e-12);
}

TEST(BuildVr, LeverageScaledTauAndErrors) {
  const Instance inst = generate(InstanceKind::gaussian, 100, 5, 1.0, 4);
  const ErmProblem p = make_erm_problem(inst.a, "quadratic", inst.b);
  const Vector u = oracle_leverage(inst.a);
  const VrComponents vr = build_vr(p, Vector::Zero(5), u);
  const Vector expect = (20.0 * std::log(5.0) * u.array()).min(1.0).matrix();
  EXPECT_LT((vr.tau - expect).norm(), 1e-14);
  EXPECT_NEAR(vr.p.sum(), 1.0, 1e-14);
  EXPECT_THROW(build_vr(p, Vector::Zero(5), Vector::Zero(100)), ConfigurationError);
  EXPECT_THROW(build_vr(p, Vector::Zero(4), u), DimensionMismatch);
}

TEST(GenAcd, QuadraticMatchesLeastSquares) {
  const Instance inst = generate(InstanceKind::gaussian, 60, 4, 1.0, 5);
  const ErmProblem p = make_erm_problem(inst.a, "quadratic", inst.b);
  SampledErm f;
  f.rows = inst.a;
  for (const auto& psi : p.psi) f.psi.push_back(psi.get());
  f.weight = Vector::Ones(60);
  f.linear = Vector::Zero(4);
  f.m_bound = 1.0;
  EXPECT_LT((f.smoothness().cwiseQuotient(f.strong_convexity()) - Vector::Ones(60)).norm(), 1e-15);
  const double lambda = oracle_spectral(inst.a).lambda_min;
  Rng rng(6);
  const Vector x = gen_acd_solve(f, lambda, Vector::Zero(4), 1e-20, GenAcdOptions{1e-10}, rng);
  const Vector xs = oracle_solve(inst.a, inst.b);
  EXPECT_LT((x - xs).norm(), 1e-7 * xs.norm());
  DualOptions o;
  o.lambda = lambda;
  Rng rng2(7);
  const Vector xd = dual_regression_solve(inst.a, inst.b, Vector::Zero(4), 1e-14, o, rng2);
  EXPECT_LT((x - xd).norm(), 1e-6 * xs.norm());
}

TEST(GenAcd, SingleComponentScalar) {
  OpaqueLogistic psi;
  SampledErm f;
  f.rows = SparseMatrix::from_dense(Dense::Constant(1, 1, 2.0));
  f.psi = {&psi};
  f.weight = Vector::Constant(1, 3.0);
  f.linear = Vector::Constant(1, -1.5);
  f.m_bound = 1.25;
  Rng rng(8);
  const double lambda = 3.0 * 4.0 / 1.25;
  const Vector x = gen_acd_solve(f, lambda, Vector::Zero(1), 1e-24, GenAcdOptions{1e-12}, rng);
  double t = 0.0;
  for (int it = 0; it < 100; ++it)
    t -= (6.0 * psi.first_derivative(2.0 * t) - 1.5) / (12.0 * psi.second_derivative(2.0 * t));
  EXPECT_LE(f.value(x) - f.value(Vector::Constant(1, t)), 1e-12);
  EXPECT_NEAR(x[0], t, 1e-6);
}

TEST(GenAcd, SampledLogisticMeetsNewtonOracle) {
  const Instance inst = generate(InstanceKind::gaussian, 200, 6, 1.0, 9);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  const Vector x0 = Vector::Zero(6);
  ErmStepOptions so;
  so.lambda_min = oracle_spectral(inst.a).lambda_min;
  const VrComponents vr = build_vr(p, x0, oracle_leverage(inst.a));
  Rng rng(10);
  std::discrete_distribution<Index> pick(vr.p.data(), vr.p.data() + vr.p.size());
  std::vector<std::int64_t> counts(200, 0);
  for (std::int64_t t = 0; t < vr.m; ++t) ++counts[static_cast<std::size_t>(pick(rng))];
  SampledErm f;
  f.m_bound = p.m_bound;
  f.linear = vr.full_grad;
  std::vector<std::tuple<Index, Index, double>> trip;
  std::vector<double> w;
  for (Index k = 0; k < 200; ++k) {
    if (!counts[static_cast<std::size_t>(k)]) continue;
    const double wk = static_cast<double>(counts[static_cast<std::size_t>(k)]) / (vr.m * vr.p[k]);
    const RowView row = inst.a.row(k);
    for (std::size_t j = 0; j < row.cols.size(); ++j) {
      trip.emplace_back(static_cast<Index>(w.size()), row.cols[j], row.vals[j]);
      f.linear[row.cols[j]] -= wk * vr.anchor_grads[k] * row.vals[j];
    }
    w.push_back(wk);
    f.psi.push_back(p.psi[static_cast<std::size_t>(k)].get());
  }
  f.rows = SparseMatrix::from_triplets(static_cast<Index>(w.size()), 6, std::move(trip));
  f.weight = Eigen::Map<Vector>(w.data(), static_cast<Index>(w.size()));
  const Vector xs = sampled_newton(f, x0);
  const double lambda = so.lambda_min / (2.0 * p.m_bound);
  const Vector x = gen_acd_solve(f, lambda, x0, 1e-8, GenAcdOptions{}, rng);
  const double fs = f.value(xs);
  EXPECT_LE(f.value(x) - fs, 1e-6 * (f.value(x0) - fs));
}

TEST(ErmStep, OptimumStaysOptimal) {
  const Instance inst = generate(InstanceKind::gaussian, 200, 5, 1.0, 11);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  const Vector xs = erm_oracle_minimize(p, Vector::Zero(5));
  ErmStepOptions so;
  so.lambda_min = oracle_spectral(inst.a).lambda_min;
  Rng rng(12);
  const ErmStepResult r = erm_solve_step(p, xs, oracle_leverage(inst.a), so, rng);
  EXPECT_TRUE(r.accepted);
  const double fs = erm_value_grad(p, xs).first;
  EXPECT_LT(erm_value_grad(p, r.x).first - fs, 1e-10 * fs);
}

TEST(ErmStep, QuadraticHalvesMostOfTheTime) {
  const Instance inst = generate(InstanceKind::gaussian, 300, 6, 1.0, 13);
  const ErmProblem p = make_erm_problem(inst.a, "quadratic", inst.b);
  const Vector x0 = Vector::Ones(6);
  const Vector xs = erm_oracle_minimize(p, x0);
  ErmStepOptions so;
  so.lambda_min = oracle_spectral(inst.a).lambda_min;
  const Vector u = oracle_leverage(inst.a);
  int halved = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng = derive_rng(seed, 0);
    halved += gap_ratio(p, erm_solve_step(p, x0, u, so, rng).x, x0, xs) <= 0.5;
  }
  EXPECT_GE(halved, 20);
}

TEST(ErmStep, MergedAndRepeatedDrawsAgree) {
  const Instance inst = generate(InstanceKind::gaussian, 100, 4, 1.0, 14);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  const Vector x0 = Vector::Zero(4);
  ErmStepOptions so;
  so.lambda_min = oracle_spectral(inst.a).lambda_min;
  so.inner.inner_accuracy = 1e-10;
  so.inner_target = 1e-16;
  const Vector u = oracle_leverage(inst.a);
  Rng r1(15), r2(15);
  const ErmStepResult merged = erm_solve_step(p, x0, u, so, r1);
  so.merge_duplicates = false;
  const ErmStepResult raw = erm_solve_step(p, x0, u, so, r2);
  EXPECT_EQ(raw.terms, raw.samples);
  EXPECT_LT(merged.terms, raw.terms);
  EXPECT_LT((merged.x - raw.x).norm(), 1e-6 * std::max(1.0, merged.x.norm()));
}

TEST(ErmFullSolve, QuadraticMatchesRegression) {
  const Instance inst = generate(InstanceKind::gaussian, 200, 5, 1.0, 16);
  const ErmProblem p = make_erm_problem(inst.a, "quadratic", inst.b);
  ErmOptions o;
  o.mode = Mode::verify;
  o.u = oracle_leverage(inst.a);
  const ErmResult r = erm_full_solve(p, Vector::Zero(5), 1e-10, o);
  const Vector xs = oracle_solve(inst.a, inst.b);
  const SpectralBounds sb = oracle_spectral(inst.a);
  EXPECT_LT(inst.a.apply(Vector(r.x - xs)).norm(), 1e-5 * inst.a.apply(xs).norm());
  EXPECT_LT((r.x - xs).norm(), 1e-6 * std::sqrt(sb.kappa) * xs.norm());
}

TEST(ErmFullSolve, LogisticWithBootstrappedLeverage) {
  const Instance inst = generate(InstanceKind::gaussian, 200, 5, 1.0, 17);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  ErmOptions o;
  o.lambda_min = oracle_spectral(inst.a).lambda_min;
  o.seed = 4;
  const Vector x0 = Vector::Zero(5);
  const ErmResult r = erm_full_solve(p, x0, 1e-6, o);
  EXPECT_LE(gap_ratio(p, r.x, x0, erm_oracle_minimize(p, x0)), 1e-6);
  ASSERT_TRUE(r.report.leverage.has_value());
  EXPECT_GT(r.report.work.coordinate_updates, 0);
}

TEST(ErmFullSolve, StartAtOptimum) {
  const Instance inst = generate(InstanceKind::gaussian, 100, 4, 1.0, 18);
  const ErmProblem p = make_erm_problem(inst.a, "logistic-aug", inst.b);
  const Vector xs = erm_oracle_minimize(p, Vector::Zero(4));
  ErmOptions o;
  o.mode = Mode::verify;
  o.u = oracle_leverage(inst.a);
  const ErmResult r = erm_full_solve(p, xs, 1e-6, o);
  EXPECT_LT(erm_value_grad(p, r.x).first - erm_value_grad(p, xs).first, 1e-12);
  EXPECT_THROW(erm_full_solve(p, xs, 1e-6, ErmOptions{}), ConfigurationError);
}

TEST(Concentration, IdentityConcentrates) {
  const SparseMatrix eye = SparseMatrix::from_dense(Dense::Identity(4, 4));
  Rng rng(19);
  const auto [lo, hi] = concentration_probe(eye, Vector::Ones(4), 4.0, 1.0, 4000, rng);
  EXPECT_GT(lo, 0.9);
  EXPECT_LT(hi, 1.1);
  EXPECT_THROW(concentration_probe(eye, Vector::Ones(4), 4.0, 1.0, 3, rng), ConfigurationError);
  EXPECT_DOUBLE_EQ(concentration_min_samples(eye, Vector::Ones(4), 4.0, 1.0), 4.0);
}
