#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "levreg/errors.hpp"
#include "levreg/generate.hpp"
#include "levreg/matrix_market.hpp"
#include "levreg/oracle.hpp"
#include "levreg/sparse_matrix.hpp"

using namespace levreg;

namespace {

SparseMatrix small3x2() { return SparseMatrix::from_dense((Dense(3, 2) << 1, 0, 0, 1, 1, 1).finished()); }

SparseMatrix random_sparse(Index n, Index d, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0), coin(0.0, 1.0);
  std::vector<std::tuple<Index, Index, double>> t;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      if (coin(rng) < density) t.emplace_back(i, j, unif(rng));
  return SparseMatrix::from_triplets(n, d, std::move(t));
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST(SparseMatrix, IdentityMatvec) {
  const SparseMatrix eye = SparseMatrix::from_dense(Dense::Identity(3, 3));
  const Vector x = Vector::LinSpaced(3, 1, 3);
  EXPECT_EQ(eye.apply(x), x);
  EXPECT_EQ(eye.apply_t(x), x);
  EXPECT_EQ(eye.row_norms_sq(), Vector::Ones(3));
}

TEST(SparseMatrix, HandArithmetic) {
  const SparseMatrix a = small3x2();
  EXPECT_EQ(a.apply(Vector((Vector(2) << 2, 5).finished())), Vector((Vector(3) << 2, 5, 7).finished()));
  EXPECT_EQ(a.apply_t(Vector(Vector::Ones(3))), Vector((Vector(2) << 2, 2).finished()));
  const SparseMatrix r = SparseMatrix::from_dense((Dense(1, 2) << 3, 4).finished());
  EXPECT_DOUBLE_EQ(std::sqrt(r.row_norms_sq()[0]), 5.0);
}

TEST(SparseMatrix, MatchesDenseMaterialization) {
  const SparseMatrix a = random_sparse(20, 5, 0.5, 3);
  const Dense ad = a.to_dense();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Vector x(5), y(20);
  for (auto& v : x) v = g(rng);
  for (auto& v : y) v = g(rng);
  EXPECT_LT(rel(a.apply(x), ad * x), 1e-12);
  EXPECT_LT(rel(a.apply_t(y), ad.transpose() * y), 1e-12);
  EXPECT_LT(rel(a.row_norms_sq(), ad.rowwise().squaredNorm()), 1e-14);

  Block xb(5, 3), yb(20, 3);
  for (Index t = 0; t < xb.size(); ++t) xb.data()[t] = g(rng);
  for (Index t = 0; t < yb.size(); ++t) yb.data()[t] = g(rng);
  EXPECT_LT((a.apply(xb) - ad * xb).norm(), 1e-12 * (ad * xb).norm());
  EXPECT_LT((a.apply_t(yb) - ad.transpose() * yb).norm(), 1e-12 * (ad.transpose() * yb).norm());
}

TEST(SparseMatrix, DimensionMismatch) {
  const SparseMatrix a = small3x2();
  EXPECT_THROW(a.apply(Vector(Vector::Ones(3))), DimensionMismatch);
  EXPECT_THROW(a.apply_t(Vector(Vector::Ones(2))), DimensionMismatch);
}

TEST(SparseMatrix, TripletsSumAndDropCancellations) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.5}, {0, 1, 0.5}, {1, 0, 2.0}, {1, 0, -2.0}});
  EXPECT_EQ(a.nnz(), 1);
  EXPECT_DOUBLE_EQ(a.to_dense()(0, 1), 2.0);
  EXPECT_EQ(a.row_nnz(1), 0);
}

TEST(SparseMatrix, RejectsMalformedCsr) {
  EXPECT_THROW(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), InvalidMatrix);
  EXPECT_THROW(SparseMatrix(1, 2, {0, 1}, {0}, {0.0}), InvalidMatrix);
  EXPECT_THROW(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), InvalidMatrix);
  EXPECT_THROW(SparseMatrix(1, 2, {0, 1}, {0}, {std::nan("")}), InvalidMatrix);
}

TEST(AugmentedView, AppendsScaledIdentity) {
  const SparseMatrix a = small3x2();
  const AugmentedView v(a, 4.0);
  Dense expect(5, 2);
  expect << 1, 0, 0, 1, 1, 1, 2, 0, 0, 2;
  EXPECT_EQ(v.to_dense(), expect);
  EXPECT_EQ(v.rows(), 5);
  const Vector x = (Vector(2) << 1, -3).finished();
  EXPECT_LT(rel(v.apply(x), expect * x), 1e-15);
  const Vector y = Vector::LinSpaced(5, 1, 5);
  EXPECT_LT(rel(v.apply_t(y), expect.transpose() * y), 1e-15);
  EXPECT_LT(rel(v.row_norms_sq(), expect.rowwise().squaredNorm()), 1e-15);
  EXPECT_EQ(AugmentedView(a).rows(), 3);
}

TEST(MatrixMarket, RoundTrip) {
  const SparseMatrix a = random_sparse(7, 4, 0.6, 9);
  std::stringstream s;
  write_matrix_market(s, a);
  const SparseMatrix b = read_matrix_market(s);
  EXPECT_EQ(a.to_dense(), b.to_dense());

  const Vector v = (Vector(3) << 0.1, -2.5e-17, 3.0).finished();
  std::stringstream t;
  write_vector(t, v);
  EXPECT_EQ(read_vector(t), v);
}

TEST(MatrixMarket, SumsDuplicatesAndSkipsComments) {
  std::istringstream s(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 3\n1 1 1.0\n1 1 2.0\n2 2 -1\n");
  const Dense a = read_matrix_market(s).to_dense();
  EXPECT_DOUBLE_EQ(a(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(a(1, 1), -1.0);
}

TEST(MatrixMarket, ParseErrorCarriesPosition) {
  std::istringstream s("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n");
  try {
    read_matrix_market(s);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3);
    EXPECT_EQ(e.column, 3);
  }
  std::istringstream bad_index("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
  EXPECT_THROW(read_matrix_market(bad_index), ParseError);
  std::istringstream pattern("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n");
  EXPECT_THROW(read_matrix_market(pattern), ParseError);
  std::istringstream vec("1.0\n2.0 3.0\n");
  EXPECT_THROW(read_vector(vec), ParseError);
}

TEST(Generate, OrthonormalGaussianIsWellConditioned) {
  GenerateOptions o;
  o.orthonormalize = true;
  const Instance inst = generate(InstanceKind::gaussian, 30, 30, 1.0, 1, o);
  EXPECT_NEAR(oracle_spectral(inst.a).kappa, 1.0, 1e-8);
}

TEST(Generate, IllConditionedHitsTarget) {
  const Instance inst = generate(InstanceKind::ill_conditioned, 400, 10, 1e4, 2);
  const double k = oracle_spectral(inst.a).kappa;
  EXPECT_GE(k, 0.9e4);
  EXPECT_LE(k, 1.1e4);
}

TEST(Generate, CoherentRowsPlantHighLeverage) {
  const Instance inst = generate(InstanceKind::coherent_rows, 300, 8, 1.0, 3);
  EXPECT_GE(oracle_leverage(inst.a).maxCoeff(), 0.99);
}

TEST(Generate, DeterministicAndValidated) {
  const Instance a = generate(InstanceKind::gaussian, 50, 5, 1.0, 7);
  const Instance b = generate(InstanceKind::gaussian, 50, 5, 1.0, 7);
  EXPECT_EQ(a.a.to_dense(), b.a.to_dense());
  EXPECT_EQ(a.b, b.b);
  EXPECT_THROW(generate(InstanceKind::gaussian, 4, 5, 1.0, 7), ConfigurationError);
  EXPECT_THROW(parse_instance_kind("banded"), ConfigurationError);
}
