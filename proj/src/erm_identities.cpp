#include "levreg/erm_identities.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "levreg/errors.hpp"
#include "levreg/oracle.hpp"

namespace levreg {

double unbiasedness_residual(const ErmProblem& p, const VrComponents& vr, const Vector& x) {
  const Index n = p.a.rows();
  Vector mean = Vector::Zero(p.a.cols());
  for (Index k = 0; k < n; ++k)
    if (vr.p[k] > 0.0) mean += vr.p[k] * vr_gradient(p, vr, k, x);
  const Vector exact = erm_value_grad(p, x).second;
  return (mean - exact).cwiseAbs().maxCoeff();
}

std::pair<Vector, Vector> gauss_legendre(int nodes) {
  if (nodes < 1) throw ConfigurationError("quadrature needs at least one node");
  // Golub-Welsch on the Legendre Jacobi matrix.
  Dense j = Dense::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Dense> eig(j);
  Vector t = (eig.eigenvalues().array() + 1.0) / 2.0;
  Vector w = eig.eigenvectors().row(0).transpose().array().square();
  return {t, w};
}

SmoothFunction erm_function(const ErmProblem& p) {
  SmoothFunction f;
  f.value = [&p](const Vector& x) { return erm_value_grad(p, x).first; };
  f.gradient = [&p](const Vector& x) { return erm_value_grad(p, x).second; };
  f.hessian = [&p](const Vector& x) {
    const Dense a = p.a.to_dense();
    const Vector ax = a * x;
    Vector w(ax.size());
    for (Index i = 0; i < ax.size(); ++i) w[i] = p.psi[static_cast<std::size_t>(i)]->second_derivative(ax[i]);
    return Dense(a.transpose() * w.asDiagonal() * a);
  };
  return f;
}

namespace {

BoundSides bound_sides(const SmoothFunction& f, const SmoothFunction& g, const Vector& x_star, const Vector& y_star,
                       int nodes, bool weighted) {
  const auto [t, w] = gauss_legendre(nodes);
  const Index d = x_star.size();
  Dense hf = Dense::Zero(d, d), hg = Dense::Zero(d, d);
  for (Index k = 0; k < t.size(); ++k) {
    const Vector z = t[k] * y_star + (1.0 - t[k]) * x_star;
    hf += (weighted ? 2.0 * (1.0 - t[k]) : 1.0) * w[k] * f.hessian(z);
    hg += w[k] * g.hessian(z);
  }
  Eigen::LDLT<Dense> ldlt(hg);
  if (ldlt.info() != Eigen::Success) throw RankDeficient("convex_function_bound: H_G is singular");
  const Vector v = ldlt.solve(g.gradient(x_star));
  BoundSides out;
  out.lhs = f.value(y_star) - f.value(x_star);
  out.rhs = (weighted ? 0.5 : 1.0) * v.dot(hf * v);
  return out;
}

}  // namespace

BoundSides convex_function_bound(const SmoothFunction& f, const SmoothFunction& g, const Vector& x_star,
                                 const Vector& y_star, int nodes) {
  return bound_sides(f, g, x_star, y_star, nodes, true);
}

BoundSides convex_function_bound_unweighted(const SmoothFunction& f, const SmoothFunction& g, const Vector& x_star,
                                            const Vector& y_star, int nodes) {
  return bound_sides(f, g, x_star, y_star, nodes, false);
}

BoundSides svrg_bound_sides(const ErmProblem& p, const Vector& tau, const Vector& x, const Vector& x_star) {
  const Index n = p.a.rows();
  if (tau.size() != n) throw DimensionMismatch("svrg_bound_sides: tau length != rows");
  const double sum = tau.sum();
  const Vector sigma = oracle_leverage(p.a);
  const Vector ax = p.a.apply(x), as = p.a.apply(x_star);
  BoundSides out;
  for (Index i = 0; i < n; ++i) {
    if (tau[i] <= 0.0) continue;
    const ScalarComponent& psi = *p.psi[static_cast<std::size_t>(i)];
    const double diff = psi.first_derivative(ax[i]) - psi.first_derivative(as[i]);
    out.lhs += diff * diff * sigma[i] * sum / tau[i];
  }
  out.rhs = 2.0 * sum * p.m_bound * (erm_value_grad(p, x).first - erm_value_grad(p, x_star).first);
  return out;
}

BoundSides variance_bound_sides(const ErmProblem& p, const VrComponents& vr, const Vector& x_star) {
  const Dense a = p.a.to_dense();
  Eigen::LDLT<Dense> gram(a.transpose() * a);
  if (gram.info() != Eigen::Success) throw RankDeficient("variance_bound_sides: A^T A is singular");
  BoundSides out;
  for (Index k = 0; k < p.a.rows(); ++k) {
    if (vr.p[k] <= 0.0) continue;
    const Vector gk = vr_gradient(p, vr, k, x_star);
    out.lhs += vr.p[k] * gk.dot(gram.solve(gk));
  }
  out.rhs = 2.0 * vr.tau.sum() * p.m_bound *
            (erm_value_grad(p, vr.anchor).first - erm_value_grad(p, x_star).first);
  return out;
}

}  // namespace levreg
