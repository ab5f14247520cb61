#pragma once

#include <functional>
#include <utility>

#include "levreg/erm.hpp"

namespace levreg {

/// max_j |sum_k p_k grad f~_k(x) - grad F(x)|_j over rows with p_k > 0.
double unbiasedness_residual(const ErmProblem& p, const VrComponents& vr, const Vector& x);

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<Vector, Vector> gauss_legendre(int nodes);

struct SmoothFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Dense(const Vector&)> hessian;
};

SmoothFunction erm_function(const ErmProblem& p);

struct BoundSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// For minimizers x* of F and y* of G, with z(t) = t y* + (1 - t) x*:
///   lhs = F(y*) - F(x*)
///   rhs = 1/2 ||grad G(x*)||^2 in H_G^-1 H_F H_G^-1,
/// where H_G = int_0^1 hess G(z(t)) dt and H_F = int_0^1 2 (1 - t) hess F(z(t)) dt.
/// The two sides agree exactly; quadrature uses the given number of nodes.
BoundSides convex_function_bound(const SmoothFunction& f, const SmoothFunction& g, const Vector& x_star,
                                 const Vector& y_star, int nodes = 64);

/// Same sides with the unweighted H_F = int_0^1 hess F(z(t)) dt and no factor 1/2.
BoundSides convex_function_bound_unweighted(const SmoothFunction& f, const SmoothFunction& g, const Vector& x_star,
                                            const Vector& y_star, int nodes = 64);

/// For g_i(z) = f_i((A^T A)^{-1/2} z) / p_i with p = tau / sum tau:
///   lhs = E_{i~p} ||grad g_i(z) - grad g_i(z*)||^2
///   rhs = 2 L (g(z) - g(z*)),  L = (sum tau) M,
/// at z = (A^T A)^{1/2} x. Desk scale only.
BoundSides svrg_bound_sides(const ErmProblem& p, const Vector& tau, const Vector& x, const Vector& x_star);

/// lhs = E_{k~p} ||grad f~_k(x*)||^2 in (A^T A)^-1, rhs = 2 (sum tau) M (F(anchor) - F(x*)).
BoundSides variance_bound_sides(const ErmProblem& p, const VrComponents& vr, const Vector& x_star);

}  // namespace levreg
