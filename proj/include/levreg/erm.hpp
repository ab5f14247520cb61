#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levreg/common.hpp"
#include "levreg/homotopy.hpp"
#include "levreg/random.hpp"
#include "levreg/reduction.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

/// Scalar loss psi with 1/M <= psi'' <= M.
class ScalarComponent {
 public:
  virtual ~ScalarComponent() = default;
  virtual double value(double t) const = 0;
  virtual double first_derivative(double t) const = 0;
  virtual double second_derivative(double t) const = 0;
  /// Closed form of (psi*)'(y), if one is known.
  virtual std::optional<double> conjugate_derivative(double) const { return std::nullopt; }
};

/// psi(t) = t^2 / 2 + c t.
class QuadraticComponent : public ScalarComponent {
 public:
  explicit QuadraticComponent(double linear = 0.0) : c_(linear) {}
  double value(double t) const override { return 0.5 * t * t + c_ * t; }
  double first_derivative(double t) const override { return t + c_; }
  double second_derivative(double) const override { return 1.0; }
  std::optional<double> conjugate_derivative(double y) const override { return y - c_; }

 private:
  double c_;
};

/// psi(t) = t^2 / 2 + log(1 + e^t) + c t, with psi'' in [1, 5/4].
class LogisticAugComponent : public ScalarComponent {
 public:
  explicit LogisticAugComponent(double linear = 0.0) : c_(linear) {}
  double value(double t) const override;
  double first_derivative(double t) const override;
  double second_derivative(double t) const override;

 private:
  double c_;
};

/// (psi*)'(y): the t with psi'(t) = y, by safeguarded Newton to
/// |psi'(t) - y| <= 1e-12 max(1, |y|). Throws NumericError after 100 iterations.
double conjugate_gradient_1d(const ScalarComponent& psi, double y, double hint = 0.0);

/// F(x) = sum_i psi_i(a_i^T x).
struct ErmProblem {
  SparseMatrix a;
  std::vector<std::shared_ptr<const ScalarComponent>> psi;
  double m_bound = 1.0;
};

/// Component per row psi_i(t) = base(t) - b_i t; kind is "quadratic" (M = 1)
/// or "logistic-aug" (M = 5/4). An empty b means zero.
ErmProblem make_erm_problem(SparseMatrix a, const std::string& kind, const Vector& b = Vector());

/// Finite-difference and curvature checks of every component on a grid over [-10, 10].
/// Throws ConfigurationError naming the first failing row.
void check_components(const ErmProblem& p);

std::pair<double, Vector> erm_value_grad(const ErmProblem& p, const Vector& x);

/// Minimizer of F by damped Newton on the dense Hessian.
Vector erm_oracle_minimize(const ErmProblem& p, const Vector& x0, double tol = 1e-13);

struct VrOptions {
  double tau_scale = 20.0;
  double m_scale = 80.0;
  /// Use log n instead of log d in tau.
  bool tau_log_n = false;
};

/// Variance-reduced reformulation around an anchor x0:
/// f~_k(x) = (f_k(x) - grad f_k(x0)^T x) / p_k + grad F(x0)^T x.
struct VrComponents {
  Vector tau;
  Vector p;
  Vector anchor;
  /// psi_k'(a_k^T x0).
  Vector anchor_grads;
  Vector full_grad;
  std::int64_t m = 0;
};

VrComponents build_vr(const ErmProblem& p, const Vector& x0, const Vector& u, const VrOptions& options = {});
double vr_value(const ErmProblem& p, const VrComponents& vr, Index k, const Vector& x);
Vector vr_gradient(const ErmProblem& p, const VrComponents& vr, Index k, const Vector& x);

/// F_m(x) = sum_t weight_t psi_t(r_t^T x) + linear^T x. Term t has L_t = M weight_t
/// and mu_t = weight_t / M.
struct SampledErm {
  SparseMatrix rows;
  std::vector<const ScalarComponent*> psi;
  Vector weight;
  Vector linear;
  double m_bound = 1.0;

  Vector smoothness() const { return m_bound * weight; }
  Vector strong_convexity() const { return weight / m_bound; }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

struct GenAcdOptions {
  /// Relative duality-gap target of each prox subproblem.
  double inner_accuracy = 1e-3;
  int max_prox_steps = 0;
  Mode mode = Mode::fast;
};

/// Prox-point steps x <- argmin F_m + (lambda/2)||x - x_k||^2, each solved in the dual
/// sum_t phi_t*(y_t) + ||R^T y||^2 / (2 lambda) - s^T R^T y after the rescaling y = D y~,
/// D_tt = sqrt(L_t), which makes every coordinate 1-strongly convex.
/// lambda must not exceed the strong convexity of F_m. Stops once
/// ||x_{k+1} - x_k||^2 <= epsilon ||x_1 - x_0||^2.
Vector gen_acd_solve(const SampledErm& f, double lambda, const Vector& x0, double epsilon,
                     const GenAcdOptions& options, Rng& rng, WorkCounters* counters = nullptr);

struct ErmStepOptions {
  /// Lower bound on lambda_min(A^T A).
  double lambda_min = 0.0;
  /// 0 uses 1 / (512 M^4).
  double inner_target = 0.0;
  VrOptions vr;
  /// Collapse repeated draws of a row into one weighted term. F_m is unchanged.
  bool merge_duplicates = true;
  GenAcdOptions inner;
};

struct ErmStepResult {
  Vector x;
  /// The draw passed sum ||a_it|| / sqrt(p_it) <= 10 m sum ||a_k|| sqrt(p_k).
  bool accepted = false;
  std::int64_t samples = 0;
  Index terms = 0;
};

/// One variance-reduced sampled step from x0. Returns x0 when the draw is rejected.
ErmStepResult erm_solve_step(const ErmProblem& p, const Vector& x0, const Vector& u, const ErmStepOptions& options,
                             Rng& rng, WorkCounters* counters = nullptr);

struct ErmOptions {
  /// Leverage overestimates for A; computed by the eta homotopy when absent.
  std::optional<Vector> u;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  Mode mode = Mode::fast;
  std::uint64_t seed = 0;
  ErmStepOptions step;
  /// Settings for the leverage bootstrap; seed, mode and bounds are copied in.
  HomotopyOptions leverage;
  int max_loops = 64;
};

struct ErmReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double distortion = 1.0;
  ReductionStats reduction;
  std::int64_t rejected_steps = 0;
  WorkCounters work;
  std::optional<SolverReport> leverage;
  double final_gradient_sq = 0.0;
};

struct ErmResult {
  Vector x;
  ErmReport report;
};

/// erm_solve_step inside reduction_boost with the estimator ||grad F||^2 and
/// distortion r = M^2 lambda_max / lambda_min.
ErmResult erm_full_solve(const ErmProblem& p, const Vector& x0, double epsilon, const ErmOptions& options);

/// Extreme eigenvalues of (A^T A)^{-1/2} Y (A^T A)^{-1/2} for Y the average of m
/// with-replacement draws a_i a_i^T / p_i, p proportional to min(1, alpha c u_i log d).
std::pair<double, double> concentration_probe(const SparseMatrix& a, const Vector& u, double alpha, double c,
                                              std::int64_t m, Rng& rng);

/// Sum of min(1, alpha c u_i log d), the smallest m concentration_probe accepts.
double concentration_min_samples(const SparseMatrix& a, const Vector& u, double alpha, double c);

}  // namespace levreg
