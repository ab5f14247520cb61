#pragma once

#include <cstdint>
#include <functional>

#include "levreg/random.hpp"
#include "levreg/sparse_matrix.hpp"

namespace levreg {

/// Coupled part (scale/2)||M^T y||^2 - s^T M^T y of an objective.
/// shift(i, r) holds m_i^T s_r for column r.
struct Coupling {
  const SparseMatrix* rows = nullptr;
  double scale = 0.0;
  Block shift;
};

/// f(y) = sum_i h_i(y_i) + coupled part, evaluated independently on each
/// of width() columns that share smoothness and strong convexity.
class CoordinateObjective {
 public:
  virtual ~CoordinateObjective() = default;

  virtual Index dim() const = 0;
  virtual Index width() const { return 1; }
  /// Coordinate smoothness L_i of the whole objective, coupling included.
  virtual const Vector& smoothness() const = 0;
  virtual double strong_convexity() const = 0;
  virtual const Coupling* coupling() const { return nullptr; }

  /// h_i'(y_r) for r < width(); y and out point at width() values.
  virtual void separable_gradient(Index i, const double* y, double* out) const = 0;
  virtual double separable_value(Index i, double y, Index col) const = 0;

  Vector value(const Block& y) const;
  Block gradient(const Block& y) const;
  double partial_gradient(const Block& y, Index i, Index col = 0) const;
};

/// h_i(y) = q_i y^2 / 2 + c_ir y plus an optional coupling.
class QuadraticObjective : public CoordinateObjective {
 public:
  QuadraticObjective(Vector q, Block c, double mu);
  QuadraticObjective(Vector q, Block c, double mu, Coupling coupling);

  Index dim() const override { return q_.size(); }
  Index width() const override { return c_.cols(); }
  const Vector& smoothness() const override { return l_; }
  double strong_convexity() const override { return mu_; }
  const Coupling* coupling() const override { return coupled_ ? &coupling_ : nullptr; }
  void separable_gradient(Index i, const double* y, double* out) const override;
  double separable_value(Index i, double y, Index col) const override;

 private:
  Vector q_;
  Block c_;
  Vector l_;
  double mu_;
  bool coupled_ = false;
  Coupling coupling_;
};

/// Per-column progress estimates for the iterate y; mty is M^T y (empty when uncoupled).
using GapEstimator = std::function<Vector(const Block& y, const Block& mty)>;

struct AcdOptions {
  double epsilon = 1e-6;
  /// 0 derives a budget from the theory count.
  std::int64_t max_updates = 0;
  /// 0 checks every dim() updates.
  std::int64_t check_every = 0;
  /// Run at least the theory count (S / sqrt(mu)) ln(1/epsilon).
  bool theory_floor = false;
  /// Run exactly the theory count with no monitoring.
  bool theory_only = false;
  /// Relative target: stop when estimate <= epsilon * estimate(y0). Without one,
  /// the gradient proxy ||grad f||^2 <= epsilon (mu / sum L) ||grad f(y0)||^2 is used.
  GapEstimator gap;
};

struct AcdResult {
  Block y;
  std::int64_t updates = 0;
  bool converged = false;
  Vector gap0;
  Vector gap;
};

std::int64_t acd_theory_count(const CoordinateObjective& f, double epsilon);

/// Non-uniform accelerated coordinate descent, O(s) per update.
/// Columns whose value ends above their value at y0 are reset to y0.
AcdResult acd_minimize(const CoordinateObjective& f, const Block& y0, const AcdOptions& options, Rng& rng);

/// Finite-difference check of the declared L_i and mu on random points.
bool check_smoothness(const CoordinateObjective& f, Rng& rng, int trials = 20, double tol = 1e-6);

}  // namespace levreg
