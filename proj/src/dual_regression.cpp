#include "levreg/dual_regression.hpp"

#include <cmath>

#include "levreg/acd.hpp"
#include "levreg/errors.hpp"

namespace levreg {

namespace {

int log_ceil(double ratio, double base) {
  return static_cast<int>(std::ceil(std::log(ratio) / std::log(base)));
}

}  // namespace

SparseMatrix append_ridge(const SparseMatrix& bbar, double ridge) {
  const Index n = bbar.rows(), d = bbar.cols();
  std::vector<Index> ptr = bbar.row_ptr();
  std::vector<Index> idx = bbar.col_idx();
  std::vector<double> val = bbar.values();
  const double w = std::sqrt(ridge);
  for (Index j = 0; j < d; ++j) {
    idx.push_back(j);
    val.push_back(w);
    ptr.push_back(static_cast<Index>(idx.size()));
  }
  return SparseMatrix(n + d, d, std::move(ptr), std::move(idx), std::move(val));
}

Block dual_regression_solve(const SparseMatrix& b, const Block& rhs, const Block& x0, double epsilon,
                            const DualOptions& options, Rng& rng, WorkCounters* counters) {
  const Index n = b.rows(), d = b.cols(), k = rhs.cols();
  if (rhs.rows() != n) throw DimensionMismatch("dual_regression_solve: rhs rows != B rows");
  if (x0.rows() != d || x0.cols() != k) throw DimensionMismatch("dual_regression_solve: x0 shape");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  const double lambda = options.lambda;
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigurationError("lambda must be positive");

  const bool theory = options.mode == Mode::paper_faithful;
  const int theory_steps = log_ceil(2.0 / epsilon, 4.0);
  const int max_steps = options.max_prox_steps > 0 ? options.max_prox_steps
                                                   : (theory ? theory_steps : 4 * theory_steps + 20);

  const Vector ones = Vector::Ones(n);
  Block x = x0;
  Block y = Block::Zero(n, k);
  Vector first;
  for (int t = 0; t < max_steps; ++t) {
    Coupling cp{&b, 1.0 / lambda, b.apply(x)};
    QuadraticObjective g(ones, rhs, 1.0, std::move(cp));

    AcdOptions acd;
    acd.epsilon = options.inner_accuracy;
    acd.theory_only = theory;
    const Block& center = x;
    acd.gap = [&](const Block& yy, const Block& mty) {
      Block xp = center - mty / lambda;
      Block res = b.apply(xp);
      res -= rhs;
      const Vector res2 = col_sq_norms(res), mty2 = col_sq_norms(mty), yy2 = col_sq_norms(yy);
      const Vector dy = col_dots(rhs, yy), sm = col_dots(center, mty);
      Vector gap(k);
      for (Index r = 0; r < k; ++r) {
        const double primal = 0.5 * res2[r] + 0.5 / lambda * mty2[r];
        const double dual = 0.5 * yy2[r] + dy[r] + 0.5 / lambda * mty2[r] - sm[r];
        gap[r] = std::max(primal + dual - 1e-13 * (std::abs(primal) + std::abs(dual)), 0.0);
      }
      return gap;
    };
    AcdResult out = acd_minimize(g, y, acd, rng);
    if (counters) {
      counters->coordinate_updates += out.updates * k;
      counters->acd_calls += 1;
      counters->prox_steps += 1;
    }
    if (!out.converged) throw NonConvergence("dual coordinate descent exhausted its budget");
    y = std::move(out.y);

    Block next = x - b.apply_t(y) / lambda;
    const Block step = next - x;
    const Vector size = col_sq_norms(b.apply(step)) + lambda * col_sq_norms(step);
    x = std::move(next);
    if (t == 0) first = size;
    if (theory) continue;
    if ((size.array() <= epsilon * first.array()).all()) return x;
    // Subproblem already solved to the gap floor.
    if (t > 0 && out.updates == 0) return x;
  }
  if (theory) return x;
  throw NonConvergence("prox-point loop did not reach the requested accuracy");
}

Vector dual_regression_solve(const SparseMatrix& b, const Vector& rhs, const Vector& x0, double epsilon,
                             const DualOptions& options, Rng& rng, WorkCounters* counters) {
  Block out = dual_regression_solve(b, Block(rhs), Block(x0), epsilon, options, rng, counters);
  return out.col(0);
}

Block preconditioned_solve(const AugmentedView& a, const SparseMatrix& bbar, const Block& rhs, const Block& x0,
                           double epsilon, const PrecondOptions& options, Rng& rng, WorkCounters* counters) {
  const Index d = a.cols(), k = rhs.cols();
  if (bbar.cols() != d) throw DimensionMismatch("preconditioned_solve: B and A column counts differ");
  if (rhs.rows() != a.rows()) throw DimensionMismatch("preconditioned_solve: rhs rows != A rows");
  if (x0.rows() != d || x0.cols() != k) throw DimensionMismatch("preconditioned_solve: x0 shape");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  const double lambda = options.lambda;
  if (!(lambda > 0.0)) throw ConfigurationError("preconditioner lambda must be positive");

  const double ridge = lambda / 100.0;
  const double w = std::sqrt(ridge);
  const SparseMatrix b = append_ridge(bbar, ridge);
  const bool theory = options.mode == Mode::paper_faithful;
  const int theory_steps = log_ceil(epsilon, 0.9 * 0.9);
  const int max_steps = options.max_steps > 0 ? options.max_steps : (theory ? theory_steps : theory_steps + 20);

  DualOptions inner;
  inner.lambda = lambda;
  inner.inner_accuracy = options.inner_accuracy;
  inner.mode = options.mode;

  Block x = x0;
  Vector first, prev;
  int rising = 0;
  for (int t = 0; t < max_steps; ++t) {
    const Block grad = a.apply_t(Block(a.apply(x) - rhs));
    Block d_rhs(b.rows(), k);
    d_rhs.topRows(bbar.rows()) = bbar.apply(x);
    d_rhs.bottomRows(d) = w * x - grad / w;
    Block next = dual_regression_solve(b, d_rhs, x, options.inner_target, inner, rng, counters);
    const Vector size = col_sq_norms(b.apply(Block(next - x))).cwiseSqrt();
    x = std::move(next);
    if (counters) counters->outer_steps += 1;
    if (options.observer) options.observer(x);
    if (t == 0) first = size;
    if (theory) continue;
    if ((size.array() <= 0.5 * std::sqrt(epsilon) * first.array()).all()) return x;
    if (t > 0 && (size.array() > prev.array()).any()) {
      if (++rising >= 3) throw PreconditionerQuality("preconditioned iteration is not contracting");
    } else {
      rising = 0;
    }
    prev = size;
  }
  if (theory) return x;
  throw NonConvergence("preconditioned iteration did not reach the requested accuracy");
}

}  // namespace levreg
