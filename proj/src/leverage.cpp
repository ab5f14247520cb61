#include "levreg/leverage.hpp"

#include <algorithm>
#include <cmath>

#include "levreg/dual_regression.hpp"
#include "levreg/errors.hpp"

namespace levreg {

namespace {

double log_rows(Index n) { return std::log(static_cast<double>(std::max<Index>(n, 2))); }

}  // namespace

SampledMatrix sample_rows(const AugmentedView& a, const Vector& u, const SamplingOptions& options, Rng& rng) {
  const Index n = a.rows(), d = a.cols(), base = a.base_rows();
  if (u.size() != n) throw DimensionMismatch("sample_rows: score length != rows");
  if (!(options.delta > 0.0 && options.delta < 1.0)) throw ConfigurationError("sampling delta must be in (0,1)");
  if (!u.allFinite() || (u.array() < 0.0).any()) throw ConfigurationError("scores must be finite and nonnegative");

  const double ln = log_rows(n);
  const double kp = options.k_prime > 0.0 ? options.k_prime : options.k / (options.delta * options.delta);
  SampledMatrix out;
  out.probabilities.resize(n);
  double bound = 0.0;
  for (Index i = 0; i < n; ++i) {
    out.probabilities[i] = std::min(1.0, kp * u[i] * ln);
    if (u[i] == 0.0) ++out.zero_score_rows;
    bound += std::sqrt(kp * u[i] * ln * a.row_norm_sq(i));
  }
  bound *= 2.0;

  const int max_attempts = options.max_attempts > 0 ? options.max_attempts : static_cast<int>(std::ceil(64.0 * ln));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double root_eta = std::sqrt(a.eta());
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.kept.clear();
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double p = out.probabilities[i];
      if (p >= 1.0 || (p > 0.0 && unit(rng) < p)) {
        out.kept.push_back(i);
        total += std::sqrt(a.row_norm_sq(i) / p);
      }
    }
    if (total > bound * (1.0 + 1e-12)) continue;

    std::vector<Index> ptr{0}, idx;
    std::vector<double> val;
    for (Index i : out.kept) {
      const double s = 1.0 / std::sqrt(out.probabilities[i]);
      if (i < base) {
        const RowView r = a.base().row(i);
        for (std::size_t t = 0; t < r.cols.size(); ++t) {
          idx.push_back(r.cols[t]);
          val.push_back(r.vals[t] * s);
        }
      } else {
        idx.push_back(i - base);
        val.push_back(root_eta * s);
      }
      ptr.push_back(static_cast<Index>(idx.size()));
    }
    out.b = SparseMatrix(static_cast<Index>(out.kept.size()), d, std::move(ptr), std::move(idx), std::move(val));
    out.attempts = attempt;
    if (options.kept_constant > 0.0) {
      const double cap = options.kept_constant * static_cast<double>(d) / (options.delta * options.delta) * ln;
      if (static_cast<double>(out.kept.size()) > cap)
        throw InvariantViolation("sampled matrix keeps " + std::to_string(out.kept.size()) + " rows, above " +
                                 std::to_string(cap));
    }
    return out;
  }
  throw SamplingFailure("row sampling failed the norm test " + std::to_string(max_attempts) + " times");
}

SampledMatrix sample_rows(const SparseMatrix& a, const Vector& u, const SamplingOptions& options, Rng& rng) {
  return sample_rows(AugmentedView(a), u, options, rng);
}

Block solve_using_ls(const AugmentedView& a, const Vector& u, const Block& rhs, const Block& x0, double epsilon,
                     const LsOptions& options, Rng& rng, WorkCounters* counters) {
  if (!(options.lambda_min > 0.0)) throw ConfigurationError("solve_using_ls needs a positive lambda_min bound");
  PrecondOptions pre;
  pre.lambda = (1.0 - options.sampling.delta) * options.lambda_min;
  pre.inner_accuracy = options.inner_accuracy;
  pre.mode = options.mode;
  pre.observer = options.observer;
  for (int attempt = 0;; ++attempt) {
    SampledMatrix s = sample_rows(a, u, options.sampling, rng);
    if (counters) counters->sampled_rows += static_cast<std::int64_t>(s.kept.size());
    try {
      return preconditioned_solve(a, s.b, rhs, x0, epsilon, pre, rng, counters);
    } catch (const PreconditionerQuality&) {
      if (attempt >= options.retries) throw;
    } catch (const NonConvergence&) {
      if (attempt >= options.retries) throw;
    }
  }
}

Vector solve_using_ls(const AugmentedView& a, const Vector& u, const Vector& rhs, const Vector& x0, double epsilon,
                      const LsOptions& options, Rng& rng, WorkCounters* counters) {
  return solve_using_ls(a, u, Block(rhs), Block(x0), epsilon, options, rng, counters).col(0);
}

Index jl_probe_count(double c, Index rows, double delta) {
  return std::max<Index>(1, static_cast<Index>(std::ceil(c * log_rows(rows) / (delta * delta))));
}

double jl_inner_epsilon(Index rows, Index cols, double delta, double kappa) {
  const double denom = 18.0 * static_cast<double>(rows) * static_cast<double>(cols) * log_rows(rows) * kappa;
  const double e = delta * delta / denom;
  return e * e;
}

LeverageEstimate compute_ls(const AugmentedView& a, double delta, const RegressionSolver& solver,
                            const JlOptions& options, Rng& rng, WorkCounters* counters) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigurationError("compute_ls delta must be in (0,1)");
  if (!(options.kappa >= 1.0)) throw ConfigurationError("kappa must be >= 1");
  if (options.probes < 0 || (options.probes == 0 && !(options.c > 0.0)))
    throw ConfigurationError("probe count must be >= 1");
  const Index n = a.rows(), d = a.cols();

  LeverageEstimate out;
  out.probes = options.probes > 0 ? options.probes : jl_probe_count(options.c, n, delta);
  const double raw = jl_inner_epsilon(n, d, delta, options.kappa);
  out.epsilon_inner = raw;
  if (options.mode != Mode::paper_faithful && raw < options.epsilon_floor) {
    out.epsilon_inner = options.epsilon_floor;
    out.clamped = true;
  }
  const Index chunk = options.chunk > 0 ? options.chunk
                                        : std::clamp<Index>((Index{1} << 22) / std::max<Index>(n, 1), 1, 64);

  Vector sum = Vector::Zero(n);
  std::normal_distribution<double> normal;
  for (Index done = 0; done < out.probes; done += chunk) {
    const Index w = std::min(chunk, out.probes - done);
    Rng local = split_rng(rng);
    Block v(n, w);
    for (Index t = 0; t < v.size(); ++t) v.data()[t] = normal(local);
    const Block y = solver(v, Block::Zero(d, w), out.epsilon_inner, local);
    sum += a.apply(y).rowwise().squaredNorm();
    if (counters) counters->probe_solves += w;
  }
  const double shift = delta / (2.0 * static_cast<double>(n) * options.kappa);
  out.scores = (sum / static_cast<double>(out.probes)) / (1.0 - delta / 3.0);
  out.scores.array() += shift;
  return out;
}

}  // namespace levreg
