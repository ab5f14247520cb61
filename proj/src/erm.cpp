#include "levreg/erm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "levreg/acd.hpp"
#include "levreg/errors.hpp"
#include "levreg/oracle.hpp"

namespace levreg {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_factor(Index size) { return size > 1 ? std::log(static_cast<double>(size)) : 1.0; }

// Dual of one prox subproblem in the rescaled coordinates y = D y~, D_tt = sqrt(L_t):
// h_t(y~) = phi_t*(sqrt(L_t) y~) with phi_t = weight_t psi_t, coupled through rows sqrt(L_t) r_t.
class ConjugateDual final : public CoordinateObjective {
 public:
  ConjugateDual(const SampledErm& f, const SparseMatrix& scaled, const Vector& sqrt_l, double lambda, Block shift,
                std::vector<double>& hints)
      : f_(f), sqrt_l_(sqrt_l), hints_(hints) {
    coupling_.rows = &scaled;
    coupling_.scale = 1.0 / lambda;
    coupling_.shift = std::move(shift);
    const double m2 = f.m_bound * f.m_bound;
    l_ = (m2 + scaled.row_norms_sq().array() / lambda).matrix();
  }

  Index dim() const override { return f_.rows.rows(); }
  const Vector& smoothness() const override { return l_; }
  double strong_convexity() const override { return 1.0; }
  const Coupling* coupling() const override { return &coupling_; }

  void separable_gradient(Index i, const double* y, double* out) const override {
    out[0] = sqrt_l_[i] * root(i, sqrt_l_[i] * y[0] / f_.weight[i]);
  }

  double separable_value(Index i, double y, Index) const override {
    const double s = sqrt_l_[i] * y / f_.weight[i];
    const double t = root(i, s);
    return f_.weight[i] * (s * t - f_.psi[static_cast<std::size_t>(i)]->value(t));
  }

 private:
  double root(Index i, double s) const {
    const auto k = static_cast<std::size_t>(i);
    try {
      hints_[k] = conjugate_gradient_1d(*f_.psi[k], s, hints_[k]);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (component " + std::to_string(i) + ")");
    }
    return hints_[k];
  }

  const SampledErm& f_;
  const Vector& sqrt_l_;
  std::vector<double>& hints_;
  Vector l_;
  Coupling coupling_;
};

}  // namespace

double LogisticAugComponent::value(double t) const { return 0.5 * t * t + softplus(t) + c_ * t; }
double LogisticAugComponent::first_derivative(double t) const { return t + sigmoid(t) + c_; }
double LogisticAugComponent::second_derivative(double t) const {
  const double s = sigmoid(t);
  return 1.0 + s * (1.0 - s);
}

double conjugate_gradient_1d(const ScalarComponent& psi, double y, double hint) {
  if (auto closed = psi.conjugate_derivative(y)) return *closed;
  const double tol = 1e-12 * std::max(1.0, std::abs(y));
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double t = std::isfinite(hint) ? hint : 0.0;
  for (int it = 0; it < 100; ++it) {
    const double g = psi.first_derivative(t) - y;
    if (!std::isfinite(g)) throw NumericError("conjugate inversion produced a non-finite derivative");
    if (std::abs(g) <= tol) return t;
    if (g > 0.0) {
      hi = std::min(hi, t);
    } else {
      lo = std::max(lo, t);
    }
    double next = t - g / psi.second_derivative(t);
    if (!(next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
    }
    if (next == t) return t;
    t = next;
  }
  throw NumericError("conjugate inversion exceeded 100 iterations at y = " + std::to_string(y));
}

ErmProblem make_erm_problem(SparseMatrix a, const std::string& kind, const Vector& b) {
  const Index n = a.rows();
  if (b.size() != 0 && b.size() != n) throw DimensionMismatch("erm: rhs length != rows");
  ErmProblem p;
  if (kind == "quadratic") {
    p.m_bound = 1.0;
  } else if (kind == "logistic-aug") {
    p.m_bound = 1.25;
  } else {
    throw ConfigurationError("unknown component '" + kind + "' (expected quadratic or logistic-aug)");
  }
  p.psi.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double c = b.size() ? -b[i] : 0.0;
    if (kind == "quadratic") {
      p.psi.push_back(std::make_shared<QuadraticComponent>(c));
    } else {
      p.psi.push_back(std::make_shared<LogisticAugComponent>(c));
    }
  }
  p.a = std::move(a);
  return p;
}

void check_components(const ErmProblem& p) {
  if (static_cast<Index>(p.psi.size()) != p.a.rows()) throw DimensionMismatch("erm: one component per row");
  if (!(p.m_bound >= 1.0)) throw ConfigurationError("erm: M must be >= 1");
  const double h = 1e-5, tol = 1e-4;
  for (std::size_t i = 0; i < p.psi.size(); ++i) {
    const ScalarComponent& psi = *p.psi[i];
    for (int k = 0; k <= 40; ++k) {
      const double t = -10.0 + 0.5 * k;
      const double fd = (psi.value(t + h) - psi.value(t - h)) / (2.0 * h);
      const double d1 = psi.first_derivative(t);
      if (std::abs(fd - d1) > tol * std::max(1.0, std::abs(d1)))
        throw ConfigurationError("component " + std::to_string(i) + ": derivative disagrees with value");
      const double d2 = psi.second_derivative(t);
      if (d2 < 1.0 / p.m_bound - tol || d2 > p.m_bound + tol)
        throw ConfigurationError("component " + std::to_string(i) + ": second derivative outside [1/M, M]");
    }
  }
}

std::pair<double, Vector> erm_value_grad(const ErmProblem& p, const Vector& x) {
  if (x.size() != p.a.cols()) throw DimensionMismatch("erm: x length != cols");
  const Vector ax = p.a.apply(x);
  double value = 0.0;
  Vector d1(ax.size());
  for (Index i = 0; i < ax.size(); ++i) {
    const ScalarComponent& psi = *p.psi[static_cast<std::size_t>(i)];
    const double v = psi.value(ax[i]);
    d1[i] = psi.first_derivative(ax[i]);
    if (!std::isfinite(v) || !std::isfinite(d1[i]))
      throw NumericError("component value is not finite at row " + std::to_string(i));
    value += v;
  }
  return {value, p.a.apply_t(d1)};
}

Vector erm_oracle_minimize(const ErmProblem& p, const Vector& x0, double tol) {
  const Dense a = p.a.to_dense();
  Vector x = x0;
  auto [f, g] = erm_value_grad(p, x);
  const double g0 = std::max(1.0, g.norm());
  for (int it = 0; it < 100; ++it) {
    const Vector ax = a * x;
    Vector w(ax.size());
    for (Index i = 0; i < ax.size(); ++i) w[i] = p.psi[static_cast<std::size_t>(i)]->second_derivative(ax[i]);
    const Dense h = a.transpose() * w.asDiagonal() * a;
    Eigen::LDLT<Dense> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw RankDeficient("erm oracle: Hessian factorization failed");
    const Vector step = ldlt.solve(g);
    const double decrement = g.dot(step);
    if (!(decrement > 0.0)) break;
    double t = 1.0;
    Vector next = x - step;
    auto [fn, gn] = erm_value_grad(p, next);
    while (fn > f - 0.25 * t * decrement && t > 1e-10) {
      t *= 0.5;
      next = x - t * step;
      std::tie(fn, gn) = erm_value_grad(p, next);
    }
    if (fn > f) break;
    const bool done = gn.norm() <= tol * g0 || decrement <= 1e-30 * std::max(1.0, std::abs(f));
    x = std::move(next);
    f = fn;
    g = std::move(gn);
    if (done) break;
  }
  return x;
}

VrComponents build_vr(const ErmProblem& p, const Vector& x0, const Vector& u, const VrOptions& options) {
  const Index n = p.a.rows();
  if (u.size() != n) throw DimensionMismatch("build_vr: u length != rows");
  if (x0.size() != p.a.cols()) throw DimensionMismatch("build_vr: x0 length != cols");
  if (!(u.array() >= 0.0).all()) throw ConfigurationError("build_vr: overestimates must be nonnegative");
  const double lf = log_factor(options.tau_log_n ? n : p.a.cols());
  VrComponents vr;
  vr.tau = (options.tau_scale * lf * u.array()).min(1.0).matrix();
  const double sum = vr.tau.sum();
  if (!(sum > 0.0)) throw ConfigurationError("build_vr: all sampling weights are zero");
  vr.p = vr.tau / sum;
  vr.anchor = x0;
  const Vector ax = p.a.apply(x0);
  vr.anchor_grads.resize(n);
  for (Index k = 0; k < n; ++k) vr.anchor_grads[k] = p.psi[static_cast<std::size_t>(k)]->first_derivative(ax[k]);
  vr.full_grad = p.a.apply_t(vr.anchor_grads);
  const double m4 = std::pow(p.m_bound, 4);
  vr.m = static_cast<std::int64_t>(std::ceil(options.m_scale * sum * m4 - 1e-9));
  return vr;
}

double vr_value(const ErmProblem& p, const VrComponents& vr, Index k, const Vector& x) {
  const double t = p.a.row(k).dot(x.data());
  const double fk = p.psi[static_cast<std::size_t>(k)]->value(t);
  return (fk - vr.anchor_grads[k] * t) / vr.p[k] + vr.full_grad.dot(x);
}

Vector vr_gradient(const ErmProblem& p, const VrComponents& vr, Index k, const Vector& x) {
  const RowView row = p.a.row(k);
  const double t = row.dot(x.data());
  const double coef = (p.psi[static_cast<std::size_t>(k)]->first_derivative(t) - vr.anchor_grads[k]) / vr.p[k];
  Vector g = vr.full_grad;
  for (std::size_t j = 0; j < row.cols.size(); ++j) g[row.cols[j]] += coef * row.vals[j];
  return g;
}

double SampledErm::value(const Vector& x) const {
  const Vector rx = rows.apply(x);
  double v = linear.dot(x);
  for (Index t = 0; t < rx.size(); ++t) v += weight[t] * psi[static_cast<std::size_t>(t)]->value(rx[t]);
  return v;
}

Vector SampledErm::gradient(const Vector& x) const {
  const Vector rx = rows.apply(x);
  Vector d1(rx.size());
  for (Index t = 0; t < rx.size(); ++t) d1[t] = weight[t] * psi[static_cast<std::size_t>(t)]->first_derivative(rx[t]);
  return rows.apply_t(d1) + linear;
}

Vector gen_acd_solve(const SampledErm& f, double lambda, const Vector& x0, double epsilon,
                     const GenAcdOptions& options, Rng& rng, WorkCounters* counters) {
  const Index n = f.rows.rows(), d = f.rows.cols();
  if (x0.size() != d) throw DimensionMismatch("gen_acd_solve: x0 length != cols");
  if (f.weight.size() != n || static_cast<Index>(f.psi.size()) != n || f.linear.size() != d)
    throw DimensionMismatch("gen_acd_solve: component arrays disagree with rows");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigurationError("gen_acd_solve: lambda must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  if (!(f.weight.array() > 0.0).all()) throw ConfigurationError("gen_acd_solve: weights must be positive");

  const Vector sqrt_l = f.smoothness().array().sqrt();
  std::vector<double> vals = f.rows.values();
  for (Index i = 0; i < n; ++i)
    for (Index k = f.rows.row_ptr()[i]; k < f.rows.row_ptr()[i + 1]; ++k) vals[k] *= sqrt_l[i];
  const SparseMatrix scaled(n, d, f.rows.row_ptr(), f.rows.col_idx(), std::move(vals));

  const bool theory = options.mode == Mode::paper_faithful;
  const int theory_steps = static_cast<int>(std::ceil(std::log2(1.0 / epsilon))) + 1;
  const int max_steps =
      options.max_prox_steps > 0 ? options.max_prox_steps : (theory ? theory_steps : 4 * theory_steps + 20);

  std::vector<double> hints(static_cast<std::size_t>(n), 0.0);
  Vector x = x0;
  Block y = Block::Zero(n, 1);
  double first = 0.0;
  for (int k = 0; k < max_steps; ++k) {
    const Vector s = x - f.linear / lambda;
    Block shift = scaled.apply(Block(s));
    const Block shift_copy = shift;
    ConjugateDual g(f, scaled, sqrt_l, lambda, std::move(shift), hints);

    AcdOptions acd;
    acd.epsilon = options.inner_accuracy;
    acd.theory_only = theory;
    acd.gap = [&](const Block& yy, const Block& mty) {
      const Vector xp = s - mty.col(0) / lambda;
      const Vector rx = f.rows.apply(xp);
      const double coupled = 0.5 / lambda * mty.squaredNorm();
      double primal = coupled, dual = coupled - shift_copy.col(0).dot(yy.col(0));
      for (Index t = 0; t < n; ++t) {
        primal += f.weight[t] * f.psi[static_cast<std::size_t>(t)]->value(rx[t]);
        dual += g.separable_value(t, yy(t, 0), 0);
      }
      Vector gap(1);
      gap[0] = std::max(primal + dual - 1e-13 * (std::abs(primal) + std::abs(dual)), 0.0);
      return gap;
    };
    AcdResult out = acd_minimize(g, y, acd, rng);
    if (counters) {
      counters->coordinate_updates += out.updates;
      counters->acd_calls += 1;
      counters->prox_steps += 1;
    }
    if (!out.converged) throw NonConvergence("conjugate dual coordinate descent exhausted its budget");
    y = std::move(out.y);

    const Vector next = s - scaled.apply_t(y).col(0) / lambda;
    const double size = (next - x).squaredNorm();
    x = next;
    if (k == 0) first = size;
    if (theory) continue;
    if (size <= epsilon * first) return x;
    // Subproblem already solved to the gap floor.
    if (k > 0 && out.updates == 0) return x;
  }
  if (theory) return x;
  throw NonConvergence("gen_acd_solve: prox-point loop did not reach the requested accuracy");
}

ErmStepResult erm_solve_step(const ErmProblem& p, const Vector& x0, const Vector& u, const ErmStepOptions& options,
                             Rng& rng, WorkCounters* counters) {
  const Index n = p.a.rows(), d = p.a.cols();
  if (!(options.lambda_min > 0.0)) throw ConfigurationError("erm_solve_step: lambda_min bound required");
  const double big_m = p.m_bound;
  const VrComponents vr = build_vr(p, x0, u, options.vr);

  std::discrete_distribution<Index> pick(vr.p.data(), vr.p.data() + n);
  std::vector<Index> draws(static_cast<std::size_t>(vr.m));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  for (auto& i : draws) {
    i = pick(rng);
    ++counts[static_cast<std::size_t>(i)];
  }

  ErmStepResult res;
  res.samples = vr.m;
  const Vector norms = p.a.row_norms_sq().cwiseSqrt();
  double lhs = 0.0, rhs = 0.0;
  for (Index k = 0; k < n; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0)
      lhs += static_cast<double>(counts[static_cast<std::size_t>(k)]) * norms[k] / std::sqrt(vr.p[k]);
    rhs += norms[k] * std::sqrt(vr.p[k]);
  }
  rhs *= 10.0 * static_cast<double>(vr.m);
  if (lhs > rhs) {
    res.x = x0;
    return res;
  }
  res.accepted = true;

  std::vector<Index> terms;
  Vector weight;
  const double inv_m = 1.0 / static_cast<double>(vr.m);
  if (options.merge_duplicates) {
    for (Index k = 0; k < n; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0) terms.push_back(k);
    weight.resize(static_cast<Index>(terms.size()));
    for (std::size_t t = 0; t < terms.size(); ++t)
      weight[static_cast<Index>(t)] =
          static_cast<double>(counts[static_cast<std::size_t>(terms[t])]) * inv_m / vr.p[terms[t]];
  } else {
    terms = draws;
    weight.resize(static_cast<Index>(terms.size()));
    for (std::size_t t = 0; t < terms.size(); ++t) weight[static_cast<Index>(t)] = inv_m / vr.p[terms[t]];
  }

  SampledErm fm;
  fm.m_bound = big_m;
  fm.weight = std::move(weight);
  fm.linear = vr.full_grad;
  std::vector<Index> ptr{0}, idx;
  std::vector<double> val;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const Index k = terms[t];
    const RowView row = p.a.row(k);
    const double coef = fm.weight[static_cast<Index>(t)] * vr.anchor_grads[k];
    for (std::size_t j = 0; j < row.cols.size(); ++j) {
      idx.push_back(row.cols[j]);
      val.push_back(row.vals[j]);
      fm.linear[row.cols[j]] -= coef * row.vals[j];
    }
    ptr.push_back(static_cast<Index>(idx.size()));
    fm.psi.push_back(p.psi[static_cast<std::size_t>(k)].get());
  }
  fm.rows = SparseMatrix(static_cast<Index>(terms.size()), d, std::move(ptr), std::move(idx), std::move(val));
  res.terms = fm.rows.rows();
  if (counters) counters->sampled_rows += res.terms;

  const double target = options.inner_target > 0.0 ? options.inner_target : 1.0 / (512.0 * std::pow(big_m, 4));
  const double lambda = options.lambda_min / (2.0 * big_m);
  res.x = gen_acd_solve(fm, lambda, x0, target, options.inner, rng, counters);
  return res;
}

ErmResult erm_full_solve(const ErmProblem& p, const Vector& x0, double epsilon, const ErmOptions& options) {
  if (x0.size() != p.a.cols()) throw DimensionMismatch("erm: x0 length != cols");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");
  ErmResult out;
  ErmReport& rep = out.report;
  if (options.lambda_min) {
    rep.lambda_min = *options.lambda_min;
  } else if (options.mode == Mode::verify) {
    rep.lambda_min = oracle_spectral(p.a).lambda_min;
  } else {
    throw ConfigurationError("a lambda_min bound is required outside verify mode");
  }
  if (!(rep.lambda_min > 0.0)) throw ConfigurationError("lambda_min must be positive");
  rep.lambda_max = options.lambda_max ? *options.lambda_max : 1.05 * power_iteration(p.a, 200, 1e-4, options.seed);
  rep.lambda_max = std::max(rep.lambda_max, rep.lambda_min);

  Vector u;
  if (options.u) {
    u = *options.u;
  } else {
    HomotopyOptions lev = options.leverage;
    lev.seed = options.seed;
    lev.mode = options.mode;
    lev.lambda_min = rep.lambda_min;
    lev.lambda_max = rep.lambda_max;
    LeverageBootstrap boot = homotopy_leverage(p.a, lev);
    u = std::move(boot.u);
    rep.work += boot.report.work;
    rep.leverage = std::move(boot.report);
  }

  ErmStepOptions step = options.step;
  step.lambda_min = rep.lambda_min;
  step.inner.mode = options.mode;
  const double big_m = p.m_bound;
  rep.distortion = big_m * big_m * rep.lambda_max / rep.lambda_min;
  const ReductionConfig cfg = ReductionConfig::make(0.5, 0.5, rep.distortion);

  auto value = [&](const Vector& x) { return erm_value_grad(p, x).first; };
  std::vector<double> abs_vals = p.a.values();
  for (double& v : abs_vals) v = std::abs(v);
  const SparseMatrix abs_a(p.a.rows(), p.a.cols(), p.a.row_ptr(), p.a.col_idx(), std::move(abs_vals));
  const double unit = std::numeric_limits<double>::epsilon() * static_cast<double>(p.a.rows() + p.a.cols());
  // ||grad||^2, or 0 once the gradient is within its own rounding error.
  auto estimate = [&](const Vector& x) {
    const Vector g = erm_value_grad(p, x).second;
    const Vector ax = p.a.apply(x), spread = abs_a.apply(Vector(x.cwiseAbs()));
    Vector mag(ax.size());
    for (Index i = 0; i < ax.size(); ++i)
      mag[i] = std::abs(p.psi[static_cast<std::size_t>(i)]->first_derivative(ax[i])) + big_m * spread[i];
    const double noise = unit * abs_a.apply_t(mag).norm();
    return g.norm() <= noise ? 0.0 : g.squaredNorm();
  };
  BaseAlgorithm base = [&](const Vector& x, Rng& r) -> Vector {
    try {
      ErmStepResult s = erm_solve_step(p, x, u, step, r, &rep.work);
      if (!s.accepted) ++rep.rejected_steps;
      return s.x;
    } catch (const NonConvergence&) {
      ++rep.rejected_steps;
      return x;
    } catch (const NumericError&) {
      ++rep.rejected_steps;
      return x;
    }
  };

  ReductionOptions ro;
  ro.max_loops = options.max_loops;
  ro.certify_below = epsilon * estimate(x0) / (rep.distortion * rep.distortion);
  Rng rng = derive_rng(options.seed, 2);
  out.x = reduction_boost(value, x0, base, estimate, cfg, epsilon, rng, ro, &rep.reduction);
  rep.final_gradient_sq = estimate(out.x);
  return out;
}

double concentration_min_samples(const SparseMatrix& a, const Vector& u, double alpha, double c) {
  if (u.size() != a.rows()) throw DimensionMismatch("concentration_probe: u length != rows");
  const double lf = log_factor(a.cols());
  return (alpha * c * lf * u.array()).min(1.0).sum();
}

std::pair<double, double> concentration_probe(const SparseMatrix& a, const Vector& u, double alpha, double c,
                                              std::int64_t m, Rng& rng) {
  const double need = concentration_min_samples(a, u, alpha, c);
  if (static_cast<double>(m) < need)
    throw ConfigurationError("concentration_probe: m = " + std::to_string(m) + " is below sum gamma = " +
                             std::to_string(need));
  const double lf = log_factor(a.cols());
  const Vector gamma = (alpha * c * lf * u.array()).min(1.0).matrix();
  const Vector prob = gamma / gamma.sum();
  std::discrete_distribution<Index> pick(prob.data(), prob.data() + prob.size());
  const Index d = a.cols();
  Dense y = Dense::Zero(d, d);
  for (std::int64_t t = 0; t < m; ++t) {
    const Index i = pick(rng);
    const RowView row = a.row(i);
    const double w = 1.0 / (static_cast<double>(m) * prob[i]);
    for (std::size_t j = 0; j < row.cols.size(); ++j)
      for (std::size_t k = 0; k < row.cols.size(); ++k) y(row.cols[j], row.cols[k]) += w * row.vals[j] * row.vals[k];
  }
  const Dense ad = a.to_dense();
  Eigen::SelfAdjointEigenSolver<Dense> gram(ad.transpose() * ad);
  if (!(gram.eigenvalues().minCoeff() > 1e-12 * gram.eigenvalues().maxCoeff()))
    throw RankDeficient("concentration_probe: A^T A is singular");
  const Dense whiten = gram.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Dense> eig(whiten * y * whiten, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

}  // namespace levreg
