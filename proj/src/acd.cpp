#include "levreg/acd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "levreg/errors.hpp"

namespace levreg {

namespace {

// Full gradient given M^T y.
Block gradient_with(const CoordinateObjective& f, const Block& y, const Block& mty) {
  const Index n = f.dim(), w = f.width();
  Block g(n, w);
  for (Index i = 0; i < n; ++i) f.separable_gradient(i, y.row(i).data(), g.row(i).data());
  if (const Coupling* cp = f.coupling()) {
    g.noalias() += cp->scale * cp->rows->apply(mty);
    g -= cp->shift;
  }
  return g;
}

Vector value_with(const CoordinateObjective& f, const Block& y, const Block& mty) {
  const Index n = f.dim(), w = f.width();
  Vector v = Vector::Zero(w);
  for (Index i = 0; i < n; ++i)
    for (Index r = 0; r < w; ++r) v[r] += f.separable_value(i, y(i, r), r);
  if (const Coupling* cp = f.coupling()) {
    v += 0.5 * cp->scale * col_sq_norms(mty) - col_dots(cp->shift, y);
  }
  return v;
}

Block coupled(const CoordinateObjective& f, const Block& y) {
  const Coupling* cp = f.coupling();
  return cp ? cp->rows->apply_t(y) : Block();
}

}  // namespace

Vector CoordinateObjective::value(const Block& y) const { return value_with(*this, y, coupled(*this, y)); }

Block CoordinateObjective::gradient(const Block& y) const {
  return gradient_with(*this, y, coupled(*this, y));
}

double CoordinateObjective::partial_gradient(const Block& y, Index i, Index col) const {
  return gradient(y)(i, col);
}

QuadraticObjective::QuadraticObjective(Vector q, Block c, double mu)
    : q_(std::move(q)), c_(std::move(c)), l_(q_), mu_(mu) {
  if (c_.rows() != q_.size()) throw DimensionMismatch("QuadraticObjective: c rows != dim");
}

QuadraticObjective::QuadraticObjective(Vector q, Block c, double mu, Coupling coupling)
    : QuadraticObjective(std::move(q), std::move(c), mu) {
  if (coupling.rows == nullptr || coupling.rows->rows() != q_.size())
    throw DimensionMismatch("QuadraticObjective: coupling rows != dim");
  if (coupling.shift.size() == 0) coupling.shift = Block::Zero(q_.size(), c_.cols());
  if (coupling.shift.rows() != q_.size() || coupling.shift.cols() != c_.cols())
    throw DimensionMismatch("QuadraticObjective: shift shape");
  coupled_ = true;
  coupling_ = std::move(coupling);
  l_ = q_ + coupling_.scale * coupling_.rows->row_norms_sq();
}

void QuadraticObjective::separable_gradient(Index i, const double* y, double* out) const {
  const double qi = q_[i];
  const double* ci = c_.row(i).data();
  for (Index r = 0; r < c_.cols(); ++r) out[r] = qi * y[r] + ci[r];
}

double QuadraticObjective::separable_value(Index i, double y, Index col) const {
  return 0.5 * q_[i] * y * y + c_(i, col) * y;
}

std::int64_t acd_theory_count(const CoordinateObjective& f, double epsilon) {
  const double s = f.smoothness().array().sqrt().sum();
  return static_cast<std::int64_t>(
      std::ceil(s / std::sqrt(f.strong_convexity()) * std::log(1.0 / std::min(epsilon, 0.5))));
}

AcdResult acd_minimize(const CoordinateObjective& f, const Block& y0, const AcdOptions& options, Rng& rng) {
  const Index n = f.dim(), w = f.width();
  if (y0.rows() != n || y0.cols() != w) throw DimensionMismatch("acd_minimize: y0 shape");
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) throw ConfigurationError("acd epsilon must be in (0,1)");
  const Vector& l = f.smoothness();
  const double mu = f.strong_convexity();
  if (l.size() != n || !(l.array() > 0.0).all()) throw ConfigurationError("smoothness must be positive");
  if (!(mu > 0.0) || mu > l.minCoeff() * (1.0 + 1e-12))
    throw ConfigurationError("strong convexity must lie in (0, min L_i]");

  const Vector sqrt_l = l.array().sqrt();
  const double s = sqrt_l.sum();
  const double tau = 2.0 / (1.0 + std::sqrt(4.0 * s * s / mu + 1.0));
  const double eta = 1.0 / (tau * s * s);
  const double em = eta * mu;
  const double ma = em * (1.0 - tau) / (1.0 + em);
  const double mb = (1.0 + em * tau) / (1.0 + em);
  Vector inv_l = l.cwiseInverse();
  Vector zfac(n);
  for (Index i = 0; i < n; ++i) zfac[i] = eta * s / (sqrt_l[i] * (1.0 + em));

  const Coupling* cp = f.coupling();
  const SparseMatrix* m = cp ? cp->rows : nullptr;
  const double scale = cp ? cp->scale : 0.0;

  // y = p00 U + p01 V and z = p10 U + p11 V; SU, SV track M^T U, M^T V.
  Block u = y0, v = y0;
  Block su = m ? m->apply_t(y0) : Block();
  Block sv = su;
  const Block su0 = su;
  double p00 = 1.0, p01 = 0.0, p10 = 0.0, p11 = 1.0;

  auto renormalize = [&](bool exact) {
    Block y = p00 * u + p01 * v;
    v = p10 * u + p11 * v;
    u = std::move(y);
    if (m) {
      if (exact) {
        su = m->apply_t(u);
        sv = m->apply_t(v);
      } else {
        Block sy = p00 * su + p01 * sv;
        sv = p10 * su + p11 * sv;
        su = std::move(sy);
      }
    }
    p00 = p11 = 1.0;
    p01 = p10 = 0.0;
  };

  const bool proxy = !options.gap;
  auto estimate = [&](const Block& y, const Block& mty) -> Vector {
    if (!proxy) return options.gap(y, mty);
    return col_sq_norms(gradient_with(f, y, mty));
  };

  const std::int64_t theory = acd_theory_count(f, options.epsilon);
  const double rel = proxy ? options.epsilon * mu / l.sum() : options.epsilon;
  std::int64_t budget = options.max_updates;
  if (budget <= 0) {
    const double log_term = std::log(1.0 / rel) + 10.0;
    budget = static_cast<std::int64_t>(8.0 * s / std::sqrt(mu) * log_term) + 4 * n;
    if (options.theory_floor) budget = std::max(budget, 2 * theory);
  }
  const std::int64_t check_every = options.check_every > 0 ? options.check_every : std::max<Index>(n, 1);

  AcdResult res;
  res.gap0 = options.theory_only ? Vector() : estimate(y0, su);
  Vector target = rel * res.gap0;
  if (!options.theory_only && (res.gap0.array() <= target.array()).all() && !options.theory_floor) {
    res.y = y0;
    res.gap = res.gap0;
    res.converged = true;
    return res;
  }

  std::discrete_distribution<Index> pick(sqrt_l.data(), sqrt_l.data() + n);
  std::vector<double> buf(5 * static_cast<std::size_t>(w));
  double* __restrict xi = buf.data();
  double* __restrict g = xi + w;
  double* __restrict du = g + w;
  double* __restrict dv = du + w;
  double* __restrict dot = dv + w;
  const std::int64_t stop_at = options.theory_only ? theory : budget;
  std::int64_t since_check = 0, renorms = 0, interval = check_every, last_at = 0;
  double last_worst = HUGE_VAL;

  auto run = [&]<int W>() {
    const Index ww = W > 0 ? W : w;
    while (res.updates < stop_at) {
      const Index i = pick(rng);
      const double cx0 = (1.0 - tau) * p00 + tau * p10;
      const double cx1 = (1.0 - tau) * p01 + tau * p11;
      double* __restrict ui = u.row(i).data();
      double* __restrict vi = v.row(i).data();
      for (Index r = 0; r < ww; ++r) xi[r] = cx0 * ui[r] + cx1 * vi[r];
      f.separable_gradient(i, xi, g);
      const Index* cols = nullptr;
      const double* vals = nullptr;
      Index len = 0;
      if (m) {
        const RowView row = m->row(i);
        cols = row.cols.data();
        vals = row.vals.data();
        len = static_cast<Index>(row.cols.size());
        for (Index r = 0; r < ww; ++r) dot[r] = 0.0;
        for (Index k = 0; k < len; ++k) {
          const double a0 = vals[k] * cx0, a1 = vals[k] * cx1;
          const double* __restrict sur = su.row(cols[k]).data();
          const double* __restrict svr = sv.row(cols[k]).data();
          for (Index r = 0; r < ww; ++r) dot[r] += a0 * sur[r] + a1 * svr[r];
        }
        const double* __restrict sh = cp->shift.row(i).data();
        for (Index r = 0; r < ww; ++r) g[r] += scale * dot[r] - sh[r];
      }
      const double n00 = cx0, n01 = cx1;
      const double n10 = ma * p00 + mb * p10, n11 = ma * p01 + mb * p11;
      const double det = n00 * n11 - n01 * n10;
      const double inv = 1.0 / det;
      const double cy = -inv_l[i], cz = -zfac[i];
      const double ku = (n11 * cy - n01 * cz) * inv, kv = (n00 * cz - n10 * cy) * inv;
      for (Index r = 0; r < ww; ++r) {
        du[r] = ku * g[r];
        dv[r] = kv * g[r];
        ui[r] += du[r];
        vi[r] += dv[r];
      }
      for (Index k = 0; k < len; ++k) {
        const double a = vals[k];
        double* __restrict sur = su.row(cols[k]).data();
        double* __restrict svr = sv.row(cols[k]).data();
        for (Index r = 0; r < ww; ++r) {
          sur[r] += a * du[r];
          svr[r] += a * dv[r];
        }
      }
      p00 = n00;
      p01 = n01;
      p10 = n10;
      p11 = n11;
      ++res.updates;
      if (std::abs(det) < 1e-2) renormalize(++renorms % 16 == 0);

      if (++since_check >= interval) {
        since_check = 0;
        interval = check_every;
        renormalize(++renorms % 16 == 0);
        if (options.theory_only) continue;
        if (options.theory_floor && res.updates < theory) continue;
        res.gap = estimate(u, su);
        if (!res.gap.allFinite()) throw NonConvergence("coordinate descent diverged");
        if ((res.gap.array() <= target.array()).all()) {
          res.converged = true;
          return;
        }
        // Space the next check by the observed rate of the slowest column.
        double worst = 0.0;
        for (Index r = 0; r < w; ++r)
          if (res.gap[r] > target[r]) worst = std::max(worst, target[r] > 0.0 ? res.gap[r] / target[r] : HUGE_VAL);
        if (std::isfinite(worst) && last_worst > worst) {
          const double rate = std::log(last_worst / worst) / static_cast<double>(res.updates - last_at);
          const double predicted = 0.8 * std::log(worst) / rate;
          interval = std::clamp<std::int64_t>(static_cast<std::int64_t>(predicted), check_every, 8 * check_every);
        }
        last_worst = worst;
        last_at = res.updates;
      }
    }
  };
  if (w == 1) {
    run.template operator()<1>();
  } else {
    run.template operator()<0>();
  }
  renormalize(false);
  res.y = std::move(u);
  if (options.theory_only) {
    res.converged = true;
  } else if (!res.converged) {
    res.gap = estimate(res.y, su);
    res.converged = (res.gap.array() <= target.array()).all();
  }

  const Vector v0 = value_with(f, y0, su0), v1 = value_with(f, res.y, su);
  for (Index r = 0; r < w; ++r)
    if (!(v1[r] <= v0[r])) res.y.col(r) = y0.col(r);
  return res;
}

bool check_smoothness(const CoordinateObjective& f, Rng& rng, int trials, double tol) {
  const Index n = f.dim(), w = f.width();
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Index> coord(0, n - 1);
  const Vector& l = f.smoothness();
  const double mu = f.strong_convexity();
  for (int t = 0; t < trials; ++t) {
    Block y(n, w), h(n, w);
    for (Index k = 0; k < y.size(); ++k) {
      y.data()[k] = normal(rng);
      h.data()[k] = normal(rng);
    }
    const Block g0 = f.gradient(y);
    const Block g1 = f.gradient(y + h);
    for (Index r = 0; r < w; ++r) {
      const double curv = (g1.col(r) - g0.col(r)).dot(h.col(r));
      if (curv < mu * h.col(r).squaredNorm() * (1.0 - tol) - tol) return false;
    }
    const Index i = coord(rng);
    const double step = normal(rng);
    Block yi = y;
    yi.row(i).array() += step;
    const Block gi = f.gradient(yi);
    for (Index r = 0; r < w; ++r) {
      const double diff = std::abs(gi(i, r) - g0(i, r));
      if (diff > l[i] * std::abs(step) * (1.0 + tol) + tol) return false;
    }
  }
  return true;
}

}  // namespace levreg
