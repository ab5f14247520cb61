#include "levreg/homotopy.hpp"

#include <chrono>
#include <cmath>

#include "levreg/errors.hpp"
#include "levreg/oracle.hpp"
#include "levreg/random.hpp"

namespace levreg {

std::vector<double> SolverReport::eta_schedule() const {
  std::vector<double> out;
  for (const PhaseRecord& p : phases) out.push_back(p.eta);
  return out;
}

bool SolverReport::any_clamped() const {
  for (const PhaseRecord& p : phases)
    if (p.clamped) return true;
  return false;
}

int homotopy_phase_count(double eta0, double lambda_min) {
  int count = 0;
  for (double eta = eta0; eta > lambda_min / 10.0; eta *= 0.75) ++count;
  return count;
}

double bracket_excess(const AugmentedView& a, const Vector& u) {
  const Vector sigma = oracle_leverage(a);
  const double kappa = oracle_spectral(a).kappa;
  const double slack = 1.0 / (static_cast<double>(a.base_rows()) * kappa);
  double worst = -1.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double hi = 4.0 * sigma[i] + slack;
    worst = std::max(worst, (sigma[i] - u[i]) / sigma[i]);
    worst = std::max(worst, (u[i] - hi) / hi);
  }
  return worst;
}

namespace {

void acquire_bounds(const SparseMatrix& a, const HomotopyOptions& options, SolverReport& rep) {
  rep.seed = options.seed;
  rep.mode = options.mode;
  rep.certified = options.mode != Mode::paper_faithful;
  if (options.lambda_min) {
    rep.lambda_min = *options.lambda_min;
  } else if (options.mode == Mode::verify) {
    rep.lambda_min = oracle_spectral(a).lambda_min;
  } else {
    throw ConfigurationError("a lambda_min bound is required outside verify mode");
  }
  if (!(rep.lambda_min > 0.0)) throw ConfigurationError("lambda_min must be positive");
  if (options.lambda_max) {
    rep.lambda_max = *options.lambda_max;
  } else {
    rep.lambda_max = 1.05 * power_iteration(a, 200, 1e-4, options.seed);
  }
  if (rep.lambda_max < rep.lambda_min) {
    rep.warnings.push_back("lambda_max estimate below lambda_min; raised to lambda_min");
    rep.lambda_max = rep.lambda_min;
  }
}

Vector run_phases(const SparseMatrix& a, const HomotopyOptions& options, SolverReport& rep, Rng& rng) {
  const Index n = a.rows(), d = a.cols();
  const bool verify = options.mode == Mode::verify;
  double eta = rep.lambda_max;
  Vector u(n + d);
  u.head(n) = a.row_norms_sq() / eta;
  u.tail(d).setOnes();

  std::vector<std::string> breaches;
  while (eta > rep.lambda_min / 10.0) {
    const auto t0 = std::chrono::steady_clock::now();
    const AugmentedView view(a, eta);
    PhaseRecord phase;
    phase.eta = eta;
    if (options.observer) options.observer(eta, u);
    if (verify) {
      phase.invariant_excess = bracket_excess(view, u);
      if (*phase.invariant_excess > 1e-9) breaches.push_back(std::to_string(rep.phases.size()));
    }

    LsOptions ls;
    ls.lambda_min = rep.lambda_min + eta;
    ls.sampling = options.sampling;
    ls.inner_accuracy = options.inner_accuracy;
    ls.mode = options.mode;
    const Vector phase_u = u;
    WorkCounters work;
    RegressionSolver solver = [&](const Block& rhs, const Block& start, double eps, Rng& r) {
      if (options.max_coordinate_updates > 0 &&
          rep.work.coordinate_updates + work.coordinate_updates > options.max_coordinate_updates)
        throw NonConvergence("coordinate update budget exhausted");
      return solve_using_ls(view, phase_u, rhs, start, eps, ls, r, &work);
    };
    JlOptions jl;
    jl.c = options.jl_c;
    jl.epsilon_floor = options.probe_epsilon_floor;
    jl.kappa = (rep.lambda_max + eta) / (rep.lambda_min + eta);
    jl.chunk = options.chunk;
    jl.mode = options.mode;
    const LeverageEstimate est = compute_ls(view, 0.25, solver, jl, rng, &work);
    u = options.overestimate_factor * est.scores;

    phase.probes = est.probes;
    phase.clamped = est.clamped;
    phase.coordinate_updates = work.coordinate_updates;
    phase.sampled_rows = work.sampled_rows;
    phase.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.work += work;
    rep.phases.push_back(phase);
    eta *= 0.75;
  }
  if (options.observer) options.observer(eta, u);
  rep.breached_phases = std::move(breaches);
  return u;
}

void raise_breaches(const HomotopyOptions& options, const SolverReport& rep) {
  if (!options.strict_invariants || rep.breached_phases.empty()) return;
  std::string list;
  for (const auto& s : rep.breached_phases) list += (list.empty() ? "" : ",") + s;
  throw InvariantViolation("leverage bracket breached at phases " + list);
}

}  // namespace

LeverageBootstrap homotopy_leverage(const SparseMatrix& a, const HomotopyOptions& options) {
  LeverageBootstrap out;
  acquire_bounds(a, options, out.report);
  Rng rng = derive_rng(options.seed, 1);
  out.u = run_phases(a, options, out.report, rng).head(a.rows());
  raise_breaches(options, out.report);
  return out;
}

SolveResult homotopy_solve(const SparseMatrix& a, const Vector& b, const Vector& x0, const HomotopyOptions& options) {
  const Index n = a.rows(), d = a.cols();
  if (b.size() != n) throw DimensionMismatch("solve: rhs length != rows");
  if (x0.size() != d) throw DimensionMismatch("solve: x0 length != cols");
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) throw ConfigurationError("epsilon must be in (0,1)");

  SolveResult out;
  SolverReport& rep = out.report;
  acquire_bounds(a, options, rep);
  Rng rng = derive_rng(options.seed, 1);
  const Vector u = run_phases(a, options, rep, rng);

  LsOptions ls;
  ls.lambda_min = rep.lambda_min;
  ls.sampling = options.sampling;
  ls.inner_accuracy = options.inner_accuracy;
  ls.mode = options.mode;
  WorkCounters work;
  const AugmentedView plain(a);
  out.x = solve_using_ls(plain, Vector(u.head(n)), b, x0, options.epsilon, ls, rng, &work);
  rep.final_sampled_rows = work.sampled_rows;
  rep.work += work;

  const Vector g0 = a.apply_t(Vector(a.apply(x0) - b));
  const Vector g1 = a.apply_t(Vector(a.apply(out.x) - b));
  const double g0n = g0.squaredNorm();
  rep.final_gap_estimate = g0n > 0.0 ? g1.squaredNorm() / g0n * (rep.lambda_max / rep.lambda_min) : 0.0;

  const Vector step = out.x - x0;
  if (step.squaredNorm() > 0.0) {
    const double rayleigh = a.apply(step).squaredNorm() / step.squaredNorm();
    if (rayleigh < rep.lambda_min * (1.0 - 1e-9))
      throw ConfigurationError("lambda_min bound exceeds a Rayleigh quotient of A^T A; supply a smaller bound");
  }
  raise_breaches(options, rep);
  return out;
}

}  // namespace levreg
