#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "levreg/dual_regression.hpp"
#include "levreg/erm.hpp"
#include "levreg/errors.hpp"
#include "levreg/generate.hpp"
#include "levreg/homotopy.hpp"
#include "levreg/leverage.hpp"
#include "levreg/matrix_market.hpp"
#include "levreg/oracle.hpp"
#include "levreg/reduction.hpp"
#include "levreg/report.hpp"

namespace levreg::cli {

namespace {

using nlohmann::json;

struct Problem {
  SparseMatrix a;
  Vector b;
  Vector x0;
};

Problem load(const RunConfig& cfg, bool rhs_required) {
  if (cfg.matrix.empty()) throw ConfigurationError("--matrix is required");
  Problem p;
  p.a = read_matrix_market_file(cfg.matrix);
  if (!cfg.rhs.empty()) {
    p.b = read_vector_file(cfg.rhs);
    if (p.b.size() != p.a.rows())
      throw DimensionMismatch("rhs has " + std::to_string(p.b.size()) + " entries, matrix has " +
                              std::to_string(p.a.rows()) + " rows");
  } else if (rhs_required) {
    throw ConfigurationError("--rhs is required");
  }
  if (!cfg.x0.empty()) {
    p.x0 = read_vector_file(cfg.x0);
    if (p.x0.size() != p.a.cols()) throw DimensionMismatch("x0 length != matrix columns");
  } else {
    p.x0 = Vector::Zero(p.a.cols());
  }
  return p;
}

struct Bounds {
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
};

Bounds bounds(const RunConfig& cfg, const SparseMatrix& a, Mode mode) {
  Bounds b;
  b.lambda_min = cfg.lambda_min;
  if (!b.lambda_min && cfg.kappa) {
    if (!(*cfg.kappa >= 1.0)) throw ConfigurationError("--kappa must be >= 1");
    b.lambda_max = 1.05 * power_iteration(a, 200, 1e-4, cfg.seed);
    b.lambda_min = *b.lambda_max / *cfg.kappa;
  }
  if (!b.lambda_min && mode == Mode::verify) b.lambda_min = oracle_spectral(a).lambda_min;
  if (!b.lambda_min) throw ConfigurationError("supply --lambda-min or --kappa (or use --mode verify)");
  return b;
}

SamplingOptions sampling(const RunConfig& cfg) {
  SamplingOptions s;
  if (cfg.k) s.k = *cfg.k;
  if (cfg.k_prime) s.k_prime = *cfg.k_prime;
  return s;
}

HomotopyOptions homotopy_options(const RunConfig& cfg, Mode mode, const Bounds& b) {
  HomotopyOptions h;
  h.epsilon = cfg.epsilon;
  h.lambda_min = b.lambda_min;
  h.lambda_max = b.lambda_max;
  h.mode = mode;
  h.seed = cfg.seed;
  h.sampling = sampling(cfg);
  if (cfg.c) h.jl_c = *cfg.c;
  if (cfg.factor) h.overestimate_factor = *cfg.factor;
  h.strict_invariants = mode == Mode::verify;
  return h;
}

void emit(const RunConfig& cfg, const json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw ConfigurationError("cannot write " + cfg.out);
  f << text;
}

void write_solution(const RunConfig& cfg, const Vector& x) {
  if (cfg.solution.empty()) return;
  std::ofstream f(cfg.solution);
  if (!f) throw ConfigurationError("cannot write " + cfg.solution);
  write_vector(f, x);
}

json header(const RunConfig& cfg, Mode mode) {
  return json{{"schema", kReportSchema}, {"subcommand", cfg.subcommand}, {"seed", cfg.seed}, {"mode", to_string(mode)}};
}

struct Check {
  std::string name;
  bool passed;
  double value;
};

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const Check& c : checks) arr.push_back(json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}});
  return arr;
}

void raise_failed(const std::vector<Check>& checks) {
  std::string failed;
  for (const Check& c : checks)
    if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name + " (" + std::to_string(c.value) + ")";
  if (!failed.empty()) throw InvariantViolation("invariants violated: " + failed);
}

double regression_gap(const SparseMatrix& a, const Vector& x, const Vector& x0, const Vector& xs) {
  const double den = a.apply(Vector(x0 - xs)).squaredNorm();
  return den > 0.0 ? a.apply(Vector(x - xs)).squaredNorm() / den : 0.0;
}

int cmd_solve(const RunConfig& cfg, Mode mode, std::ostream& out) {
  const Problem p = load(cfg, true);
  const Bounds b = bounds(cfg, p.a, mode);
  HomotopyOptions h = homotopy_options(cfg, mode, b);
  h.strict_invariants = false;
  const SolveResult res = homotopy_solve(p.a, p.b, p.x0, h);
  write_solution(cfg, res.x);
  json j = header(cfg, mode);
  j.update(to_json(res.report, cfg.timings));
  j["subcommand"] = cfg.subcommand;
  if (!cfg.solution.empty()) j["solution"] = cfg.solution;
  std::vector<Check> checks;
  if (mode == Mode::verify) {
    const Vector xs = oracle_solve(p.a, p.b);
    const double gap = regression_gap(p.a, res.x, p.x0, xs);
    checks.push_back({"final_gap", gap <= cfg.epsilon, gap});
    double worst = -1.0;
    for (const PhaseRecord& ph : res.report.phases) worst = std::max(worst, ph.invariant_excess.value_or(-1.0));
    checks.push_back({"phase_bracket", res.report.breached_phases.empty(), worst});
    j["checks"] = checks_json(checks);
  }
  emit(cfg, j, out);
  raise_failed(checks);
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load(cfg, true);
  const SpectralBounds sb = oracle_spectral(p.a);
  RunConfig local = cfg;
  const Bounds b = bounds(local, p.a, Mode::verify);
  HomotopyOptions h = homotopy_options(local, Mode::verify, b);
  h.strict_invariants = false;
  std::optional<std::pair<double, Vector>> first;
  h.observer = [&](double eta, const Vector& u) {
    if (!first) first.emplace(eta, u);
  };
  const SolveResult res = homotopy_solve(p.a, p.b, p.x0, h);
  write_solution(cfg, res.x);

  std::vector<Check> checks;
  const Vector xs = oracle_solve(p.a, p.b);
  const double gap = regression_gap(p.a, res.x, p.x0, xs);
  checks.push_back({"final_gap", gap <= cfg.epsilon, gap});
  double worst = -1.0;
  for (const PhaseRecord& ph : res.report.phases) worst = std::max(worst, ph.invariant_excess.value_or(-1.0));
  checks.push_back({"phase_bracket", res.report.breached_phases.empty(), worst});

  if (first) {
    const Vector sigma = oracle_leverage(AugmentedView(p.a, first->first));
    double excess = -1.0;
    for (Index i = 0; i < sigma.size(); ++i) {
      excess = std::max(excess, (sigma[i] - first->second[i]) / sigma[i]);
      excess = std::max(excess, (first->second[i] - 2.0 * sigma[i]) / (2.0 * sigma[i]));
    }
    checks.push_back({"initial_overestimate", excess <= 1e-9, excess});
  }
  const int expected = static_cast<int>(std::ceil(std::log(10.0 * sb.kappa) / std::log(4.0 / 3.0)));
  const int phases = static_cast<int>(res.report.phases.size());
  checks.push_back({"phase_count", std::abs(phases - expected) <= 1 || b.lambda_min != sb.lambda_min,
                    static_cast<double>(phases - expected)});

  const Vector sigma = oracle_leverage(p.a);
  const double rank_err = std::abs(sigma.sum() - static_cast<double>(p.a.cols()));
  checks.push_back({"leverage_sum", rank_err <= 1e-6, rank_err});
  const Vector ax = p.a.apply(xs);
  const double adj = std::abs(p.a.apply_t(ax).dot(xs) - ax.squaredNorm()) / std::max(1e-300, ax.squaredNorm());
  checks.push_back({"adjoint", adj <= 1e-10, adj});
  const Vector grad = p.a.apply_t(Vector(ax - p.b));
  const double opt = grad.norm() / std::max(1e-300, p.a.apply_t(p.b).norm());
  checks.push_back({"oracle_optimality", opt <= 1e-8, opt});

  json j = header(cfg, Mode::verify);
  j.update(to_json(res.report, cfg.timings));
  j["subcommand"] = cfg.subcommand;
  j["kappa"] = sb.kappa;
  j["kappa_sum"] = sb.kappa_sum;
  j["checks"] = checks_json(checks);
  emit(cfg, j, out);
  raise_failed(checks);
  return kOk;
}

int cmd_leverage(const RunConfig& cfg, Mode mode, std::ostream& out) {
  const Problem p = load(cfg, false);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigurationError("--delta must be in (0,1)");
  Bounds b = bounds(cfg, p.a, mode);
  if (!b.lambda_max) b.lambda_max = std::max(*b.lambda_min, 1.05 * power_iteration(p.a, 200, 1e-4, cfg.seed));
  RunConfig boot_cfg = cfg;
  boot_cfg.c.reset();
  HomotopyOptions h = homotopy_options(boot_cfg, mode, b);
  h.strict_invariants = false;
  const LeverageBootstrap boot = homotopy_leverage(p.a, h);

  const AugmentedView view(p.a);
  LsOptions ls;
  ls.lambda_min = *b.lambda_min;
  ls.sampling = sampling(cfg);
  ls.mode = mode;
  RegressionSolver solver = [&](const Block& rhs, const Block& start, double eps, Rng& r) {
    return solve_using_ls(view, boot.u, rhs, start, eps, ls, r);
  };
  JlOptions jl;
  if (cfg.c) jl.c = *cfg.c;
  jl.kappa = *b.lambda_max / *b.lambda_min;
  jl.mode = mode;
  Rng rng = derive_rng(cfg.seed, 3);
  WorkCounters work;
  const LeverageEstimate est = compute_ls(view, cfg.delta, solver, jl, rng, &work);

  const double n = static_cast<double>(p.a.rows());
  const double slack = cfg.delta / (n * jl.kappa);
  const Vector lo = ((est.scores.array() - slack) / (1.0 + cfg.delta)).max(0.0).matrix();
  const Vector hi = est.scores.array().min(1.0).matrix();

  json j = header(cfg, mode);
  j["delta"] = cfg.delta;
  j["kappa"] = jl.kappa;
  j["probes"] = est.probes;
  j["epsilon_inner"] = est.epsilon_inner;
  j["clamped"] = est.clamped;
  j["scores"] = std::vector<double>(est.scores.data(), est.scores.data() + est.scores.size());
  j["bracket_lower"] = std::vector<double>(lo.data(), lo.data() + lo.size());
  j["bracket_upper"] = std::vector<double>(hi.data(), hi.data() + hi.size());
  j["work"] = to_json(work);
  j["homotopy"] = to_json(boot.report, cfg.timings);
  std::vector<Check> checks;
  if (mode == Mode::verify) {
    const Vector sigma = oracle_leverage(p.a);
    Index worst_row = -1;
    for (Index i = 0; i < sigma.size(); ++i)
      if (sigma[i] < lo[i] - 1e-12 || sigma[i] > hi[i] + 1e-12) {
        worst_row = i;
        break;
      }
    checks.push_back({"leverage_bracket", worst_row < 0, static_cast<double>(worst_row)});
    j["oracle_scores"] = std::vector<double>(sigma.data(), sigma.data() + sigma.size());
    j["checks"] = checks_json(checks);
  }
  emit(cfg, j, out);
  raise_failed(checks);
  return kOk;
}

int cmd_erm(const RunConfig& cfg, Mode mode, std::ostream& out) {
  const Problem prob = load(cfg, false);
  ErmProblem p = make_erm_problem(prob.a, cfg.psi, prob.b);
  check_components(p);
  const Bounds b = bounds(cfg, p.a, mode);
  ErmOptions opts;
  opts.lambda_min = b.lambda_min;
  opts.lambda_max = b.lambda_max;
  opts.mode = mode;
  opts.seed = cfg.seed;
  opts.leverage = homotopy_options(cfg, mode, b);
  opts.leverage.strict_invariants = false;
  const ErmResult res = erm_full_solve(p, prob.x0, cfg.epsilon, opts);
  write_solution(cfg, res.x);

  json j = header(cfg, mode);
  j["psi"] = cfg.psi;
  j["m_bound"] = p.m_bound;
  j["erm"] = to_json(res.report, cfg.timings);
  j["value"] = erm_value_grad(p, res.x).first;
  if (!cfg.solution.empty()) j["solution"] = cfg.solution;
  std::vector<Check> checks;
  if (mode == Mode::verify) {
    const Vector xs = erm_oracle_minimize(p, prob.x0);
    const double fs = erm_value_grad(p, xs).first;
    const double f0 = erm_value_grad(p, prob.x0).first;
    const double gap = f0 > fs ? (erm_value_grad(p, res.x).first - fs) / (f0 - fs) : 0.0;
    checks.push_back({"final_gap", gap <= cfg.epsilon, gap});
    j["checks"] = checks_json(checks);
  }
  emit(cfg, j, out);
  raise_failed(checks);
  return kOk;
}

int cmd_bench(const RunConfig& cfg, Mode mode, std::ostream& out) {
  const std::vector<std::int64_t> sizes =
      cfg.sizes.empty() ? std::vector<std::int64_t>{1000, 10000, 50000} : cfg.sizes;
  const Index d = cfg.d > 0 ? cfg.d : 50;
  const InstanceKind kind = parse_instance_kind(cfg.kind);
  GenerateOptions g;
  g.density = cfg.density;
  std::ostringstream csv;
  csv << bench_csv_header() << '\n';
  for (const std::int64_t n : sizes) {
    const Instance inst = generate(kind, n, d, cfg.kappa.value_or(100.0), cfg.seed, g);
    const SpectralBounds sb = oracle_spectral(inst.a);
    const Vector x0 = Vector::Zero(d);
    for (const std::string& method : cfg.methods) {
      BenchRow row{n, d, sb.kappa, sb.kappa_sum, method, 0, 0, 0.0, cfg.seed};
      const auto t0 = std::chrono::steady_clock::now();
      if (method == "sampled") {
        HomotopyOptions h;
        h.epsilon = cfg.epsilon;
        h.lambda_min = sb.lambda_min;
        h.mode = mode;
        h.seed = cfg.seed;
        h.sampling = sampling(cfg);
        if (cfg.c) h.jl_c = *cfg.c;
        if (cfg.factor) h.overestimate_factor = *cfg.factor;
        const SolveResult res = homotopy_solve(inst.a, inst.b, x0, h);
        row.coordinate_updates = res.report.work.coordinate_updates;
        row.sampled_rows = res.report.work.sampled_rows;
      } else if (method == "unsampled") {
        DualOptions dual;
        dual.lambda = sb.lambda_min;
        dual.mode = mode;
        Rng rng = derive_rng(cfg.seed, 4);
        WorkCounters work;
        dual_regression_solve(inst.a, inst.b, x0, cfg.epsilon, dual, rng, &work);
        row.coordinate_updates = work.coordinate_updates;
        row.sampled_rows = n;
      } else {
        throw ConfigurationError("unknown bench method '" + method + "'");
      }
      if (cfg.timings)
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      csv << to_csv(row) << '\n';
    }
  }
  if (cfg.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw ConfigurationError("cannot write " + cfg.out);
    f << csv.str();
  }
  return kOk;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw ConfigurationError("--out PREFIX is required");
  if (cfg.n < 1 || cfg.d < 1) throw ConfigurationError("--n and --d must be positive");
  if (cfg.n < cfg.d) throw ConfigurationError("generate needs n >= d");
  GenerateOptions g;
  g.density = cfg.density;
  const Instance inst = generate(parse_instance_kind(cfg.kind), cfg.n, cfg.d, cfg.kappa.value_or(100.0), cfg.seed, g);
  const std::string mtx = cfg.out + ".mtx", rhs = cfg.out + ".rhs";
  std::ofstream fa(mtx), fb(rhs);
  if (!fa || !fb) throw ConfigurationError("cannot write " + cfg.out + ".*");
  write_matrix_market(fa, inst.a);
  write_vector(fb, inst.b);
  json j{{"schema", kReportSchema}, {"subcommand", "generate"}, {"kind", cfg.kind}, {"n", cfg.n},
         {"d", cfg.d},              {"seed", cfg.seed},          {"matrix", mtx},     {"rhs", rhs}};
  if (cfg.kappa) j["kappa_target"] = *cfg.kappa;
  out << j.dump(2) << "\n";
  return kOk;
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigurationError("--epsilon must be in (0,1)");
  const Mode mode = parse_mode(cfg.mode);
  if (cfg.subcommand == "solve") return cmd_solve(cfg, mode, out);
  if (cfg.subcommand == "verify") return cmd_verify(cfg, out);
  if (cfg.subcommand == "leverage") return cmd_leverage(cfg, mode, out);
  if (cfg.subcommand == "erm") return cmd_erm(cfg, mode, out);
  if (cfg.subcommand == "bench") return cmd_bench(cfg, mode, out);
  if (cfg.subcommand == "generate") return cmd_generate(cfg, out);
  throw ConfigurationError("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(config, out);
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kInvariantViolation;
  } catch (const RankDeficient& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const NonConvergence& e) {
    err << "convergence error: " << e.what() << "\n";
    return kNumericError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const SamplingFailure& e) {
    err << "sampling error: " << e.what() << "\n";
    return kNumericError;
  } catch (const PreconditionerQuality& e) {
    err << "preconditioner error: " << e.what() << "\n";
    return kNumericError;
  } catch (const BoostFailure& e) {
    err << "boosting error: " << e.what() << "\n";
    return kNumericError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kArgumentError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leverage-score sampling least squares and ERM solver"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--mode", cfg.mode, "fast | paper-faithful | verify")
        ->check(CLI::IsMember({"fast", "paper-faithful", "verify"}));
    sub->add_option("--out", cfg.out, "Output path");
    sub->add_flag("--timings", cfg.timings, "Include wall-clock times");
    sub->add_option("--k", cfg.k, "Sampling constant k");
    sub->add_option("--c", cfg.c, "Probe constant c");
    sub->add_option("--k-prime", cfg.k_prime, "Sampling constant k'");
    sub->add_option("--factor", cfg.factor, "Overestimate multiplier");
  };
  auto inputs = [&](CLI::App* sub) {
    sub->add_option("--matrix,-A", cfg.matrix, "Matrix Market file");
    sub->add_option("--rhs,-b", cfg.rhs, "Right-hand side, one value per line");
    sub->add_option("--x0", cfg.x0, "Starting point, one value per line");
    sub->add_option("--epsilon", cfg.epsilon, "Relative accuracy");
    sub->add_option("--lambda-min", cfg.lambda_min, "Lower bound on lambda_min(A^T A)");
    sub->add_option("--kappa", cfg.kappa, "Upper bound on the condition number of A^T A");
    sub->add_option("--solution", cfg.solution, "Write the solution vector here");
  };

  CLI::App* solve = app.add_subcommand("solve", "Least squares by the eta homotopy");
  inputs(solve);
  common(solve);
  CLI::App* verify = app.add_subcommand("verify", "Solve with dense oracle checks of every invariant");
  inputs(verify);
  common(verify);
  CLI::App* lev = app.add_subcommand("leverage", "Leverage score estimates with a bracket per row");
  inputs(lev);
  common(lev);
  lev->add_option("--delta", cfg.delta, "Estimate accuracy");
  CLI::App* erm = app.add_subcommand("erm", "Generalized ERM with scalar components");
  inputs(erm);
  common(erm);
  erm->add_option("--psi", cfg.psi, "quadratic | logistic-aug")->check(CLI::IsMember({"quadratic", "logistic-aug"}));
  CLI::App* bench = app.add_subcommand("bench", "Work-counter sweep as CSV");
  common(bench);
  bench->add_option("--sizes", cfg.sizes, "Row counts")->delimiter(',');
  bench->add_option("--d", cfg.d, "Columns");
  bench->add_option("--kind", cfg.kind, "gaussian | ill-conditioned | coherent-rows");
  bench->add_option("--kappa", cfg.kappa, "Target condition number (ill-conditioned)");
  bench->add_option("--density", cfg.density, "Fraction of nonzeros per row");
  bench->add_option("--epsilon", cfg.epsilon, "Relative accuracy");
  bench->add_option("--methods", cfg.methods, "sampled,unsampled")->delimiter(',');
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic instance");
  gen->add_option("--kind", cfg.kind, "gaussian | ill-conditioned | coherent-rows");
  gen->add_option("--n", cfg.n, "Rows")->required();
  gen->add_option("--d", cfg.d, "Columns")->required();
  gen->add_option("--kappa", cfg.kappa, "Target condition number");
  gen->add_option("--density", cfg.density, "Fraction of nonzeros per row");
  gen->add_option("--seed", cfg.seed, "Random seed");
  gen->add_option("--out", cfg.out, "Output prefix")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kArgumentError;
  }
  for (CLI::App* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
  return run(cfg, out, err);
}

}  // namespace levreg::cli
