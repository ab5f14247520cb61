#include "levreg/report.hpp"

#include <iomanip>
#include <sstream>

namespace levreg {

using nlohmann::json;

json to_json(const WorkCounters& w) {
  return json{{"coordinate_updates", w.coordinate_updates}, {"acd_calls", w.acd_calls},
              {"prox_steps", w.prox_steps},                 {"outer_steps", w.outer_steps},
              {"sampled_rows", w.sampled_rows},             {"probe_solves", w.probe_solves}};
}

WorkCounters work_counters_from_json(const json& j) {
  WorkCounters w;
  w.coordinate_updates = j.at("coordinate_updates").get<std::int64_t>();
  w.acd_calls = j.at("acd_calls").get<std::int64_t>();
  w.prox_steps = j.at("prox_steps").get<std::int64_t>();
  w.outer_steps = j.at("outer_steps").get<std::int64_t>();
  w.sampled_rows = j.at("sampled_rows").get<std::int64_t>();
  w.probe_solves = j.at("probe_solves").get<std::int64_t>();
  return w;
}

json to_json(const SolverReport& r, bool timings) {
  json phases = json::array();
  json schedule = json::array(), sampled = json::array(), clamps = json::array();
  for (const PhaseRecord& p : r.phases) {
    json ph{{"eta", p.eta},
            {"probes", p.probes},
            {"coordinate_updates", p.coordinate_updates},
            {"sampled_rows", p.sampled_rows},
            {"clamped", p.clamped}};
    if (p.invariant_excess) ph["invariant_excess"] = *p.invariant_excess;
    if (timings) ph["wall_ms"] = p.wall_ms;
    phases.push_back(std::move(ph));
    schedule.push_back(p.eta);
    sampled.push_back(p.sampled_rows);
    clamps.push_back(p.clamped);
  }
  return json{{"schema", kReportSchema},
              {"seed", r.seed},
              {"mode", to_string(r.mode)},
              {"lambda_min", r.lambda_min},
              {"lambda_max", r.lambda_max},
              {"phases", std::move(phases)},
              {"eta_schedule", std::move(schedule)},
              {"coordinate_updates_total", r.work.coordinate_updates},
              {"sampled_rows_per_phase", std::move(sampled)},
              {"final_sampled_rows", r.final_sampled_rows},
              {"final_gap_estimate", r.final_gap_estimate},
              {"clamp_flags", std::move(clamps)},
              {"work", to_json(r.work)},
              {"certified", r.certified},
              {"warnings", r.warnings},
              {"breached_phases", r.breached_phases}};
}

SolverReport solver_report_from_json(const json& j) {
  if (j.at("schema").get<int>() != kReportSchema) throw ParseError("unsupported report schema");
  SolverReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.lambda_min = j.at("lambda_min").get<double>();
  r.lambda_max = j.at("lambda_max").get<double>();
  for (const json& ph : j.at("phases")) {
    PhaseRecord p;
    p.eta = ph.at("eta").get<double>();
    p.probes = ph.at("probes").get<Index>();
    p.coordinate_updates = ph.at("coordinate_updates").get<std::int64_t>();
    p.sampled_rows = ph.at("sampled_rows").get<std::int64_t>();
    p.clamped = ph.at("clamped").get<bool>();
    if (ph.contains("invariant_excess")) p.invariant_excess = ph.at("invariant_excess").get<double>();
    if (ph.contains("wall_ms")) p.wall_ms = ph.at("wall_ms").get<double>();
    r.phases.push_back(p);
  }
  r.final_sampled_rows = j.at("final_sampled_rows").get<std::int64_t>();
  r.final_gap_estimate = j.at("final_gap_estimate").get<double>();
  r.work = work_counters_from_json(j.at("work"));
  r.certified = j.at("certified").get<bool>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.breached_phases = j.at("breached_phases").get<std::vector<std::string>>();
  return r;
}

json to_json(const ErmReport& r, bool timings) {
  json out{{"schema", kReportSchema},
           {"lambda_min", r.lambda_min},
           {"lambda_max", r.lambda_max},
           {"distortion", r.distortion},
           {"halvings", r.reduction.halvings},
           {"loops_per_halving", r.reduction.loops},
           {"base_calls", r.reduction.base_calls},
           {"certified_early", r.reduction.certified_early},
           {"rejected_steps", r.rejected_steps},
           {"coordinate_updates_total", r.work.coordinate_updates},
           {"work", to_json(r.work)},
           {"final_gradient_sq", r.final_gradient_sq}};
  if (r.leverage) out["leverage"] = to_json(*r.leverage, timings);
  return out;
}

std::string bench_csv_header() { return "n,d,kappa,kappa_sum,method,coordinate_updates,sampled_rows,wall_ms,seed"; }

std::string to_csv(const BenchRow& r) {
  std::ostringstream s;
  s << std::setprecision(10) << r.n << ',' << r.d << ',' << r.kappa << ',' << r.kappa_sum << ',' << r.method << ','
    << r.coordinate_updates << ',' << r.sampled_rows << ',' << r.wall_ms << ',' << r.seed;
  return s.str();
}

}  // namespace levreg
