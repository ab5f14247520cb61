#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "levreg/erm.hpp"
#include "levreg/homotopy.hpp"

namespace levreg {

inline constexpr int kReportSchema = 1;

/// Phase wall times are written only when timings is set, so reports for the
/// same configuration and seed are byte-identical by default.
nlohmann::json to_json(const SolverReport& report, bool timings = false);
SolverReport solver_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const WorkCounters& w);
WorkCounters work_counters_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ErmReport& report, bool timings = false);

struct BenchRow {
  Index n = 0;
  Index d = 0;
  double kappa = 0.0;
  double kappa_sum = 0.0;
  std::string method;
  std::int64_t coordinate_updates = 0;
  std::int64_t sampled_rows = 0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

std::string bench_csv_header();
std::string to_csv(const BenchRow& row);

}  // namespace levreg
