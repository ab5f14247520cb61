#pragma once

#include <cstdint>
#include <string>

namespace levreg {

/// fast: monitored stopping and clamped accuracies.
/// paper_faithful: theory iteration counts, no certification of probabilistic claims.
/// verify: fast plus oracle invariant checks.
enum class Mode { fast, paper_faithful, verify };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct WorkCounters {
  std::int64_t coordinate_updates = 0;
  std::int64_t acd_calls = 0;
  std::int64_t prox_steps = 0;
  std::int64_t outer_steps = 0;
  std::int64_t sampled_rows = 0;
  std::int64_t probe_solves = 0;

  WorkCounters& operator+=(const WorkCounters& o) {
    coordinate_updates += o.coordinate_updates;
    acd_calls += o.acd_calls;
    prox_steps += o.prox_steps;
    outer_steps += o.outer_steps;
    sampled_rows += o.sampled_rows;
    probe_solves += o.probe_solves;
    return *this;
  }
};

}  // namespace levreg
