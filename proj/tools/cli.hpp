#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace levreg::cli {

enum ExitCode : int { kOk = 0, kArgumentError = 2, kNumericError = 3, kInvariantViolation = 4 };

struct RunConfig {
  std::string subcommand;
  std::string matrix;
  std::string rhs;
  std::string x0;
  double epsilon = 1e-8;
  double delta = 0.25;
  std::uint64_t seed = 0;
  std::optional<double> lambda_min;
  std::optional<double> kappa;
  std::string mode = "fast";
  std::string psi = "logistic-aug";
  /// Constant overrides; unset keeps the library defaults.
  std::optional<double> k;
  std::optional<double> c;
  std::optional<double> k_prime;
  std::optional<double> factor;
  std::string out;
  std::string solution;
  bool timings = false;

  // generate and bench
  std::string kind = "gaussian";
  std::int64_t n = 0;
  std::int64_t d = 0;
  double density = 1.0;
  std::vector<std::int64_t> sizes;
  std::vector<std::string> methods{"sampled", "unsampled"};
};

/// Parses argv-style arguments (without the program name) and runs them.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace levreg::cli
