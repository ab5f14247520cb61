#include "levreg/common.hpp"

#include "levreg/errors.hpp"

namespace levreg {

Mode parse_mode(const std::string& s) {
  if (s == "fast") return Mode::fast;
  if (s == "paper-faithful") return Mode::paper_faithful;
  if (s == "verify") return Mode::verify;
  throw ConfigurationError("unknown mode '" + s + "'");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::fast:
      return "fast";
    case Mode::paper_faithful:
      return "paper-faithful";
    case Mode::verify:
      return "verify";
  }
  return "fast";
}

}  // namespace levreg
