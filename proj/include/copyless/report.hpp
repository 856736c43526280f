#pragma once

#include <string>

namespace copyless {

// CLI outcome mapping. Exit codes are part of the external contract:
// 0 accepted / run OK, 1 type error, 2 monitor violation, 3 parse error.
enum class Outcome : int {
  Accepted = 0,
  TypeErrorFound = 1,
  MonitorViolation = 2,
  ParseFailure = 3,
};

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Accepted: return "Accepted";
    case Outcome::TypeErrorFound: return "TypeError";
    case Outcome::MonitorViolation: return "MonitorViolation";
    case Outcome::ParseFailure: return "ParseError";
  }
  return "?";
}

constexpr const char* kSchema = "copyless-check/1";

struct Report {
  Outcome outcome{Outcome::Accepted};
  std::string payload;  // human-readable summary line

  int exit_code() const { return static_cast<int>(outcome); }
};

}  // namespace copyless
