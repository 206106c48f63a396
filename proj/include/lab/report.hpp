#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace lab {

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation;  // how measured is compared with bound: "<=", ">=", "==", "in", ...
  bool passed = false;
};

struct RunReport {
  std::string experiment;
  nlohmann::json config_echo;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  nlohmann::json results = nlohmann::json::object();
  double wall_time = 0.0;  // seconds; printed, not serialized

  bool passed() const;
  /// Adds a check; names must be unique within a report.
  Check& add(std::string name, double measured, double bound, std::string relation, bool passed);
  Check& at_most(std::string name, double measured, double bound);
  Check& at_least(std::string name, double measured, double bound);
};

/// Sorted keys, floats as %.12e, non-finite floats as strings.
std::string to_json(const RunReport& report);
/// One line per check: NAME measured=... bound=... PASS/FAIL
std::string to_text(const RunReport& report);

/// Deterministic JSON text for any document (same float and key rules).
std::string canonical_json(const nlohmann::json& j, int indent = 2);
std::string format_real(double v);

}  // namespace lab
