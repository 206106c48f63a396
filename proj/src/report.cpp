#include "lab/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lab/error.hpp"

namespace lab {

bool RunReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Check& RunReport::add(std::string name, double measured, double bound, std::string relation, bool ok) {
  for (const auto& c : checks)
    require(c.name != name, ErrorCode::invalid_argument, "duplicate check name '" + name + "'");
  checks.push_back({std::move(name), measured, bound, std::move(relation), ok});
  return checks.back();
}

Check& RunReport::at_most(std::string name, double measured, double bound) {
  return add(std::move(name), measured, bound, "<=", measured <= bound);
}

Check& RunReport::at_least(std::string name, double measured, double bound) {
  return add(std::move(name), measured, bound, ">=", measured >= bound);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

namespace {

void emit(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      std::map<std::string, const nlohmann::json*> sorted;
      for (auto it = j.begin(); it != j.end(); ++it) sorted.emplace(it.key(), &it.value());
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [k, v] : sorted) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + nlohmann::json(k).dump() + (indent > 0 ? ": " : ":");
        emit(*v, indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        emit(j[i], indent, depth + 1, out);
      }
      out += nl + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) out += format_real(v);
      else out += "\"" + format_real(v) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += "\n";
  return out;
}

std::string to_json(const RunReport& report) {
  nlohmann::json doc;
  doc["experiment"] = report.experiment;
  doc["config_echo"] = report.config_echo;
  doc["passed"] = report.passed();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"bound", c.bound},
                      {"relation", c.relation},
                      {"passed", c.passed}});
  doc["checks"] = checks;
  doc["artifacts"] = report.artifacts;
  doc["results"] = report.results;
  return canonical_json(doc);
}

std::string to_text(const RunReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks)
    out << c.name << " measured=" << format_real(c.measured) << " bound=" << format_real(c.bound) << ' '
        << (c.passed ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace lab
