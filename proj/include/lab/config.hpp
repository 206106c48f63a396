#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lab/coefficients.hpp"
#include "lab/dirichlet_form.hpp"
#include "lab/geometry.hpp"

namespace lab {

using Json = nlohmann::json;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"classify-1d", "capacity",       "evolve",    "domination",
                                              "dg-check",    "irreducibility", "minkowski", "parametrix"};
  return names;
}

struct ExperimentConfig {
  std::string experiment;
  Json fixture = Json::object();
  std::string output_dir;
  std::uint64_t seed = 0;
  Json document;  // the full document after overrides, echoed in the report
};

/// Sets the leaf at a dotted path; the value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& doc, const std::string& assignment);

/// Reads the config file, applies overrides and validates the top level.
/// Throws ErrorCode::schema for malformed documents.
ExperimentConfig load_config(const std::string& experiment, const std::string& path,
                             const std::vector<std::string>& overrides, const std::optional<std::string>& out_dir);
ExperimentConfig make_config(const std::string& experiment, Json document);

/// Object view that records which keys were read; finish() rejects the rest.
class Node {
 public:
  Node(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Node child(const std::string& key) const;
  std::optional<Node> optional_child(const std::string& key) const;
  const Json& raw() const { return j_; }
  const Json& raw(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<Node> array(const std::string& key) const;

  void finish() const;

 private:
  const Json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

[[noreturn]] void schema_error(const std::string& path, const std::string& what);

double as_number(const Json& j, const std::string& path);
Point as_point(const Json& j, int dim, const std::string& path);
SymMatrix as_matrix(const Json& j, int dim, const std::string& path);

/// {"bbox": [[lo, hi], ...], "h": h, "domain": {...}} with domain kinds
/// "box" (default), "ball" {center, radius}, "union-of-boxes" {boxes: [[[lo..], [hi..]], ...]}.
DomainGrid parse_grid(const Node& node);
int grid_dimension(const Node& node);

/// Target kinds: point-set, segment-set, boundary-of-domain, closed-set-mask
/// (cells or boxes), cantor (level-k prefractal in [0, 1]).
TargetSet parse_target(const Node& node, int dim, const DomainGrid* grid);

/// Field kinds: constant, profile1d, degenerate, sine; optional "scale".
CoefficientField parse_field(const Node& node, int dim, const DomainGrid* grid);

/// Cells whose centers lie in a box {"lo": [...], "hi": [...]}.
std::vector<std::size_t> cells_in_box(const DomainGrid& grid, const Box& box);
Box parse_box(const Node& node, int dim);

/// LAB_WORKERS, defaulting to 1; invalid values are a schema error.
int worker_count();

}  // namespace lab
