#include "lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lab/error.hpp"

namespace lab {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::schema, path + ": " + what);
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) schema_error("--set", "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) schema_error("--set", "empty path component in '" + key + "'");
    path.push_back(part);
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (node->is_array()) {
      char* end = nullptr;
      const long idx = std::strtol(path[i].c_str(), &end, 10);
      if (*end != '\0' || idx < 0 || static_cast<std::size_t>(idx) >= node->size())
        schema_error("--set", "bad array index '" + path[i] + "' in '" + key + "'");
      node = &(*node)[static_cast<std::size_t>(idx)];
    } else {
      if (!node->is_object()) {
        if (!node->is_null()) schema_error("--set", "'" + key + "' descends into a non-object");
        *node = Json::object();
      }
      node = &(*node)[path[i]];
    }
  }
  *node = value;
}

ExperimentConfig make_config(const std::string& experiment, Json document) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    schema_error("experiment", "unknown experiment '" + experiment + "'");
  if (!document.is_object()) schema_error("config", "document must be a JSON object");
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  Node top(document, "config");
  if (top.has("experiment") && top.string("experiment") != experiment)
    schema_error("config.experiment", "config is for '" + top.string("experiment") + "', not '" + experiment + "'");
  const std::int64_t seed = top.integer("seed", 0);
  if (seed < 0) schema_error("config.seed", "seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_dir = top.string("output_dir", "lab-out/" + experiment);
  if (top.has("fixture")) {
    if (!document["fixture"].is_object()) schema_error("config.fixture", "fixture must be an object");
    cfg.fixture = document["fixture"];
    top.child("fixture");
  }
  top.finish();
  document["experiment"] = experiment;
  document["seed"] = cfg.seed;
  document["output_dir"] = cfg.output_dir;
  cfg.document = std::move(document);
  return cfg;
}

ExperimentConfig load_config(const std::string& experiment, const std::string& path,
                             const std::vector<std::string>& overrides, const std::optional<std::string>& out_dir) {
  std::ifstream in(path);
  if (!in) schema_error(path, "cannot open config file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    schema_error(path, std::string("invalid JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (out_dir) doc["output_dir"] = *out_dir;
  return make_config(experiment, std::move(doc));
}

Node::Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) schema_error(path_, "expected an object");
}

bool Node::has(const std::string& key) const { return j_.contains(key); }

const Json& Node::raw(const std::string& key) const {
  used_.insert(key);
  if (!j_.contains(key)) schema_error(path_ + "." + key, "missing required key");
  return j_.at(key);
}

Node Node::child(const std::string& key) const { return Node(raw(key), path_ + "." + key); }

std::optional<Node> Node::optional_child(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return child(key);
}

double as_number(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  schema_error(path, "expected a number");
}

double Node::number(const std::string& key) const { return as_number(raw(key), path_ + "." + key); }

double Node::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t Node::integer(const std::string& key) const {
  const Json& j = raw(key);
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
  }
  schema_error(path_ + "." + key, "expected an integer");
}

std::int64_t Node::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Node::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& j = raw(key);
  if (!j.is_boolean()) schema_error(path_ + "." + key, "expected a boolean");
  return j.get<bool>();
}

std::string Node::string(const std::string& key) const {
  const Json& j = raw(key);
  if (!j.is_string()) schema_error(path_ + "." + key, "expected a string");
  return j.get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Node::numbers(const std::string& key) const {
  const Json& j = raw(key);
  if (!j.is_array()) schema_error(path_ + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path_ + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> Node::numbers(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? numbers(key) : fallback;
}

std::vector<Node> Node::array(const std::string& key) const {
  const Json& j = raw(key);
  if (!j.is_array()) schema_error(path_ + "." + key, "expected an array of objects");
  std::vector<Node> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.emplace_back(j[i], path_ + "." + key + "[" + std::to_string(i) + "]");
  return out;
}

void Node::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!used_.count(it.key())) schema_error(path_ + "." + it.key(), "unknown key");
}

Point as_point(const Json& j, int dim, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    schema_error(path, "expected a point with " + std::to_string(dim) + " coordinates");
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) p[k] = as_number(j[k], path);
  return p;
}

SymMatrix as_matrix(const Json& j, int dim, const std::string& path) {
  if (j.is_number()) return SymMatrix::scalar(dim, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != dim) schema_error(path, "expected a dim x dim matrix");
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim) schema_error(path, "expected a dim x dim matrix");
    for (int k = 0; k < dim; ++k) {
      const double v = as_number(j[i][k], path);
      if (k < i) {
        if (v != m(i, k)) schema_error(path, "matrix is not symmetric");
        continue;
      }
      m.set(i, k, v);
    }
  }
  return m;
}

int grid_dimension(const Node& node) {
  const Json& b = node.raw("bbox");
  if (!b.is_array() || b.empty() || b.size() > 3) schema_error(node.path() + ".bbox", "expected 1 to 3 intervals");
  return static_cast<int>(b.size());
}

Box parse_box(const Node& node, int dim) {
  Box b;
  b.lo = as_point(node.raw("lo"), dim, node.path() + ".lo");
  b.hi = as_point(node.raw("hi"), dim, node.path() + ".hi");
  for (int k = 0; k < dim; ++k)
    if (b.hi[k] < b.lo[k]) schema_error(node.path(), "box has hi < lo");
  node.finish();
  return b;
}

namespace {

bool in_box(const Box& b, const Point& x, int dim) {
  for (int k = 0; k < dim; ++k)
    if (x[k] < b.lo[k] || x[k] > b.hi[k]) return false;
  return true;
}

bool in_open_box(const Box& b, const Point& x, int dim) {
  for (int k = 0; k < dim; ++k)
    if (x[k] <= b.lo[k] || x[k] >= b.hi[k]) return false;
  return true;
}

}  // namespace

DomainGrid parse_grid(const Node& node) {
  const int dim = grid_dimension(node);
  std::vector<Interval> bbox;
  const Json& b = node.raw("bbox");
  for (int k = 0; k < dim; ++k) {
    const std::string p = node.path() + ".bbox[" + std::to_string(k) + "]";
    if (!b[k].is_array() || b[k].size() != 2) schema_error(p, "expected [lo, hi]");
    bbox.push_back({as_number(b[k][0], p), as_number(b[k][1], p)});
  }
  const double h = node.number("h");
  InsidePredicate inside = [](const Point&) { return true; };
  if (auto d = node.optional_child("domain")) {
    const std::string kind = d->string("kind");
    if (kind == "box") {
    } else if (kind == "ball") {
      const Point c = as_point(d->raw("center"), dim, d->path() + ".center");
      const double r = d->number("radius");
      if (!(r > 0.0)) schema_error(d->path() + ".radius", "radius must be positive");
      inside = [c, r, dim](const Point& x) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
        return s < r * r;
      };
    } else if (kind == "union-of-boxes") {
      std::vector<Box> boxes;
      for (const Node& bn : d->array("boxes")) boxes.push_back(parse_box(bn, dim));
      if (boxes.empty()) schema_error(d->path() + ".boxes", "need at least one box");
      inside = [boxes, dim](const Point& x) {
        return std::any_of(boxes.begin(), boxes.end(), [&](const Box& bx) { return in_open_box(bx, x, dim); });
      };
    } else {
      schema_error(d->path() + ".kind", "unknown domain kind '" + kind + "'");
    }
    d->finish();
  }
  node.finish();
  return DomainGrid::build(bbox, h, inside);
}

std::vector<std::size_t> cells_in_box(const DomainGrid& grid, const Box& box) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < grid.inside_count(); ++c)
    if (in_box(box, grid.center(c), grid.dim())) cells.push_back(c);
  return cells;
}

TargetSet parse_target(const Node& node, int dim, const DomainGrid* grid) {
  const std::string kind = node.string("kind");
  const std::string label = node.string("label", kind);
  TargetSet t;
  if (kind == "point-set") {
    std::vector<Point> pts;
    const Json& arr = node.raw("points");
    if (!arr.is_array()) schema_error(node.path() + ".points", "expected an array of points");
    for (std::size_t i = 0; i < arr.size(); ++i)
      pts.push_back(as_point(arr[i], dim, node.path() + ".points[" + std::to_string(i) + "]"));
    t = pts.empty() ? TargetSet::empty(dim, label) : TargetSet::points(dim, pts, label);
  } else if (kind == "segment-set") {
    std::vector<Segment> segs;
    const Json& arr = node.raw("segments");
    if (!arr.is_array()) schema_error(node.path() + ".segments", "expected an array of [a, b] pairs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = node.path() + ".segments[" + std::to_string(i) + "]";
      if (!arr[i].is_array() || arr[i].size() != 2) schema_error(p, "expected [a, b]");
      segs.push_back({as_point(arr[i][0], dim, p), as_point(arr[i][1], dim, p)});
    }
    t = segs.empty() ? TargetSet::empty(dim, label) : TargetSet::segments(dim, segs, label);
  } else if (kind == "boundary-of-domain") {
    if (!grid) schema_error(node.path(), "boundary-of-domain needs a grid");
    t = TargetSet::boundary_of(*grid, label);
  } else if (kind == "closed-set-mask") {
    if (node.has("cells")) {
      if (!grid) schema_error(node.path(), "cell masks need a grid");
      std::vector<std::size_t> cells;
      for (double v : node.numbers("cells")) {
        if (v < 0 || std::floor(v) != v || v >= static_cast<double>(grid->cell_count()))
          schema_error(node.path() + ".cells", "cell index out of range");
        cells.push_back(static_cast<std::size_t>(v));
      }
      t = TargetSet::cell_mask(*grid, cells, label);
    } else {
      std::vector<Box> boxes;
      for (const Node& bn : node.array("boxes")) boxes.push_back(parse_box(bn, dim));
      t = boxes.empty() ? TargetSet::empty(dim, label) : TargetSet::boxes(dim, boxes, TargetKind::closed_set_mask, label);
    }
  } else if (kind == "cantor") {
    if (dim != 1) schema_error(node.path(), "cantor targets are 1-D");
    const auto level = node.integer("level");
    if (level < 0 || level > 16) schema_error(node.path() + ".level", "level must lie in [0, 16]");
    t = TargetSet::cantor_prefractal(static_cast<int>(level));
  } else {
    schema_error(node.path() + ".kind", "unknown target kind '" + kind + "'");
  }
  node.finish();
  return t;
}

CoefficientField parse_field(const Node& node, int dim, const DomainGrid* grid) {
  const std::string kind = node.string("kind");
  const double scale = node.number("scale", 1.0);
  if (!(scale > 0.0)) schema_error(node.path() + ".scale", "scale must be positive");
  std::optional<CoefficientField> field;
  if (kind == "constant") {
    const SymMatrix c = as_matrix(node.raw("value"), dim, node.path() + ".value");
    field = CoefficientField::constant(c);
  } else if (kind == "profile1d") {
    if (dim != 1) schema_error(node.path(), "profile1d is 1-D");
    field = profile_field(make_profile_1d(node.number("delta")));
  } else if (kind == "degenerate") {
    const TargetSet a = parse_target(node.child("target"), dim, grid);
    const SymMatrix base = node.has("base") ? as_matrix(node.raw("base"), dim, node.path() + ".base")
                                            : SymMatrix::identity(dim);
    field = make_degenerate_field(dim, a, node.number("gamma"), node.number("amplitude", 1.0), base);
  } else if (kind == "sine") {
    const double a = node.number("a"), b = node.number("b");
    if (!(a > std::abs(b))) schema_error(node.path(), "sine field needs a > |b|");
    field = CoefficientField::scalar(
        dim, [a, b](const Point& x) { return a + b * std::sin(x[0]); }, "sine", std::abs(b));
  } else {
    schema_error(node.path() + ".kind", "unknown field kind '" + kind + "'");
  }
  node.finish();
  return scale == 1.0 ? *field : field->scaled(scale);
}

int worker_count() {
  const char* env = std::getenv("LAB_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) schema_error("LAB_WORKERS", "expected an integer in [1, 1024]");
  return static_cast<int>(v);
}

}  // namespace lab
