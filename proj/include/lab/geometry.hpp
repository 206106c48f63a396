#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lab/point.hpp"

namespace lab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using InsidePredicate = std::function<bool(const Point&)>;

/// Uniform cell-centered lattice over a bounding box with an inside mask.
///
/// Lattice indices run over every cell of the box (x fastest). Fields live on
/// the inside cells only and are addressed by compact indices 0..inside_count-1
/// assigned in increasing lattice order.
class DomainGrid {
 public:
  /// Throws ErrorCode::invalid_argument for a bad box/spacing and
  /// ErrorCode::empty_domain when no cell center satisfies the predicate.
  static DomainGrid build(std::span<const Interval> bbox, double h, const InsidePredicate& inside);

  int dim() const { return dim_; }
  double h() const { return h_; }
  const Interval& axis(int k) const { return bbox_[k]; }
  std::array<int, kMaxDim> shape() const { return shape_; }
  /// Measure of one cell, h^dim.
  double cell_volume() const { return cell_volume_; }

  std::size_t cell_count() const { return lattice_to_compact_.size(); }
  std::size_t inside_count() const { return compact_to_lattice_.size(); }

  bool inside_lattice(std::size_t lattice) const { return lattice_to_compact_[lattice] >= 0; }
  /// -1 for outside cells.
  std::int64_t compact_index(std::size_t lattice) const { return lattice_to_compact_[lattice]; }
  std::size_t lattice_index(std::size_t compact) const { return compact_to_lattice_[compact]; }

  std::array<int, kMaxDim> coords(std::size_t lattice) const;
  std::size_t lattice_of(const std::array<int, kMaxDim>& c) const;
  Point lattice_center(std::size_t lattice) const;
  Point center(std::size_t compact) const { return lattice_center(compact_to_lattice_[compact]); }

  /// Lattice neighbor along `axis` in direction +1/-1, or -1 outside the box.
  std::int64_t lattice_neighbor(std::size_t lattice, int axis, int dir) const;
  /// Compact neighbor, or -1 when the neighbor is outside the box or the mask.
  std::int64_t neighbor(std::size_t compact, int axis, int dir) const;

  /// Inside cells (compact) with at least one face neighbor outside Omega.
  std::vector<std::size_t> boundary_cells() const;
  /// Compact index of the inside cell whose center is nearest to p.
  std::size_t nearest_cell(const Point& p) const;

 private:
  int dim_ = 1;
  double h_ = 1.0;
  double cell_volume_ = 1.0;
  std::array<Interval, kMaxDim> bbox_{};
  std::array<int, kMaxDim> shape_{1, 1, 1};
  std::vector<std::int64_t> lattice_to_compact_;
  std::vector<std::size_t> compact_to_lattice_;
};

enum class TargetKind { boundary_of_domain, point_set, segment_set, closed_set_mask };

std::string to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& name);

/// Axis-aligned closed box; points and axis-aligned segments/faces are degenerate boxes.
struct Box {
  Point lo{};
  Point hi{};
};

struct Segment {
  Point a{};
  Point b{};
};

/// A closed set A (or a bounded piece B of it), stored as a union of
/// axis-aligned boxes plus arbitrary segments. Distances are exact.
class TargetSet {
 public:
  TargetSet() = default;

  static TargetSet empty(int dim, std::string label = "empty");
  static TargetSet points(int dim, std::span<const Point> pts, std::string label = "points");
  static TargetSet segments(int dim, std::span<const Segment> segs, std::string label = "segments");
  static TargetSet boxes(int dim, std::span<const Box> boxes, TargetKind kind, std::string label);
  /// The lattice faces separating inside cells from the exterior (and the box hull).
  static TargetSet boundary_of(const DomainGrid& grid, std::string label = "boundary");
  /// Cell centers of the given lattice cells.
  static TargetSet cell_mask(const DomainGrid& grid, std::span<const std::size_t> lattice_cells,
                             std::string label = "mask");
  /// Level-k middle-thirds Cantor prefractal in [0,1]: 2^k closed intervals.
  static TargetSet cantor_prefractal(int level);

  TargetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  bool is_empty() const { return box_count() == 0 && segments_.empty(); }
  std::size_t box_count() const { return lo_[0].size(); }
  const std::vector<Segment>& segment_list() const { return segments_; }
  Box box(std::size_t i) const;

  double squared_distance(const Point& x) const;
  double distance(const Point& x) const;
  /// Bounding box of the set (undefined for empty sets).
  Box bounds() const;

 private:
  void push_box(const Box& b);

  TargetKind kind_ = TargetKind::point_set;
  int dim_ = 1;
  std::string label_;
  std::array<std::vector<double>, kMaxDim> lo_;
  std::array<std::vector<double>, kMaxDim> hi_;
  std::vector<Segment> segments_;
};

/// Exact Euclidean distance from each inside cell center to A. Throws on empty A.
std::vector<double> distance_to_set(const DomainGrid& grid, const TargetSet& a);

struct DimensionFit {
  double estimate = 0.0;      // dim - slope, clamped to [0, dim]
  double raw_estimate = 0.0;  // dim - slope, unclamped
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<double> scales_used;  // strictly decreasing
  std::vector<double> volumes;      // |B_delta| per scale
};

/// Dyadic default scales 2^-k for k = first..last.
std::vector<double> dyadic_scales(int first, int last);

/// Parallel-body volume |B_delta| counted on a lattice of pitch delta/refinement.
double parallel_body_volume(const TargetSet& b, int dim, double delta, int refinement = 4);

/// Least-squares fit of log|B_delta| against log(delta). `workers` > 1 evaluates
/// the per-scale counts concurrently; the reduction order is fixed.
DimensionFit minkowski_dimension(const TargetSet& b, int dim, std::span<const double> scales,
                                 int refinement = 4, int workers = 1);

/// Face-adjacency components of the inside cells, each sorted, ordered by smallest member.
std::vector<std::vector<std::size_t>> connected_components(const DomainGrid& grid);

/// Ordinary least squares y = a + b x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace lab
