#include "lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "lab/error.hpp"
#include "lab/parallel.hpp"
#include "lab/simd/kernels.hpp"

namespace lab {

DomainGrid DomainGrid::build(std::span<const Interval> bbox, double h, const InsidePredicate& inside) {
  const int dim = static_cast<int>(bbox.size());
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "grid dimension must be 1, 2 or 3");
  require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "grid spacing must be positive");

  DomainGrid g;
  g.dim_ = dim;
  g.h_ = h;
  g.cell_volume_ = std::pow(h, dim);
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) {
    const double len = bbox[k].hi - bbox[k].lo;
    require(len > 0.0, ErrorCode::invalid_argument, "bounding box is degenerate");
    const double cells = len / h;
    const double rounded = std::round(cells);
    require(rounded >= 1.0 && std::abs(cells - rounded) <= 1e-12 * std::max(1.0, cells),
            ErrorCode::invalid_argument, "axis length is not an integer multiple of h");
    g.bbox_[k] = bbox[k];
    g.shape_[k] = static_cast<int>(rounded);
    total *= static_cast<std::size_t>(g.shape_[k]);
  }

  g.lattice_to_compact_.assign(total, -1);
  for (std::size_t l = 0; l < total; ++l) {
    if (inside(g.lattice_center(l))) {
      g.lattice_to_compact_[l] = static_cast<std::int64_t>(g.compact_to_lattice_.size());
      g.compact_to_lattice_.push_back(l);
    }
  }
  require(!g.compact_to_lattice_.empty(), ErrorCode::empty_domain, "no inside cells");
  return g;
}

std::array<int, kMaxDim> DomainGrid::coords(std::size_t lattice) const {
  std::array<int, kMaxDim> c{0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    c[k] = static_cast<int>(lattice % static_cast<std::size_t>(shape_[k]));
    lattice /= static_cast<std::size_t>(shape_[k]);
  }
  return c;
}

std::size_t DomainGrid::lattice_of(const std::array<int, kMaxDim>& c) const {
  std::size_t l = 0;
  for (int k = dim_ - 1; k >= 0; --k) l = l * static_cast<std::size_t>(shape_[k]) + static_cast<std::size_t>(c[k]);
  return l;
}

Point DomainGrid::lattice_center(std::size_t lattice) const {
  const auto c = coords(lattice);
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dim_; ++k) p[k] = bbox_[k].lo + (c[k] + 0.5) * h_;
  return p;
}

std::int64_t DomainGrid::lattice_neighbor(std::size_t lattice, int axis, int dir) const {
  auto c = coords(lattice);
  c[axis] += dir;
  if (c[axis] < 0 || c[axis] >= shape_[axis]) return -1;
  return static_cast<std::int64_t>(lattice_of(c));
}

std::int64_t DomainGrid::neighbor(std::size_t compact, int axis, int dir) const {
  const std::int64_t l = lattice_neighbor(compact_to_lattice_[compact], axis, dir);
  return l < 0 ? -1 : lattice_to_compact_[static_cast<std::size_t>(l)];
}

std::vector<std::size_t> DomainGrid::boundary_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < inside_count(); ++c) {
    bool boundary = false;
    for (int k = 0; k < dim_ && !boundary; ++k)
      for (int dir : {-1, 1})
        if (neighbor(c, k, dir) < 0) boundary = true;
    if (boundary) out.push_back(c);
  }
  return out;
}

std::size_t DomainGrid::nearest_cell(const Point& p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < inside_count(); ++c) {
    const Point q = center(c);
    const double d = squared_norm({q[0] - p[0], q[1] - p[1], q[2] - p[2]});
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::boundary_of_domain: return "boundary-of-domain";
    case TargetKind::point_set: return "point-set";
    case TargetKind::segment_set: return "segment-set";
    case TargetKind::closed_set_mask: return "closed-set-mask";
  }
  return "unknown";
}

TargetKind target_kind_from_string(const std::string& name) {
  for (TargetKind k : {TargetKind::boundary_of_domain, TargetKind::point_set, TargetKind::segment_set,
                       TargetKind::closed_set_mask})
    if (to_string(k) == name) return k;
  fail(ErrorCode::schema, "unknown target kind '" + name + "'");
}

void TargetSet::push_box(const Box& b) {
  for (int k = 0; k < kMaxDim; ++k) {
    lo_[k].push_back(k < dim_ ? b.lo[k] : 0.0);
    hi_[k].push_back(k < dim_ ? b.hi[k] : 0.0);
  }
}

Box TargetSet::box(std::size_t i) const {
  Box b;
  for (int k = 0; k < kMaxDim; ++k) {
    b.lo[k] = lo_[k][i];
    b.hi[k] = hi_[k][i];
  }
  return b;
}

TargetSet TargetSet::empty(int dim, std::string label) {
  TargetSet t;
  t.dim_ = dim;
  t.label_ = std::move(label);
  return t;
}

TargetSet TargetSet::points(int dim, std::span<const Point> pts, std::string label) {
  TargetSet t = empty(dim, std::move(label));
  t.kind_ = TargetKind::point_set;
  for (const Point& p : pts) t.push_box({p, p});
  return t;
}

TargetSet TargetSet::segments(int dim, std::span<const Segment> segs, std::string label) {
  TargetSet t = empty(dim, std::move(label));
  t.kind_ = TargetKind::segment_set;
  for (const Segment& s : segs) {
    int varying = 0;
    for (int k = 0; k < dim; ++k) varying += s.a[k] != s.b[k];
    if (varying <= 1) {
      Box b;
      for (int k = 0; k < kMaxDim; ++k) {
        b.lo[k] = std::min(s.a[k], s.b[k]);
        b.hi[k] = std::max(s.a[k], s.b[k]);
      }
      t.push_box(b);
    } else {
      t.segments_.push_back(s);
    }
  }
  return t;
}

TargetSet TargetSet::boxes(int dim, std::span<const Box> boxes, TargetKind kind, std::string label) {
  TargetSet t = empty(dim, std::move(label));
  t.kind_ = kind;
  for (const Box& b : boxes) t.push_box(b);
  return t;
}

TargetSet TargetSet::boundary_of(const DomainGrid& grid, std::string label) {
  TargetSet t = empty(grid.dim(), std::move(label));
  t.kind_ = TargetKind::boundary_of_domain;
  const double half = 0.5 * grid.h();
  for (std::size_t c = 0; c < grid.inside_count(); ++c) {
    const Point x = grid.center(c);
    for (int axis = 0; axis < grid.dim(); ++axis)
      for (int dir : {-1, 1}) {
        if (grid.neighbor(c, axis, dir) >= 0) continue;
        Box face;
        for (int k = 0; k < grid.dim(); ++k) {
          face.lo[k] = x[k] - half;
          face.hi[k] = x[k] + half;
        }
        face.lo[axis] = face.hi[axis] = x[axis] + dir * half;
        t.push_box(face);
      }
  }
  return t;
}

TargetSet TargetSet::cell_mask(const DomainGrid& grid, std::span<const std::size_t> lattice_cells,
                               std::string label) {
  TargetSet t = empty(grid.dim(), std::move(label));
  t.kind_ = TargetKind::closed_set_mask;
  for (std::size_t l : lattice_cells) {
    const Point p = grid.lattice_center(l);
    t.push_box({p, p});
  }
  return t;
}

TargetSet TargetSet::cantor_prefractal(int level) {
  require(level >= 0 && level <= 20, ErrorCode::invalid_argument, "cantor level out of range");
  std::vector<Interval> current{{0.0, 1.0}};
  for (int l = 0; l < level; ++l) {
    std::vector<Interval> next;
    next.reserve(current.size() * 2);
    for (const Interval& iv : current) {
      const double third = (iv.hi - iv.lo) / 3.0;
      next.push_back({iv.lo, iv.lo + third});
      next.push_back({iv.hi - third, iv.hi});
    }
    current = std::move(next);
  }
  TargetSet t = empty(1, "cantor-" + std::to_string(level));
  t.kind_ = TargetKind::segment_set;
  for (const Interval& iv : current) t.push_box({{iv.lo, 0.0, 0.0}, {iv.hi, 0.0, 0.0}});
  return t;
}

namespace {

double segment_sq_distance(const Segment& s, const Point& x, int dim) {
  double dd = 0.0, t = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = s.b[k] - s.a[k];
    dd += d * d;
    t += (x[k] - s.a[k]) * d;
  }
  t = dd > 0.0 ? std::clamp(t / dd, 0.0, 1.0) : 0.0;
  double r = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double diff = x[k] - (s.a[k] + t * (s.b[k] - s.a[k]));
    r += diff * diff;
  }
  return r;
}

}  // namespace

double TargetSet::squared_distance(const Point& x) const {
  double best = std::numeric_limits<double>::infinity();
  if (box_count() > 0) {
    const simd::BoxSoA soa{{lo_[0].data(), lo_[1].data(), lo_[2].data()},
                           {hi_[0].data(), hi_[1].data(), hi_[2].data()},
                           box_count(),
                           dim_};
    best = simd::kernels().min_sq_dist_boxes(soa, x.data());
  }
  for (const Segment& s : segments_) best = std::min(best, segment_sq_distance(s, x, dim_));
  return best;
}

double TargetSet::distance(const Point& x) const { return std::sqrt(squared_distance(x)); }

Box TargetSet::bounds() const {
  Box b;
  for (int k = 0; k < kMaxDim; ++k) {
    b.lo[k] = std::numeric_limits<double>::infinity();
    b.hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < box_count(); ++i)
    for (int k = 0; k < kMaxDim; ++k) {
      b.lo[k] = std::min(b.lo[k], lo_[k][i]);
      b.hi[k] = std::max(b.hi[k], hi_[k][i]);
    }
  for (const Segment& s : segments_)
    for (int k = 0; k < kMaxDim; ++k) {
      b.lo[k] = std::min({b.lo[k], s.a[k], s.b[k]});
      b.hi[k] = std::max({b.hi[k], s.a[k], s.b[k]});
    }
  return b;
}

std::vector<double> distance_to_set(const DomainGrid& grid, const TargetSet& a) {
  require(!a.is_empty(), ErrorCode::invalid_argument, "distance to an empty set");
  require(a.dim() == grid.dim(), ErrorCode::invalid_argument, "target/grid dimension mismatch");
  std::vector<double> d(grid.inside_count());
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = a.distance(grid.center(c));
  return d;
}

std::vector<double> dyadic_scales(int first, int last) {
  std::vector<double> s;
  for (int k = first; k <= last; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

double parallel_body_volume(const TargetSet& b, int dim, double delta, int refinement) {
  require(!b.is_empty(), ErrorCode::invalid_argument, "parallel body of an empty set");
  require(delta > 0.0 && refinement >= 1, ErrorCode::invalid_argument, "bad parallel-body scale");
  const double pitch = delta / refinement;
  const Box bounds = b.bounds();
  std::array<std::size_t, kMaxDim> n{1, 1, 1};
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    origin[k] = bounds.lo[k] - delta;
    n[k] = static_cast<std::size_t>(std::ceil((bounds.hi[k] - bounds.lo[k] + 2.0 * delta) / pitch));
  }
  const double delta2 = delta * delta;
  std::size_t count = 0;
  Point x{0.0, 0.0, 0.0};
  for (std::size_t i2 = 0; i2 < n[2]; ++i2) {
    if (dim > 2) x[2] = origin[2] + (i2 + 0.5) * pitch;
    for (std::size_t i1 = 0; i1 < n[1]; ++i1) {
      if (dim > 1) x[1] = origin[1] + (i1 + 0.5) * pitch;
      for (std::size_t i0 = 0; i0 < n[0]; ++i0) {
        x[0] = origin[0] + (i0 + 0.5) * pitch;
        if (b.squared_distance(x) < delta2) ++count;
      }
    }
  }
  return static_cast<double>(count) * std::pow(pitch, dim);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "least squares needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::invalid_argument, "degenerate fit: zero variance in abscissa");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  f.slope_stderr = x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  return f;
}

DimensionFit minkowski_dimension(const TargetSet& b, int dim, std::span<const double> scales, int refinement,
                                 int workers) {
  require(scales.size() >= 3, ErrorCode::invalid_argument, "minkowski fit needs at least 3 scales");
  require(!b.is_empty(), ErrorCode::invalid_argument, "minkowski dimension of an empty set");
  for (double s : scales) require(s > 0.0 && s <= 1.0, ErrorCode::invalid_argument, "scales must lie in (0, 1]");

  std::vector<double> sorted(scales.begin(), scales.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  require(sorted.size() >= 3, ErrorCode::invalid_argument, "degenerate fit: fewer than 3 distinct scales");

  DimensionFit fit;
  fit.scales_used = sorted;
  fit.volumes.assign(sorted.size(), 0.0);
  parallel_for(sorted.size(), workers,
               [&](std::size_t i) { fit.volumes[i] = parallel_body_volume(b, dim, sorted[i], refinement); });

  std::vector<double> lx(sorted.size()), ly(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    require(fit.volumes[i] > 0.0, ErrorCode::invalid_argument, "parallel body has zero counted volume");
    lx[i] = std::log(sorted[i]);
    ly[i] = std::log(fit.volumes[i]);
  }
  const LinearFit lf = least_squares(lx, ly);
  fit.raw_estimate = dim - lf.slope;
  fit.estimate = std::clamp(fit.raw_estimate, 0.0, static_cast<double>(dim));
  fit.slope_stderr = lf.slope_stderr;
  fit.r_squared = lf.r_squared;
  return fit;
}

std::vector<std::vector<std::size_t>> connected_components(const DomainGrid& grid) {
  const std::size_t n = grid.inside_count();
  std::vector<int> label(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    label[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      comps.back().push_back(c);
      for (int k = 0; k < grid.dim(); ++k)
        for (int dir : {-1, 1}) {
          const std::int64_t nb = grid.neighbor(c, k, dir);
          if (nb >= 0 && label[static_cast<std::size_t>(nb)] < 0) {
            label[static_cast<std::size_t>(nb)] = id;
            queue.push_back(static_cast<std::size_t>(nb));
          }
        }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

}  // namespace lab
