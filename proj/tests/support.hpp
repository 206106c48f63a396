#pragma once

#include <cmath>
#include <vector>

#include "lab/coefficients.hpp"
#include "lab/geometry.hpp"

namespace lab::testing {

inline DomainGrid interval_grid(double lo, double hi, double h) {
  const Interval bbox[] = {{lo, hi}};
  return DomainGrid::build(bbox, h, [](const Point&) { return true; });
}

inline DomainGrid square_grid(double lo, double hi, double h) {
  const Interval bbox[] = {{lo, hi}, {lo, hi}};
  return DomainGrid::build(bbox, h, [](const Point&) { return true; });
}

inline CoefficientField unit_field(int dim) { return CoefficientField::constant(SymMatrix::identity(dim)); }

inline CoefficientField scalar_field(int dim, double c) { return CoefficientField::constant(SymMatrix::scalar(dim, c)); }

inline std::vector<double> sample(const DomainGrid& grid, double (*f)(const Point&)) {
  std::vector<double> v(grid.inside_count());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = f(grid.center(c));
  return v;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace lab::testing
