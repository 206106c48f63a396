#include "lab/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "lab/error.hpp"

namespace lab {

CapacityEstimate estimate_capacity(const FormMatrices& fm, const DomainGrid& grid, const TargetSet& a,
                                   double shell_radius, CgOptions options) {
  require(fm.mode == BoundaryMode::free, ErrorCode::invalid_argument, "capacity requires a free-mode form");
  require(fm.n == grid.inside_count(), ErrorCode::invalid_argument, "form/grid size mismatch");
  require(shell_radius > 0.0, ErrorCode::invalid_argument, "shell radius must be positive");

  CapacityEstimate est;
  est.shell_radius = shell_radius;
  est.grid_h = grid.h();
  est.minimizer.assign(fm.n, 0.0);
  if (a.is_empty()) return est;

  std::vector<char> constrained(fm.n, 0);
  std::vector<std::size_t> free_cells, shell_cells;
  for (std::size_t c = 0; c < fm.n; ++c) {
    if (a.distance(grid.center(c)) < shell_radius) {
      constrained[c] = 1;
      shell_cells.push_back(c);
    } else {
      free_cells.push_back(c);
    }
  }
  require(!shell_cells.empty(), ErrorCode::invalid_argument, "capacity shell contains no cells");
  est.constrained_cells = shell_cells.size();

  // (K + M) with the diagonal mass folded in
  CsrMatrix system = fm.stiffness;
  for (std::size_t r = 0; r < system.rows; ++r)
    for (std::int64_t k = system.row_ptr[r]; k < system.row_ptr[r + 1]; ++k)
      if (static_cast<std::size_t>(system.col[k]) == r) system.val[k] += fm.mass[r];

  for (std::size_t c : shell_cells) est.minimizer[c] = 1.0;
  if (!free_cells.empty()) {
    std::vector<std::int64_t> slot(fm.n, -1);
    for (std::size_t i = 0; i < free_cells.size(); ++i) slot[free_cells[i]] = static_cast<std::int64_t>(i);
    std::vector<double> rhs(free_cells.size(), 0.0);
    for (std::size_t i = 0; i < free_cells.size(); ++i) {
      const std::size_t r = free_cells[i];
      for (std::int64_t k = system.row_ptr[r]; k < system.row_ptr[r + 1]; ++k)
        if (constrained[system.col[k]]) rhs[i] -= system.val[k];
    }
    const CsrMatrix reduced = system.submatrix(free_cells, free_cells);
    std::vector<double> x(free_cells.size(), 0.0);
    const CgResult cg = conjugate_gradient(reduced, rhs, x, options);
    est.cg_iterations = cg.iterations;
    est.residual = cg.relative_residual;
    for (std::size_t i = 0; i < free_cells.size(); ++i) est.minimizer[free_cells[i]] = x[i];
  }

  const GraphNormValue g = graph_norm(fm, est.minimizer);
  est.value = g.energy + g.l2sq;
  const auto [lo, hi] = std::minmax_element(est.minimizer.begin(), est.minimizer.end());
  est.min_value = *lo;
  est.max_value = *hi;
  return est;
}

double log_cutoff_profile(double s, double n) {
  require(n > 1.0, ErrorCode::invalid_argument, "log cutoff needs n > 1");
  if (s <= 1.0 / n) return 1.0;
  if (s <= 1.0) return -std::log(s) / std::log(n);
  return 0.0;
}

std::vector<double> log_cutoff(const DomainGrid& grid, const TargetSet& b, double n, double outer_radius) {
  require(outer_radius > 0.0, ErrorCode::invalid_argument, "outer radius must be positive");
  const auto d = distance_to_set(grid, b);
  std::vector<double> eta(d.size());
  for (std::size_t c = 0; c < d.size(); ++c) eta[c] = log_cutoff_profile(d[c] / outer_radius, n);
  return eta;
}

std::vector<CutoffSweepPoint> log_cutoff_energy_sweep(const CoefficientField& field, const DomainGrid& grid,
                                                      const TargetSet& b, std::span<const double> n_list,
                                                      double outer_radius) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    require(n_list[i] > n_list[i - 1], ErrorCode::invalid_argument, "n_list must be increasing");
  const FormMatrices fm = assemble(grid, field, BoundaryMode::free);
  const auto d = distance_to_set(grid, b);
  std::vector<CutoffSweepPoint> out;
  std::vector<double> eta(d.size());
  for (double n : n_list) {
    for (std::size_t c = 0; c < d.size(); ++c) eta[c] = log_cutoff_profile(d[c] / outer_radius, n);
    const GraphNormValue g = graph_norm(fm, eta);
    out.push_back({n, g.energy, g.l2sq});
  }
  return out;
}

InverseLogFit fit_inverse_log(std::span<const CutoffSweepPoint> sweep) {
  std::vector<double> x, y, lx, ly;
  for (const auto& p : sweep) {
    x.push_back(1.0 / std::log(p.n));
    y.push_back(p.energy);
    if (p.energy > 0.0) {
      lx.push_back(std::log(std::log(p.n)));
      ly.push_back(std::log(p.energy));
    }
  }
  InverseLogFit fit;
  fit.linear = least_squares(x, y);
  fit.decay_exponent = lx.size() >= 2 ? -least_squares(lx, ly).slope : 0.0;
  return fit;
}

std::string to_string(MarkovVerdict v) {
  return v == MarkovVerdict::unique_by_threshold ? "unique-by-threshold" : "unclassified";
}

MarkovVerdict classify_markov_unique(int dim, double dA, double gamma) {
  require(dim >= 1, ErrorCode::invalid_argument, "dimension must be >= 1");
  require(dA >= 0.0 && dA < dim, ErrorCode::invalid_argument, "need 0 <= d(A) < dim");
  require(gamma >= 0.0, ErrorCode::invalid_argument, "gamma must be >= 0");
  return gamma >= 2.0 - (dim - dA) ? MarkovVerdict::unique_by_threshold : MarkovVerdict::unclassified;
}

}  // namespace lab
