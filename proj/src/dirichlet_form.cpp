#include "lab/dirichlet_form.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lab/error.hpp"

namespace lab {

std::string to_string(BoundaryMode mode) { return mode == BoundaryMode::dirichlet ? "dirichlet" : "free"; }

BoundaryMode boundary_mode_from_string(const std::string& name) {
  if (name == "dirichlet") return BoundaryMode::dirichlet;
  if (name == "free") return BoundaryMode::free;
  fail(ErrorCode::schema, "unknown boundary mode '" + name + "'");
}

namespace {

// Mixed c_ij terms on dual elements {base, base+e_i, base+e_j, base+e_i+e_j}.
void assemble_mixed(const DomainGrid& grid, const CoefficientField& field, BoundaryMode mode, TripletBuilder& k) {
  const int dim = grid.dim();
  const double h = grid.h();
  const double weight = grid.cell_volume();
  const auto shape = grid.shape();
  const double gi[4] = {-1.0, 1.0, -1.0, 1.0};
  const double gj[4] = {-1.0, -1.0, 1.0, 1.0};
  const int lo = mode == BoundaryMode::dirichlet ? -1 : 0;

  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      std::array<int, kMaxDim> c{0, 0, 0};
      std::array<int, kMaxDim> first{0, 0, 0}, last{0, 0, 0};
      for (int a = 0; a < kMaxDim; ++a) last[a] = a < dim ? shape[a] - 1 : 0;
      first[i] = first[j] = lo;
      if (mode == BoundaryMode::free) {
        last[i] = shape[i] - 2;
        last[j] = shape[j] - 2;
      }
      for (c[2] = first[2]; c[2] <= last[2]; ++c[2])
        for (c[1] = first[1]; c[1] <= last[1]; ++c[1])
          for (c[0] = first[0]; c[0] <= last[0]; ++c[0]) {
            std::array<std::int64_t, 4> cells{};
            int inside = 0;
            for (int corner = 0; corner < 4; ++corner) {
              auto q = c;
              q[i] += corner & 1;
              q[j] += (corner >> 1) & 1;
              cells[corner] = -1;
              if (q[i] >= 0 && q[i] < shape[i] && q[j] >= 0 && q[j] < shape[j]) {
                cells[corner] = grid.compact_index(grid.lattice_of(q));
                inside += cells[corner] >= 0;
              }
            }
            if (inside == 0 || (mode == BoundaryMode::free && inside < 4)) continue;
            Point center{0.0, 0.0, 0.0};
            for (int a = 0; a < dim; ++a) center[a] = grid.axis(a).lo + (c[a] + 0.5) * h;
            center[i] += 0.5 * h;
            center[j] += 0.5 * h;
            const double cij = field(center)(i, j);
            if (cij == 0.0) continue;
            // gradients are g / (2h); energy 2 c_ij (g_i.psi)(g_j.psi) h^d / (4h^2)
            const double w = cij * weight / (4.0 * h * h);
            for (int a = 0; a < 4; ++a) {
              if (cells[a] < 0) continue;
              for (int b = a; b < 4; ++b) {
                if (cells[b] < 0) continue;
                const auto ca = static_cast<std::size_t>(cells[a]);
                const auto cb = static_cast<std::size_t>(cells[b]);
                if (a == b) k.add(ca, ca, 2.0 * w * gi[a] * gj[a]);
                else k.add_symmetric(ca, cb, w * (gi[a] * gj[b] + gj[a] * gi[b]));
              }
            }
          }
    }
}

}  // namespace

FormMatrices assemble(const DomainGrid& grid, const CoefficientField& field, BoundaryMode mode) {
  require(field.dim() == grid.dim(), ErrorCode::invalid_argument, "field/grid dimension mismatch");
  FormMatrices fm;
  fm.n = grid.inside_count();
  fm.h = grid.h();
  fm.dim = grid.dim();
  fm.mode = mode;
  fm.diagonal_coefficients = field.is_diagonal();
  fm.mass.assign(fm.n, grid.cell_volume());

  const double scale = std::pow(grid.h(), grid.dim() - 2);
  const FaceTable faces = sample_on_faces(field, grid, mode == BoundaryMode::dirichlet);
  TripletBuilder k(fm.n, fm.n);
  for (const Face& f : faces.interior()) {
    const double w = scale * f.value(f.axis, f.axis);
    const auto b = static_cast<std::size_t>(f.b);
    k.add(f.a, f.a, w);
    k.add(b, b, w);
    k.add_symmetric(f.a, b, -w);
  }
  for (const Face& f : faces.boundary()) k.add(f.a, f.a, scale * f.value(f.axis, f.axis));
  if (!field.is_diagonal() && grid.dim() >= 2) assemble_mixed(grid, field, mode, k);
  fm.stiffness = k.build();
  return fm;
}

double form_energy(const FormMatrices& fm, std::span<const double> psi) {
  require(psi.size() == fm.n, ErrorCode::invalid_argument, "field length does not match the form");
  const auto kpsi = fm.stiffness.multiply(psi);
  return dot(psi, kpsi);
}

GraphNormValue graph_norm(const FormMatrices& fm, std::span<const double> psi) {
  GraphNormValue g;
  g.energy = form_energy(fm, psi);
  double l2 = 0.0;
  for (std::size_t i = 0; i < fm.n; ++i) l2 += fm.mass[i] * psi[i] * psi[i];
  g.l2sq = l2;
  g.graph_norm = std::sqrt(std::max(g.energy, 0.0) + g.l2sq);
  return g;
}

std::vector<double> carre_du_champ(const CoefficientField& field, const DomainGrid& grid, std::span<const double> eta) {
  require(eta.size() == grid.inside_count(), ErrorCode::invalid_argument, "eta length does not match the grid");
  require(field.dim() == grid.dim(), ErrorCode::invalid_argument, "field/grid dimension mismatch");
  const double h = grid.h();
  std::vector<double> gamma(eta.size(), 0.0);
  for (std::size_t c = 0; c < eta.size(); ++c) {
    std::array<double, kMaxDim> g{0.0, 0.0, 0.0};
    for (int k = 0; k < grid.dim(); ++k) {
      const std::int64_t lo = grid.neighbor(c, k, -1);
      const std::int64_t hi = grid.neighbor(c, k, 1);
      if (lo >= 0 && hi >= 0) g[k] = (eta[hi] - eta[lo]) / (2.0 * h);
      else if (hi >= 0) g[k] = (eta[hi] - eta[c]) / h;
      else if (lo >= 0) g[k] = (eta[c] - eta[lo]) / h;
    }
    const SymMatrix cm = field(grid.center(c));
    double s = 0.0;
    for (int i = 0; i < grid.dim(); ++i)
      for (int j = 0; j < grid.dim(); ++j) s += cm(i, j) * g[i] * g[j];
    gamma[c] = s;
  }
  return gamma;
}

double lp_norm(const DomainGrid& grid, std::span<const double> v, double p) {
  require(p >= 1.0, ErrorCode::invalid_argument, "lp norm requires p >= 1");
  require(v.size() == grid.inside_count(), ErrorCode::invalid_argument, "field length does not match the grid");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(grid.cell_volume() * s, 1.0 / p);
}

}  // namespace lab
