#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lab/coefficients.hpp"
#include "lab/geometry.hpp"
#include "lab/linalg.hpp"

namespace lab {

/// dirichlet: ghost value 0 across every face leaving Omega (Friedrichs form).
/// free: faces leaving Omega are dropped (zero-flux closure, stand-in for the maximal form).
enum class BoundaryMode { dirichlet, free };

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

/// Discrete form: psi^T K psi approximates the energy integral of
/// sum_ij c_ij d_i psi d_j psi, and psi^T M psi the squared L2 norm.
struct FormMatrices {
  CsrMatrix stiffness;
  std::vector<double> mass;  // diagonal of M, all equal to h^dim
  BoundaryMode mode = BoundaryMode::free;
  std::size_t n = 0;
  double h = 0.0;
  int dim = 1;
  bool diagonal_coefficients = true;
};

/// Two-point flux assembly with face-midpoint coefficients; off-diagonal c_ij
/// enter through centered differences on the dual element spanned by four cells.
FormMatrices assemble(const DomainGrid& grid, const CoefficientField& field, BoundaryMode mode);

struct GraphNormValue {
  double energy = 0.0;
  double l2sq = 0.0;
  double graph_norm = 0.0;
};

GraphNormValue graph_norm(const FormMatrices& fm, std::span<const double> psi);
double form_energy(const FormMatrices& fm, std::span<const double> psi);

/// Per-cell Gamma(eta) = sum_ij c_ij d_i eta d_j eta with centered differences,
/// one-sided next to the boundary, C evaluated at the cell center.
std::vector<double> carre_du_champ(const CoefficientField& field, const DomainGrid& grid, std::span<const double> eta);

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// (sum h^dim |v|^p)^(1/p), or max |v| for p = infinity. Throws for p < 1.
double lp_norm(const DomainGrid& grid, std::span<const double> v, double p);

}  // namespace lab
