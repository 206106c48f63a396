#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lab/coefficients.hpp"
#include "lab/dirichlet_form.hpp"
#include "lab/geometry.hpp"
#include "lab/linalg.hpp"

namespace lab {

struct CapacityEstimate {
  double value = 0.0;  // squared graph norm of the minimizer
  std::vector<double> minimizer;
  double shell_radius = 0.0;
  double grid_h = 0.0;
  std::size_t cg_iterations = 0;
  double residual = 0.0;
  std::size_t constrained_cells = 0;
  double min_value = 0.0;  // min of the minimizer
  double max_value = 0.0;  // max of the minimizer
};

/// Minimizes psi^T (K + M) psi over fields with psi = 1 on the shell
/// {x : d_A(x) < shell_radius}, eliminating the constrained cells and solving
/// the reduced SPD system with CG. Requires a free-mode form.
CapacityEstimate estimate_capacity(const FormMatrices& fm, const DomainGrid& grid, const TargetSet& a,
                                   double shell_radius, CgOptions options = {.relative_tolerance = 1e-10});

/// chi_n(d_B(x) / outer_radius) with chi_n = 1 on (0, 1/n], -log(s)/log(n) on (1/n, 1], 0 beyond.
double log_cutoff_profile(double scaled_distance, double n);
std::vector<double> log_cutoff(const DomainGrid& grid, const TargetSet& b, double n, double outer_radius = 1.0);

struct CutoffSweepPoint {
  double n = 0.0;
  double energy = 0.0;
  double l2sq = 0.0;
};

/// Free-mode form energy and squared L2 norm of each log cutoff.
std::vector<CutoffSweepPoint> log_cutoff_energy_sweep(const CoefficientField& field, const DomainGrid& grid,
                                                      const TargetSet& b, std::span<const double> n_list,
                                                      double outer_radius = 1.0);

/// Fit of energy = a / log(n) + b, plus the log-log decay exponent k in energy ~ (log n)^-k.
struct InverseLogFit {
  LinearFit linear;          // energy against 1/log(n)
  double decay_exponent = 0;  // k from log(energy) against log(log(n))
};
InverseLogFit fit_inverse_log(std::span<const CutoffSweepPoint> sweep);

enum class MarkovVerdict { unique_by_threshold, unclassified };
std::string to_string(MarkovVerdict v);

/// unique_by_threshold iff gamma >= 2 - (dim - dA). Throws unless 0 <= dA < dim and gamma >= 0.
MarkovVerdict classify_markov_unique(int dim, double dA, double gamma);

}  // namespace lab
