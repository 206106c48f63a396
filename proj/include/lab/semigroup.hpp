#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lab/dirichlet_form.hpp"
#include "lab/geometry.hpp"

namespace lab {

inline constexpr std::size_t kDenseCellLimit = 4096;

/// psi -> M^{-1} K psi, self-adjoint in the M-weighted inner product.
class Generator {
 public:
  explicit Generator(FormMatrices fm);

  const FormMatrices& form() const { return fm_; }
  BoundaryMode mode() const { return fm_.mode; }
  std::size_t size() const { return fm_.n; }

  std::vector<double> apply(std::span<const double> psi) const;
  /// <a, b>_M
  double inner(std::span<const double> a, std::span<const double> b) const;
  /// Dense M^{-1} K; throws ErrorCode::size_limit above kDenseCellLimit cells.
  Eigen::MatrixXd dense() const;

 private:
  FormMatrices fm_;
};

enum class Scheme { backward_euler, matrix_exponential };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// Linear solver used for the implicit step (M + tau K) u' = M u.
enum class StepSolver { sparse_cholesky, conjugate_gradient };

struct EvolveOptions {
  std::size_t record_every = 1;  // keep every k-th state (the final state is always kept)
  StepSolver solver = StepSolver::sparse_cholesky;
  double cg_tolerance = 1e-13;
  std::size_t cg_max_iterations = 0;  // 0: solver default
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> masses;  // <1, u>_M
  Scheme scheme = Scheme::backward_euler;
  double step = 0.0;
};

/// Backward Euler with tau = t_end / steps, or exact powers of the dense
/// exp(-tau M^{-1} K) (n <= kDenseCellLimit).
Trajectory evolve(const Generator& gen, std::span<const double> u0, double t_end, std::size_t steps, Scheme scheme,
                  const EvolveOptions& options = {});

/// 1 - mass(t)/mass(0); requires states[0] == 1 everywhere.
std::vector<double> mass_defect(const Trajectory& traj);

struct SubmarkovReport {
  double min_value = 0.0;
  double max_value = 0.0;
  std::size_t violations = 0;  // entries outside [-tol, 1 + tol]
  bool asserted = false;       // bounds are guaranteed (diagonal C, backward Euler)
  bool passed = true;          // violations == 0 or not asserted
};

SubmarkovReport check_submarkov(const Trajectory& traj, bool diagonal_coefficients, double tolerance = 1e-12);

struct DominationReport {
  double min_margin = 0.0;  // min over times and cells of u_free - u_dirichlet
  double max_margin = 0.0;
  std::size_t violations = 0;
  bool passed = true;
  Trajectory free_run;
  Trajectory dirichlet_run;
};

/// Runs both generators with the same backward-Euler steps and checks
/// u_free >= u_dirichlet - tolerance at every recorded time and cell.
DominationReport check_domination(const Generator& gen_free, const Generator& gen_dirichlet, std::span<const double> u0,
                                  double t_end, std::size_t steps, double tolerance = 1e-10,
                                  const EvolveOptions& options = {});

struct DaviesGaffneyRow {
  double t = 0.0;
  double pairing = 0.0;  // <1_X, S_t 1_Y>_M
  double bound = 0.0;    // exp(-gap^2 / (4 C_sup t)) ||1_X||_M ||1_Y||_M
  bool ok = false;       // pairing <= bound * (1 + tol)
};

struct DaviesGaffneyReport {
  double gap = 0.0;
  double c_sup = 0.0;
  double tolerance = 0.0;
  std::vector<DaviesGaffneyRow> rows;
  bool passed = true;
};

/// Pairing bound with the exact (dense exponential) semigroup. X and Y are
/// compact cell sets; they must be disjoint with center gap >= 2h.
DaviesGaffneyReport davies_gaffney_check(const Generator& gen, const DomainGrid& grid, std::span<const std::size_t> x,
                                         std::span<const std::size_t> y, std::span<const double> t_list, double c_sup,
                                         double tolerance = 0.05);

enum class Irreducibility { irreducible, reducible };
std::string to_string(Irreducibility v);

struct IrreducibilityReport {
  Irreducibility verdict = Irreducibility::reducible;
  double min_ratio = 0.0;  // min u(t) / max u(t) over inside cells
  double threshold = 0.0;
  std::size_t seed_cell = 0;
  std::size_t geometric_components = 0;  // face-adjacency components of the grid
  std::size_t coupling_components = 0;   // components of the stiffness coupling graph
  double mass_outside_seed_component = 0.0;
  bool consistent = false;  // verdict matches the coupling-graph connectivity
  std::vector<double> state;
};

/// Evolves the indicator of `seed_cell` to time t and tests strict positivity
/// relative to the maximum.
IrreducibilityReport irreducibility_check(const Generator& gen, const DomainGrid& grid, double t, double threshold,
                                          std::size_t seed_cell, Scheme scheme = Scheme::matrix_exponential,
                                          std::size_t steps = 1);

/// Components of the graph with an edge wherever K has a nonzero off-diagonal entry.
std::vector<std::vector<std::size_t>> coupling_components(const FormMatrices& fm);

/// CSV with header "time,mass,min,max".
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Little-endian float64 states, row-major [time][cell], plus a JSON sidecar
/// describing the grid. Returns the two file paths written.
std::vector<std::string> write_state_dump(const Trajectory& traj, const DomainGrid& grid, const std::string& stem);

}  // namespace lab
