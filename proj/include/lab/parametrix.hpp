#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lab/linalg.hpp"
#include "lab/point.hpp"

namespace lab {

/// mass_normalized: (det C)^(-1/2) (4 pi t)^(-d/2) exp(-x.C^-1 x / 4t), unit mass.
/// det_inverse: the same Gaussian with prefactor (det C)^(-1).
enum class KernelNormalization { det_inverse, mass_normalized };
std::string to_string(KernelNormalization n);
KernelNormalization kernel_normalization_from_string(const std::string& name);

double frozen_kernel(const SymMatrix& c_y, double t, const Point& x,
                     KernelNormalization normalization = KernelNormalization::mass_normalized);

struct KernelMass {
  double mass = 0.0;
  double window = 0.0;  // half-width of the cube window
  double pitch = 0.0;
  std::size_t points = 0;
};

/// Midpoint lattice integral of the frozen kernel over a +-8 standard deviation
/// window with pitch sqrt(t lambda_min)/8.
KernelMass frozen_kernel_mass(const SymMatrix& c_y, double t,
                              KernelNormalization normalization = KernelNormalization::mass_normalized);

/// Laplace transform of the frozen kernel, integral over t of e^(-kappa t) K_t(x).
/// d = 1 uses the closed form exp(-|x| sqrt(kappa/c)) / (2 sqrt(kappa c)).
double resolvent_kernel(const SymMatrix& c_y, double kappa, const Point& x);
/// Quadrature in log t over [1e-8, 1e3] (plus an exact head for d = 1); infinity at x = 0 for d >= 2.
double resolvent_kernel_quadrature(const SymMatrix& c_y, double kappa, const Point& x);

/// Scalar 1-D coefficient with its derivative.
struct Coefficient1D {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string label;
  static Coefficient1D constant(double c);
  /// c(x) = a + b sin(x)
  static Coefficient1D sine(double a, double b);
};

struct ParametrixOptions {
  double window_lo = -3.141592653589793;
  double window_hi = 3.141592653589793;
  double pitch = 0.0;            // 0: min decay length / 8
  double decay_lengths = 30.0;   // kernel truncation radius in units of sqrt(c_y / kappa)
};

/// R_kappa and Q_kappa discretized on a uniform 1-D lattice, both stored as
/// banded CSR with quadrature weight pitch folded in. Q is defined by
/// (kappa + L) R = I + Q with L = -(c u')'.
class ParametrixOperator {
 public:
  ParametrixOperator(Coefficient1D coef, double kappa, const ParametrixOptions& options = {});

  double kappa() const { return kappa_; }
  double pitch() const { return pitch_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const Coefficient1D& coefficient() const { return coef_; }
  /// False when the window is shorter than 8 decay lengths.
  bool window_ok() const { return window_ok_; }
  const CsrMatrix& r_matrix() const { return r_; }
  const CsrMatrix& q_matrix() const { return q_; }

  std::vector<double> apply_r(std::span<const double> phi) const;
  std::vector<double> apply_q(std::span<const double> phi) const;
  std::vector<double> apply_q_transpose(std::span<const double> phi) const;
  /// Samples f at the lattice nodes.
  std::vector<double> sample(const std::function<double(double)>& f) const;

 private:
  Coefficient1D coef_;
  double kappa_;
  double pitch_ = 0.0;
  bool window_ok_ = true;
  std::vector<double> nodes_;
  CsrMatrix r_, q_, qt_;
};

struct ParametrixResult {
  std::vector<double> u;
  double residual = 0.0;  // ||(kappa + L) u - phi|| / ||phi|| on interior nodes
  bool window_ok = true;
};

/// Relative residual of (kappa + L_h) u = phi, with L_h the conservative
/// three-point difference using c at half points, over interior nodes.
double resolvent_residual(const ParametrixOperator& op, std::span<const double> u, std::span<const double> phi);

ParametrixResult apply_parametrix(const ParametrixOperator& op, std::span<const double> phi);

struct NormEstimate {
  double norm = 0.0;
  std::vector<double> per_trial;
};

/// Power iteration on Q^T Q: `iterations` steps from `trials` random starts
/// drawn from the counter-based stream keyed by seed.
NormEstimate q_norm_estimate(const ParametrixOperator& op, int trials = 3, int iterations = 20,
                             std::uint64_t seed = 0);

struct NeumannResult {
  std::vector<double> u;
  double q_norm = 0.0;
  std::vector<double> residuals;  // residual after 1, 2, ..., terms terms
  double residual = 0.0;
};

/// R sum_{k < terms} (-Q)^k phi. Throws ErrorCode::regime when the norm estimate is >= 1.
NeumannResult neumann_resolvent(const ParametrixOperator& op, std::span<const double> phi, int terms,
                                std::uint64_t seed = 0);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace lab
