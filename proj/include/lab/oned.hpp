#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lab/geometry.hpp"

namespace lab {

/// I_alpha(x) = integral over [0, x] of (1 - t^2)^(-alpha), |x| <= 1, odd in x.
/// Returns infinity at |x| = 1 when alpha >= 1.
double profile_power_integral(double alpha, double x);

/// W(x) = integral over [0, x] of 1/c with c = (1 - t^2)^delta. Throws for |x| >= 1 or delta < 1.
double weight_W(double delta, double x);

enum class Verdict { yes, no, boundary };
std::string to_string(Verdict v);

struct OneDReport {
  double delta = 0.0;
  double p = 0.0;
  double q = 0.0;               // conjugate exponent; infinity for p = 1
  double tail_exponent = 0.0;   // local exponent e in W(1-u) ~ u^e, fitted from quadrature values
  Verdict w_in_lq = Verdict::no;  // boundary: |W|^q decays like 1/(1-x), a marginal (log) divergence
  double lq_norm = 0.0;         // infinity when W is not in L_q
  bool lp_unique = false;       // W not in L_q
  Verdict threshold_rule = Verdict::no;  // delta > (2p-1)/p, delta >= 1 at p = 1
  bool agree = false;
  double riemannian_distance_to_boundary = 0.0;
};

/// Quadrature test of W in L_q(-1,1) with an analytic endpoint tail, next to the closed threshold.
OneDReport classify_lp(double delta, double p);

/// The default table: delta in {1, 1.2, 1.4, 1.5, 1.6, 2, 2.5} x p in {1, 1.5, 2, 3}.
std::vector<OneDReport> classify_lattice(std::span<const double> deltas, std::span<const double> ps, int workers = 1);
std::vector<double> default_lattice_deltas();
std::vector<double> default_lattice_ps();

/// CSV columns: delta,p,q,W_Lq_norm_or_inf,lp_unique,threshold_rule,agree.
void write_lattice_csv(std::span<const OneDReport> rows, std::ostream& out);

/// eta_n(x) = 1 - W(|x|)/W(1 - 1/n) for |x| < 1 - 1/n, 0 beyond, on the cells of a 1-D grid.
std::vector<double> example_cutoff(double delta, double n, const DomainGrid& grid);

/// The uniform grid on (-1, 1) with pitch h.
DomainGrid profile_grid(double h);

struct CutoffEnergies {
  double delta = 0.0;
  double n = 0.0;
  double closed_form = 0.0;     // 2 / W(1 - 1/n)
  double discrete = 0.0;        // free-mode form energy of eta_n
  double relative_gap = 0.0;    // |discrete - closed| / closed
  double gamma_inf = 0.0;       // 1 / (c W^2) at |x| = 1 - 1/n
  double gamma_inf_discrete = 0.0;  // max of the cell-wise carre du champ
};

/// sup of Gamma(eta_n) = 1 / (c W^2) at |x| = 1 - 1/n.
double gamma_sup(double delta, double n);

CutoffEnergies cutoff_energies(double delta, double n, double h = 1.0 / 4096.0);

/// |integral over [y, x] of c^(-1/2)|; infinity when delta >= 2 and an endpoint is +-1.
double riemannian_distance(double delta, double x, double y);

}  // namespace lab
