#include "lab/oned.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "lab/coefficients.hpp"
#include "lab/dirichlet_form.hpp"
#include "lab/error.hpp"
#include "lab/parallel.hpp"

namespace lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSeriesCut = 1e-6;
constexpr double kSplit = 0.5;

template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, tol);
}

// integral over [u0, u1] of u^(e-1)
double power_piece(double e, double u0, double u1) {
  if (e == 0.0) return std::log(u1 / u0);
  const double lo = (u0 == 0.0) ? 0.0 : std::pow(u0, e);
  return (std::pow(u1, e) - lo) / e;
}

// integral over [u0, u1] (u1 <= kSeriesCut) of (u (2 - u))^(-alpha), using (2u)^(-alpha) (1 + alpha u / 2)
double endpoint_series(double alpha, double u0, double u1) {
  return std::pow(2.0, -alpha) * (power_piece(1.0 - alpha, u0, u1) + 0.5 * alpha * power_piece(2.0 - alpha, u0, u1));
}

// integral over [u0, 0.5] of (u (2 - u))^(-alpha) du in the variable s = log u
double near_endpoint(double alpha, double u0) {
  auto f = [alpha](double s) {
    const double u = std::exp(s);
    return std::exp(s - alpha * (s + std::log(2.0 - u)));
  };
  double total = 0.0;
  double numeric_from = u0;
  if (u0 < kSeriesCut) {
    total += endpoint_series(alpha, u0, kSeriesCut);
    numeric_from = kSeriesCut;
  }
  return total + integrate(f, std::log(numeric_from), std::log(kSplit));
}

}  // namespace

double profile_power_integral(double alpha, double x) {
  require(std::abs(x) <= 1.0, ErrorCode::invalid_argument, "profile integral needs |x| <= 1");
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -profile_power_integral(alpha, -x);
  if (x == 1.0 && alpha >= 1.0) return kInf;
  auto f = [alpha](double t) { return std::pow(1.0 - t * t, -alpha); };
  if (x <= kSplit) return integrate(f, 0.0, x);
  return integrate(f, 0.0, kSplit) + near_endpoint(alpha, 1.0 - x);
}

double weight_W(double delta, double x) {
  require(delta >= 1.0, ErrorCode::regime, "delta must be >= 1");
  require(std::abs(x) < 1.0, ErrorCode::invalid_argument, "W is defined for |x| < 1");
  return profile_power_integral(delta, x);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "true";
    case Verdict::no: return "false";
    case Verdict::boundary: return "boundary";
  }
  return "?";
}

namespace {

constexpr double kEps = 1e-10;
constexpr double kMarginalTolerance = 0.02;

// integral over (0, 1 - eps] of W^q
double body_integral(double delta, double q) {
  // t = v^2 keeps the integrand smooth at 0 for non-integer q
  auto head = [&](double v) { return 2.0 * v * std::pow(weight_W(delta, v * v), q); };
  auto near = [&](double s) {
    const double u = std::exp(s);
    return std::pow(weight_W(delta, 1.0 - u), q) * u;
  };
  return integrate(head, 0.0, std::sqrt(kSplit), 1e-10) + integrate(near, std::log(kEps), std::log(kSplit), 1e-10);
}

// integral over (1 - eps, 1) of W^q from the endpoint form of W
double tail_integral(double delta, double q) {
  const double w_eps = weight_W(delta, 1.0 - kEps);
  if (delta == 1.0) {
    // W(1-u) ~ a - log(u)/2; substitute u = eps e^(-s)
    const double a = w_eps + 0.5 * std::log(kEps);
    auto f = [&](double s) { return std::pow(a - 0.5 * (std::log(kEps) - s), q) * std::exp(-s); };
    return kEps * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kInf, 15, 1e-12);
  }
  const double e = q * (1.0 - delta);
  const double c = w_eps / std::pow(kEps, 1.0 - delta);
  return std::pow(c, q) * std::pow(kEps, e + 1.0) / (e + 1.0);
}

Verdict threshold_rule(double delta, double p) {
  if (p == 1.0) return delta >= 1.0 ? Verdict::yes : Verdict::no;
  const double t = (2.0 * p - 1.0) / p;
  if (std::abs(delta - t) <= 1e-12) return Verdict::boundary;
  return delta > t ? Verdict::yes : Verdict::no;
}

}  // namespace

OneDReport classify_lp(double delta, double p) {
  require(delta >= 1.0 && std::isfinite(delta), ErrorCode::regime, "delta must be >= 1");
  require(p >= 1.0 && std::isfinite(p), ErrorCode::regime, "p must lie in [1, infinity)");
  OneDReport r;
  r.delta = delta;
  r.p = p;
  r.q = p == 1.0 ? kInf : p / (p - 1.0);

  const double u1 = 1e-8, u2 = kEps;
  r.tail_exponent = (std::log(weight_W(delta, 1.0 - u2)) - std::log(weight_W(delta, 1.0 - u1))) / std::log(u2 / u1);

  if (std::isinf(r.q)) {
    r.w_in_lq = r.tail_exponent < 0.0 ? Verdict::no : Verdict::yes;
    r.lq_norm = r.w_in_lq == Verdict::yes ? weight_W(delta, 1.0 - kEps) : kInf;
  } else {
    const double e = r.q * r.tail_exponent;
    if (std::abs(e + 1.0) < kMarginalTolerance) {
      r.w_in_lq = Verdict::boundary;
      r.lq_norm = kInf;
    } else if (e < -1.0) {
      r.w_in_lq = Verdict::no;
      r.lq_norm = kInf;
    } else {
      r.w_in_lq = Verdict::yes;
      r.lq_norm = std::pow(2.0 * (body_integral(delta, r.q) + tail_integral(delta, r.q)), 1.0 / r.q);
    }
  }
  r.lp_unique = r.w_in_lq != Verdict::yes;
  r.threshold_rule = threshold_rule(delta, p);
  if (r.threshold_rule == Verdict::boundary || r.w_in_lq == Verdict::boundary)
    r.agree = r.threshold_rule == r.w_in_lq;
  else
    r.agree = r.lp_unique == (r.threshold_rule == Verdict::yes);
  r.riemannian_distance_to_boundary = riemannian_distance(delta, 0.0, 1.0);
  return r;
}

std::vector<double> default_lattice_deltas() { return {1.0, 1.2, 1.4, 1.5, 1.6, 2.0, 2.5}; }
std::vector<double> default_lattice_ps() { return {1.0, 1.5, 2.0, 3.0}; }

std::vector<OneDReport> classify_lattice(std::span<const double> deltas, std::span<const double> ps, int workers) {
  std::vector<OneDReport> rows(deltas.size() * ps.size());
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    rows[i] = classify_lp(deltas[i / ps.size()], ps[i % ps.size()]);
  });
  return rows;
}

namespace {

std::string fmt_real(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

void write_lattice_csv(std::span<const OneDReport> rows, std::ostream& out) {
  out << "delta,p,q,W_Lq_norm_or_inf,lp_unique,threshold_rule,agree\n";
  for (const auto& r : rows)
    out << fmt_real(r.delta) << ',' << fmt_real(r.p) << ',' << fmt_real(r.q) << ',' << fmt_real(r.lq_norm) << ','
        << (r.lp_unique ? "true" : "false") << ',' << to_string(r.threshold_rule) << ','
        << (r.agree ? "true" : "false") << '\n';
}

std::vector<double> example_cutoff(double delta, double n, const DomainGrid& grid) {
  require(n >= 2.0, ErrorCode::invalid_argument, "cutoff index n must be >= 2");
  require(grid.dim() == 1, ErrorCode::invalid_argument, "example cutoff lives on a 1-D grid");
  const double edge = 1.0 - 1.0 / n;
  const double w_edge = weight_W(delta, edge);
  std::vector<double> eta(grid.inside_count(), 0.0);
  for (std::size_t c = 0; c < eta.size(); ++c) {
    const double x = std::abs(grid.center(c)[0]);
    if (x < edge) eta[c] = 1.0 - weight_W(delta, x) / w_edge;
  }
  return eta;
}

DomainGrid profile_grid(double h) {
  const Interval box[1] = {{-1.0, 1.0}};
  return DomainGrid::build(box, h, [](const Point&) { return true; });
}

double gamma_sup(double delta, double n) {
  require(n >= 2.0, ErrorCode::invalid_argument, "cutoff index n must be >= 2");
  const Profile1D profile = make_profile_1d(delta);
  const double edge = 1.0 - 1.0 / n;
  const double w = weight_W(delta, edge);
  return 1.0 / (profile(edge) * w * w);
}

CutoffEnergies cutoff_energies(double delta, double n, double h) {
  const Profile1D profile = make_profile_1d(delta);
  CutoffEnergies e;
  e.delta = delta;
  e.n = n;
  const double edge = 1.0 - 1.0 / n;
  const double w_edge = weight_W(delta, edge);
  e.closed_form = 2.0 / w_edge;
  e.gamma_inf = gamma_sup(delta, n);

  const DomainGrid grid = profile_grid(h);
  const CoefficientField field = profile_field(profile);
  const auto eta = example_cutoff(delta, n, grid);
  const FormMatrices fm = assemble(grid, field, BoundaryMode::free);
  e.discrete = form_energy(fm, eta);
  e.relative_gap = std::abs(e.discrete - e.closed_form) / e.closed_form;
  const auto gamma = carre_du_champ(field, grid, eta);
  for (double g : gamma) e.gamma_inf_discrete = std::max(e.gamma_inf_discrete, g);
  return e;
}

double riemannian_distance(double delta, double x, double y) {
  require(delta >= 1.0, ErrorCode::regime, "delta must be >= 1");
  require(std::abs(x) <= 1.0 && std::abs(y) <= 1.0, ErrorCode::invalid_argument, "points must lie in [-1, 1]");
  if (x == y) return 0.0;
  const double alpha = 0.5 * delta;
  if (alpha >= 1.0 && (std::abs(x) == 1.0 || std::abs(y) == 1.0)) return kInf;
  return std::abs(profile_power_integral(alpha, x) - profile_power_integral(alpha, y));
}

}  // namespace lab
