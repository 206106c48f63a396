#include "lab/parametrix.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lab/error.hpp"
#include "lab/geometry.hpp"
#include "lab/random.hpp"

namespace lab {

std::string to_string(KernelNormalization n) {
  return n == KernelNormalization::mass_normalized ? "mass-normalized" : "det-inverse";
}

KernelNormalization kernel_normalization_from_string(const std::string& name) {
  if (name == "mass-normalized") return KernelNormalization::mass_normalized;
  if (name == "det-inverse") return KernelNormalization::det_inverse;
  fail(ErrorCode::schema, "unknown kernel normalization '" + name + "'");
}

namespace {

double quadratic_form(const SymMatrix& inv, const Point& x) {
  double s = 0.0;
  for (int i = 0; i < inv.dim(); ++i)
    for (int j = 0; j < inv.dim(); ++j) s += x[i] * inv(i, j) * x[j];
  return s;
}

double prefactor(const SymMatrix& c_y, double t, KernelNormalization normalization) {
  const double det = c_y.determinant();
  const double det_part = normalization == KernelNormalization::mass_normalized ? 1.0 / std::sqrt(det) : 1.0 / det;
  return det_part * std::pow(4.0 * std::numbers::pi * t, -0.5 * c_y.dim());
}

void require_spd(const SymMatrix& c_y) {
  require(c_y.dim() >= 1 && c_y.positive_definite(), ErrorCode::invalid_argument,
          "frozen coefficient matrix must be symmetric positive definite");
}

}  // namespace

double frozen_kernel(const SymMatrix& c_y, double t, const Point& x, KernelNormalization normalization) {
  require_spd(c_y);
  require(t > 0.0, ErrorCode::invalid_argument, "kernel time must be positive");
  return prefactor(c_y, t, normalization) * std::exp(-quadratic_form(c_y.inverse(), x) / (4.0 * t));
}

KernelMass frozen_kernel_mass(const SymMatrix& c_y, double t, KernelNormalization normalization) {
  require_spd(c_y);
  require(t > 0.0, ErrorCode::invalid_argument, "kernel time must be positive");
  const int d = c_y.dim();
  KernelMass km;
  km.window = 8.0 * std::sqrt(2.0 * t * c_y.max_eigenvalue());
  const double target_pitch = std::sqrt(t * c_y.min_eigenvalue()) / 8.0;
  const auto per_axis = static_cast<std::size_t>(std::ceil(2.0 * km.window / target_pitch));
  km.pitch = 2.0 * km.window / static_cast<double>(per_axis);
  km.points = 1;
  for (int k = 0; k < d; ++k) km.points *= per_axis;
  require(km.points <= 50'000'000, ErrorCode::size_limit, "kernel mass lattice too large");

  const SymMatrix inv = c_y.inverse();
  const double pre = prefactor(c_y, t, normalization);
  double sum = 0.0;
  std::array<std::size_t, kMaxDim> idx{0, 0, 0};
  for (std::size_t flat = 0; flat < km.points; ++flat) {
    std::size_t rest = flat;
    Point x{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      idx[k] = rest % per_axis;
      rest /= per_axis;
      x[k] = -km.window + (static_cast<double>(idx[k]) + 0.5) * km.pitch;
    }
    sum += std::exp(-quadratic_form(inv, x) / (4.0 * t));
  }
  km.mass = pre * sum * std::pow(km.pitch, d);
  return km;
}

double resolvent_kernel(const SymMatrix& c_y, double kappa, const Point& x) {
  require(kappa > 0.0, ErrorCode::invalid_argument, "kappa must be positive");
  require_spd(c_y);
  if (c_y.dim() == 1) {
    const double c = c_y(0, 0);
    return std::exp(-std::abs(x[0]) * std::sqrt(kappa / c)) / (2.0 * std::sqrt(kappa * c));
  }
  return resolvent_kernel_quadrature(c_y, kappa, x);
}

double resolvent_kernel_quadrature(const SymMatrix& c_y, double kappa, const Point& x) {
  require(kappa > 0.0, ErrorCode::invalid_argument, "kappa must be positive");
  require_spd(c_y);
  const int d = c_y.dim();
  const SymMatrix inv = c_y.inverse();
  const double r2 = quadratic_form(inv, x);
  if (d >= 2 && r2 == 0.0) return std::numeric_limits<double>::infinity();

  const double t_lo = 1e-8, t_hi = 1e3;
  auto in_log_t = [&](double s) {
    const double t = std::exp(s);
    return t * std::exp(-kappa * t) * frozen_kernel(c_y, t, x);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  const double s0 = std::log(t_lo), s1 = std::log(t_hi);
  const int pieces = static_cast<int>(std::ceil(s1 - s0));
  for (int k = 0; k < pieces; ++k) {
    const double a = s0 + (s1 - s0) * k / pieces;
    const double b = s0 + (s1 - s0) * (k + 1) / pieces;
    total += GK::integrate(in_log_t, a, b, 8, 1e-13);
  }
  if (d == 1) {
    // t = r^2 on [0, t_lo]: the t^(-1/2) singularity becomes a smooth integrand
    const double pre = 2.0 / std::sqrt(4.0 * std::numbers::pi * c_y(0, 0));
    auto head = [&](double r) {
      if (r == 0.0) return r2 == 0.0 ? pre : 0.0;
      return pre * std::exp(-kappa * r * r - r2 / (4.0 * r * r));
    };
    total += GK::integrate(head, 0.0, std::sqrt(t_lo), 8, 1e-13);
  }
  return total;
}

Coefficient1D Coefficient1D::constant(double c) {
  require(c > 0.0, ErrorCode::invalid_argument, "constant coefficient must be positive");
  return {[c](double) { return c; }, [](double) { return 0.0; }, "constant(" + std::to_string(c) + ")"};
}

Coefficient1D Coefficient1D::sine(double a, double b) {
  require(a > std::abs(b), ErrorCode::invalid_argument, "a + b sin(x) must stay positive");
  return {[a, b](double x) { return a + b * std::sin(x); }, [b](double x) { return b * std::cos(x); },
          "sine(" + std::to_string(a) + "," + std::to_string(b) + ")"};
}

ParametrixOperator::ParametrixOperator(Coefficient1D coef, double kappa, const ParametrixOptions& options)
    : coef_(std::move(coef)), kappa_(kappa) {
  require(kappa > 0.0, ErrorCode::invalid_argument, "kappa must be positive");
  require(options.window_hi > options.window_lo, ErrorCode::invalid_argument, "empty parametrix window");
  require(options.decay_lengths > 0.0, ErrorCode::invalid_argument, "decay_lengths must be positive");
  const double width = options.window_hi - options.window_lo;

  double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
  constexpr int kProbe = 4096;
  for (int i = 0; i <= kProbe; ++i) {
    const double c = coef_.value(options.window_lo + width * i / kProbe);
    require(c > 0.0, ErrorCode::invalid_argument, "parametrix coefficient must be positive on the window");
    c_min = std::min(c_min, c);
    c_max = std::max(c_max, c);
  }
  const double ell_min = std::sqrt(c_min / kappa);
  const double ell_max = std::sqrt(c_max / kappa);
  const double target = options.pitch > 0.0 ? options.pitch : ell_min / 8.0;
  const auto n = static_cast<std::size_t>(std::ceil(width / target));
  require(n <= 200'000, ErrorCode::size_limit, "parametrix lattice too large");
  pitch_ = width / static_cast<double>(n);
  window_ok_ = 0.5 * width >= 8.0 * ell_max;
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) nodes_[i] = options.window_lo + (static_cast<double>(i) + 0.5) * pitch_;

  std::vector<double> c_at(n), a_at(n), norm_at(n), radius_at(n);
  for (std::size_t j = 0; j < n; ++j) {
    c_at[j] = coef_.value(nodes_[j]);
    a_at[j] = std::sqrt(kappa / c_at[j]);
    norm_at[j] = 1.0 / (2.0 * std::sqrt(kappa * c_at[j]));
    radius_at[j] = options.decay_lengths / a_at[j];
  }
  const auto band = static_cast<std::int64_t>(std::ceil(options.decay_lengths * ell_max / pitch_));

  r_.rows = r_.cols = q_.rows = q_.cols = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = nodes_[i];
    const double cx = c_at[i];
    const double dcx = coef_.derivative(x);
    const auto lo = static_cast<std::size_t>(std::max<std::int64_t>(0, static_cast<std::int64_t>(i) - band));
    const auto hi = static_cast<std::size_t>(std::min<std::int64_t>(static_cast<std::int64_t>(n) - 1,
                                                                    static_cast<std::int64_t>(i) + band));
    for (std::size_t j = lo; j <= hi; ++j) {
      const double z = x - nodes_[j];
      if (std::abs(z) > radius_at[j]) continue;
      const double a = a_at[j];
      const double r = norm_at[j] * std::exp(-a * std::abs(z));
      r_.col.push_back(static_cast<std::int32_t>(j));
      r_.val.push_back(pitch_ * r);
      const double sign = z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
      const double q = -(dcx * (-sign * a * r) + (cx - c_at[j]) * a * a * r);
      if (q != 0.0) {
        q_.col.push_back(static_cast<std::int32_t>(j));
        q_.val.push_back(pitch_ * q);
      }
    }
    r_.row_ptr.push_back(static_cast<std::int64_t>(r_.val.size()));
    q_.row_ptr.push_back(static_cast<std::int64_t>(q_.val.size()));
  }
}

std::vector<double> ParametrixOperator::apply_r(std::span<const double> phi) const {
  require(phi.size() == size(), ErrorCode::invalid_argument, "lattice function length mismatch");
  return r_.multiply(phi);
}

std::vector<double> ParametrixOperator::apply_q(std::span<const double> phi) const {
  require(phi.size() == size(), ErrorCode::invalid_argument, "lattice function length mismatch");
  return q_.multiply(phi);
}

std::vector<double> ParametrixOperator::apply_q_transpose(std::span<const double> phi) const {
  require(phi.size() == size(), ErrorCode::invalid_argument, "lattice function length mismatch");
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < q_.rows; ++i)
    for (std::int64_t k = q_.row_ptr[i]; k < q_.row_ptr[i + 1]; ++k) out[q_.col[k]] += q_.val[k] * phi[i];
  return out;
}

std::vector<double> ParametrixOperator::sample(const std::function<double(double)>& f) const {
  std::vector<double> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes_[i]);
  return v;
}

double resolvent_residual(const ParametrixOperator& op, std::span<const double> u, std::span<const double> phi) {
  const std::size_t n = op.size();
  require(u.size() == n && phi.size() == n, ErrorCode::invalid_argument, "lattice function length mismatch");
  require(n >= 3, ErrorCode::invalid_argument, "residual needs at least three nodes");
  const double p = op.pitch();
  const auto& x = op.nodes();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double cp = op.coefficient().value(x[i] + 0.5 * p);
    const double cm = op.coefficient().value(x[i] - 0.5 * p);
    const double lu = -(cp * (u[i + 1] - u[i]) - cm * (u[i] - u[i - 1])) / (p * p);
    const double r = op.kappa() * u[i] + lu - phi[i];
    num += r * r;
    den += phi[i] * phi[i];
  }
  require(den > 0.0, ErrorCode::invalid_argument, "residual needs a nonzero right-hand side");
  return std::sqrt(num / den);
}

ParametrixResult apply_parametrix(const ParametrixOperator& op, std::span<const double> phi) {
  ParametrixResult res;
  res.u = op.apply_r(phi);
  res.window_ok = op.window_ok();
  bool zero = std::all_of(phi.begin(), phi.end(), [](double v) { return v == 0.0; });
  res.residual = zero ? 0.0 : resolvent_residual(op, res.u, phi);
  return res;
}

namespace {

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace

NormEstimate q_norm_estimate(const ParametrixOperator& op, int trials, int iterations, std::uint64_t seed) {
  require(trials >= 1 && iterations >= 1, ErrorCode::invalid_argument, "power iteration needs trials, iterations >= 1");
  NormEstimate est;
  const std::size_t n = op.size();
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = counter_uniform(seed, static_cast<std::uint64_t>(trial), i);
    double nv = norm2(v);
    for (double& e : v) e /= nv;
    double sigma = 0.0;
    for (int it = 0; it < iterations; ++it) {
      const auto w = op.apply_q(v);
      sigma = norm2(w);
      if (sigma == 0.0) break;
      auto z = op.apply_q_transpose(w);
      const double nz = norm2(z);
      if (nz == 0.0) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / nz;
    }
    if (sigma != 0.0) sigma = norm2(op.apply_q(v));
    est.per_trial.push_back(sigma);
    est.norm = std::max(est.norm, sigma);
  }
  return est;
}

NeumannResult neumann_resolvent(const ParametrixOperator& op, std::span<const double> phi, int terms,
                                std::uint64_t seed) {
  require(terms >= 1, ErrorCode::invalid_argument, "series_terms must be >= 1");
  NeumannResult res;
  res.q_norm = q_norm_estimate(op, 3, 20, seed).norm;
  require(res.q_norm < 1.0, ErrorCode::regime,
          "Neumann series diverges: estimated ||Q|| = " + std::to_string(res.q_norm) + " >= 1");
  std::vector<double> term(phi.begin(), phi.end());
  std::vector<double> sum = term;
  for (int k = 1; k <= terms; ++k) {
    res.u = op.apply_r(sum);
    res.residuals.push_back(resolvent_residual(op, res.u, phi));
    if (k == terms) break;
    term = op.apply_q(term);
    for (std::size_t i = 0; i < term.size(); ++i) {
      term[i] = -term[i];
      sum[i] += term[i];
    }
  }
  res.residual = res.residuals.back();
  return res;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_argument, "slope needs matched samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::invalid_argument, "log-log slope needs positive samples");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

}  // namespace lab
