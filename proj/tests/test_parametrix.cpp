#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lab/parametrix.hpp"

using namespace lab;

namespace {

double bump(double x) { return std::exp(-2.0 * x * x); }

}  // namespace

TEST_CASE("frozen kernel values and mass") {
  CHECK(frozen_kernel(SymMatrix::scalar(1, 1.0), 1.0, {0.0, 0.0, 0.0}) == doctest::Approx(0.28209479177));
  SymMatrix c(2);
  c.set(0, 0, 1.0);
  c.set(1, 1, 4.0);
  CHECK(frozen_kernel(c, 1.0, {0.0, 0.0, 0.0}) == doctest::Approx(1.0 / (8.0 * std::numbers::pi)));
  CHECK(frozen_kernel(c, 1.0, {0.0, 0.0, 0.0}, KernelNormalization::det_inverse) ==
        doctest::Approx(1.0 / (16.0 * std::numbers::pi)));
  for (double t : {0.01, 1.0, 10.0}) CHECK(std::abs(frozen_kernel_mass(SymMatrix::scalar(1, 1.0), t).mass - 1.0) < 1e-6);
  CHECK(std::abs(frozen_kernel_mass(c, 1.0).mass - 1.0) < 1e-6);
  CHECK(kernel_normalization_from_string(to_string(KernelNormalization::det_inverse)) ==
        KernelNormalization::det_inverse);
}

TEST_CASE("one-dimensional resolvent kernel") {
  const SymMatrix one = SymMatrix::scalar(1, 1.0);
  CHECK(resolvent_kernel(one, 1.0, {0.0, 0.0, 0.0}) == doctest::Approx(0.5));
  CHECK(resolvent_kernel(one, 4.0, {0.0, 0.0, 0.0}) == doctest::Approx(0.25));
  CHECK(resolvent_kernel(one, 1.0, {40.0, 0.0, 0.0}) < 1e-17);
  for (double x : {0.0, 0.5, 1.0}) {
    const double closed = std::exp(-std::abs(x)) / 2.0;
    CHECK(std::abs(resolvent_kernel_quadrature(one, 1.0, {x, 0.0, 0.0}) - closed) / closed < 1e-6);
  }
}

TEST_CASE("constant coefficients give the exact resolvent") {
  ParametrixOptions opt;
  opt.pitch = 0.02 * std::sqrt(1.0 / 10.0);
  const ParametrixOperator op(Coefficient1D::constant(1.0), 10.0, opt);
  CHECK(op.q_matrix().nnz() == 0);
  const auto phi = op.sample(bump);
  CHECK(apply_parametrix(op, phi).residual < 1e-4);
  for (double v : op.apply_q(phi)) CHECK(v == 0.0);
  CHECK(q_norm_estimate(op).norm == 0.0);
  const NeumannResult one_term = neumann_resolvent(op, phi, 1);
  CHECK(one_term.residual < 1e-4);
  const std::vector<double> zero(op.size(), 0.0);
  for (double v : apply_parametrix(op, zero).u) CHECK(v == 0.0);
}

TEST_CASE("variable coefficients: first order accuracy and the correction") {
  CHECK_FALSE(ParametrixOperator(Coefficient1D::sine(2.0, 1.0), 10.0).window_ok());
  CHECK(ParametrixOperator(Coefficient1D::sine(2.0, 1.0), 1000.0).window_ok());
  const ParametrixOperator op(Coefficient1D::sine(2.0, 1.0), 10.0);
  const auto phi = op.sample(bump);
  CHECK(apply_parametrix(op, phi).residual < 0.5);

  std::vector<double> a(op.size()), b(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) {
    a[i] = std::sin(0.3 * i);
    b[i] = std::cos(0.7 * i);
  }
  const auto qa = op.apply_q(a);
  const auto qtb = op.apply_q_transpose(b);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    lhs += qa[i] * b[i];
    rhs += a[i] * qtb[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("correction norm decays like kappa^-1/2") {
  std::vector<double> kappas{10.0, 100.0, 1000.0, 10000.0}, norms;
  for (double k : kappas) norms.push_back(q_norm_estimate(ParametrixOperator(Coefficient1D::sine(2.0, 1.0), k)).norm);
  const double slope = loglog_slope(kappas, norms);
  CHECK(slope >= -0.6);
  CHECK(slope <= -0.4);
  CHECK(norms.back() < 1.0);
}

TEST_CASE("neumann series closes the residual") {
  const ParametrixOperator op(Coefficient1D::sine(2.0, 1.0), 1000.0);
  const NeumannResult nr = neumann_resolvent(op, op.sample(bump), 4, 7);
  CHECK(nr.residuals.size() == 4);
  CHECK(nr.residual < 0.05);
  CHECK(nr.residuals.back() <= nr.residuals.front());
}

TEST_CASE("power iteration is seed deterministic") {
  const ParametrixOperator op(Coefficient1D::sine(2.0, 1.0), 100.0);
  CHECK(q_norm_estimate(op, 3, 20, 5).norm == q_norm_estimate(op, 3, 20, 5).norm);
}

TEST_CASE("loglog slope of an exact power law") {
  const double x[] = {1.0, 10.0, 100.0};
  const double y[] = {2.0, 2.0 / std::sqrt(10.0), 0.2};
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5));
}
