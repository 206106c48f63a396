#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lab/dirichlet_form.hpp"
#include "lab/random.hpp"
#include "support.hpp"

using namespace lab;
using lab::testing::interval_grid;
using lab::testing::unit_field;

TEST_CASE("free mode stencil on a 4-cell interval") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  CHECK(fm.stiffness.at(1, 1) == doctest::Approx(8.0));
  CHECK(fm.stiffness.at(1, 0) == doctest::Approx(-4.0));
  CHECK(fm.stiffness.at(1, 2) == doctest::Approx(-4.0));
  CHECK(fm.stiffness.at(0, 0) == doctest::Approx(4.0));
  CHECK(fm.stiffness.is_symmetric());
}

TEST_CASE("dirichlet mode adds the ghost face") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::dirichlet);
  CHECK(fm.stiffness.at(0, 0) == doctest::Approx(8.0));
  CHECK(fm.stiffness.at(3, 3) == doctest::Approx(8.0));
}

TEST_CASE("free mode annihilates constants for any field") {
  const DomainGrid g = lab::testing::square_grid(-1.0, 1.0, 0.125);
  SymMatrix base(2);
  base.set(0, 0, 2.0);
  base.set(1, 1, 1.0);
  base.set(0, 1, 0.7);
  const CoefficientField field(
      2, [base](const Point& x) { return base.scaled(1.0 + 0.5 * std::sin(3.0 * x[0]) * std::cos(x[1])); }, "wavy",
      false);
  const FormMatrices fm = assemble(g, field, BoundaryMode::free);
  CHECK(fm.stiffness.is_symmetric());
  const std::vector<double> ones(fm.n, 1.0);
  for (double v : fm.stiffness.multiply(ones)) CHECK(std::abs(v) < 1e-12);

  for (BoundaryMode mode : {BoundaryMode::free, BoundaryMode::dirichlet}) {
    const FormMatrices m = assemble(g, field, mode);
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
      std::vector<double> psi(m.n);
      for (std::size_t i = 0; i < m.n; ++i) psi[i] = counter_uniform(11, trial, i);
      CHECK(form_energy(m, psi) >= -1e-10);
    }
  }
}

TEST_CASE("graph norm of hand fields") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  const std::vector<double> zero(4, 0.0), ones(4, 1.0);
  const GraphNormValue z = graph_norm(fm, zero);
  CHECK(z.energy == 0.0);
  CHECK(z.graph_norm == 0.0);
  const GraphNormValue o = graph_norm(fm, ones);
  CHECK(o.energy == doctest::Approx(0.0));
  CHECK(o.l2sq == doctest::Approx(1.0));
  CHECK(o.graph_norm == doctest::Approx(1.0));
  const auto x = lab::testing::sample(g, [](const Point& p) { return p[0]; });
  CHECK(form_energy(fm, x) == doctest::Approx(0.75));
}

TEST_CASE("sine energy converges to the continuum value") {
  const DomainGrid g = interval_grid(0.0, 1.0, 1.0 / 256.0);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  const auto psi = lab::testing::sample(g, [](const Point& p) { return std::sin(std::numbers::pi * p[0]); });
  const double exact = std::numbers::pi * std::numbers::pi / 2.0;
  CHECK(std::abs(form_energy(fm, psi) - exact) / exact < 0.02);
}

TEST_CASE("carre du champ") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.125);
  const std::vector<double> flat(g.inside_count(), 3.0);
  for (double v : carre_du_champ(unit_field(1), g, flat)) CHECK(v == 0.0);
  const auto x = lab::testing::sample(g, [](const Point& p) { return p[0]; });
  const auto gamma = carre_du_champ(unit_field(1), g, x);
  for (std::size_t c = 1; c + 1 < gamma.size(); ++c) CHECK(gamma[c] == doctest::Approx(1.0));
}

TEST_CASE("lp norms") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.125);
  const std::vector<double> ones(g.inside_count(), 1.0);
  for (double p : {1.0, 2.0, 3.5, kInfinityNorm}) CHECK(lp_norm(g, ones, p) == doctest::Approx(1.0));
  std::vector<double> half(g.inside_count(), 0.0);
  for (std::size_t c = 0; c < half.size() / 2; ++c) half[c] = 1.0;
  CHECK(lp_norm(g, half, 1.0) == doctest::Approx(0.5));

  const Interval third[] = {{0.0, 1.0}};
  const DomainGrid g3 = DomainGrid::build(third, 1.0 / 3.0, [](const Point&) { return true; });
  const std::vector<double> v{1.0, 2.0, 2.0};
  CHECK(lp_norm(g3, v, kInfinityNorm) == doctest::Approx(2.0));
}
