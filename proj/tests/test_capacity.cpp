#include <doctest.h>

#include <cmath>

#include "lab/capacity.hpp"
#include "lab/dirichlet_form.hpp"
#include "support.hpp"

using namespace lab;
using lab::testing::interval_grid;
using lab::testing::unit_field;

namespace {

TargetSet origin_target(int dim) {
  const Point origin{0.0, 0.0, 0.0};
  return TargetSet::points(dim, std::span(&origin, 1));
}

}  // namespace

TEST_CASE("unit interval capacity of an endpoint tends to tanh(1)") {
  const double h = 1.0 / 512.0;
  const DomainGrid g = interval_grid(0.0, 1.0, h);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  const CapacityEstimate est = estimate_capacity(fm, g, origin_target(1), 2.0 * h);
  CHECK(std::abs(est.value - std::tanh(1.0)) / std::tanh(1.0) < 0.02);
  CHECK(est.value == doctest::Approx(std::pow(graph_norm(fm, est.minimizer).graph_norm, 2)).epsilon(1e-10));
  CHECK(est.min_value >= 0.0);
  CHECK(est.max_value <= 1.0 + 1e-12);
  const auto d = distance_to_set(g, origin_target(1));
  std::size_t constrained = 0;
  for (std::size_t c = 0; c < g.inside_count(); ++c)
    if (d[c] < 2.0 * h) {
      ++constrained;
      CHECK(est.minimizer[c] == 1.0);
    }
  CHECK(constrained == est.constrained_cells);
}

TEST_CASE("empty target has zero capacity") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.125);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  const CapacityEstimate est = estimate_capacity(fm, g, TargetSet::empty(1), 0.25);
  CHECK(est.value == 0.0);
  for (double v : est.minimizer) CHECK(v == 0.0);
}

TEST_CASE("capacity grows with the shell and with the coefficients") {
  const double h = 1.0 / 128.0;
  const DomainGrid g = interval_grid(0.0, 1.0, h);
  const FormMatrices fm = assemble(g, unit_field(1), BoundaryMode::free);
  const double small = estimate_capacity(fm, g, origin_target(1), 2.0 * h).value;
  const double large = estimate_capacity(fm, g, origin_target(1), 8.0 * h).value;
  CHECK(large >= small);
  const FormMatrices stiff = assemble(g, lab::testing::scalar_field(1, 3.0), BoundaryMode::free);
  CHECK(estimate_capacity(stiff, g, origin_target(1), 2.0 * h).value >= small);
}

TEST_CASE("capacity is bounded by the graph norm of any log cutoff") {
  const Interval bbox[] = {{-1.0, 1.0}, {-1.0, 1.0}};
  const DomainGrid g = DomainGrid::build(bbox, 1.0 / 32.0, [](const Point&) { return true; });
  const CoefficientField field = make_degenerate_field(2, origin_target(2), 2.0, 1.0, SymMatrix::identity(2));
  const FormMatrices fm = assemble(g, field, BoundaryMode::free);
  const CapacityEstimate est = estimate_capacity(fm, g, origin_target(2), 2.0 / 32.0);
  for (double n : {2.0, 10.0}) {
    const auto eta = log_cutoff(g, origin_target(2), n, 0.5);
    CHECK(est.value <= std::pow(graph_norm(fm, eta).graph_norm, 2) + 1e-12);
  }
}

TEST_CASE("log cutoff profile") {
  const double n = 100.0;
  CHECK(log_cutoff_profile(1.0 / n, n) == doctest::Approx(1.0));
  CHECK(log_cutoff_profile(0.5 / n, n) == 1.0);
  CHECK(log_cutoff_profile(1.0, n) == doctest::Approx(0.0));
  CHECK(log_cutoff_profile(3.0, n) == 0.0);
  CHECK(log_cutoff_profile(1.0 / std::sqrt(n), n) == doctest::Approx(0.5));
}

TEST_CASE("log cutoff energies decay like 1/log n around a quadratic degeneracy") {
  const Interval bbox[] = {{-1.0, 1.0}, {-1.0, 1.0}};
  const DomainGrid g = DomainGrid::build(bbox, 1.0 / 128.0, [](const Point&) { return true; });
  const CoefficientField field = make_degenerate_field(2, origin_target(2), 2.0, 1.0, SymMatrix::identity(2));
  const double ns[] = {10.0, 100.0, 1000.0};
  const auto sweep = log_cutoff_energy_sweep(field, g, origin_target(2), ns);
  CHECK(fit_inverse_log(sweep).linear.r_squared > 0.95);
  CHECK(sweep[1].l2sq < sweep[0].l2sq);
  CHECK(sweep[2].l2sq < sweep[1].l2sq);
}

TEST_CASE("flat coefficients keep endpoint cutoff energies bounded below") {
  const DomainGrid g = interval_grid(0.0, 1.0, 1.0 / 1024.0);
  const double ns[] = {10.0, 100.0, 1000.0};
  const auto sweep = log_cutoff_energy_sweep(unit_field(1), g, origin_target(1), ns);
  for (const auto& p : sweep) CHECK(p.energy + p.l2sq > 0.5 * std::tanh(1.0));
}

TEST_CASE("markov uniqueness threshold") {
  CHECK(classify_markov_unique(2, 1.0, 1.0) == MarkovVerdict::unique_by_threshold);
  CHECK(classify_markov_unique(3, 1.0, 0.0) == MarkovVerdict::unique_by_threshold);
  CHECK(classify_markov_unique(2, 1.0, 0.5) == MarkovVerdict::unclassified);
  CHECK(classify_markov_unique(2, 0.0, 2.0) == MarkovVerdict::unique_by_threshold);
  CHECK_THROWS(classify_markov_unique(2, 2.0, 1.0));
}
