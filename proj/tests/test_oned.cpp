#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lab/dirichlet_form.hpp"
#include "lab/oned.hpp"

using namespace lab;

TEST_CASE("weight integral against the atanh closed form") {
  CHECK(weight_W(1.0, 0.5) == doctest::Approx(std::atanh(0.5)).epsilon(1e-12));
  CHECK(weight_W(1.0, 0.5) == doctest::Approx(0.549306).epsilon(1e-6));
  CHECK(weight_W(1.7, 0.0) == 0.0);
  for (int k = 2; k <= 10; k += 2) {
    const double x = 1.0 - std::pow(10.0, -k);
    CHECK(weight_W(1.0, x) == doctest::Approx(std::atanh(x)).epsilon(1e-9));
    CHECK(weight_W(1.0, x) == doctest::Approx((k * std::log(10.0) + std::log(2.0)) / 2.0).epsilon(1e-3));
  }
  CHECK(weight_W(2.0, 0.5) == doctest::Approx(0.5 / (2.0 * 0.75) + 0.5 * std::atanh(0.5)).epsilon(1e-10));
}

TEST_CASE("classification cells") {
  CHECK(classify_lp(2.0, 2.0).lp_unique);
  CHECK_FALSE(classify_lp(1.4, 2.0).lp_unique);
  CHECK(classify_lp(1.6, 2.0).lp_unique);
  CHECK(classify_lp(1.0, 1.0).lp_unique);
  CHECK(std::isinf(classify_lp(1.0, 1.0).q));
  CHECK(classify_lp(1.0, 3.0).q == doctest::Approx(1.5));
  const OneDReport boundary = classify_lp(1.5, 2.0);
  CHECK(boundary.w_in_lq == Verdict::boundary);
  CHECK(boundary.threshold_rule == Verdict::boundary);
  CHECK(boundary.agree);
  const OneDReport l2 = classify_lp(1.0, 2.0);
  CHECK(l2.w_in_lq == Verdict::yes);
  CHECK(l2.lq_norm == doctest::Approx(std::numbers::pi / std::sqrt(6.0)).epsilon(1e-6));
}

TEST_CASE("full lattice agrees with the threshold rule") {
  const auto deltas = default_lattice_deltas();
  const auto ps = default_lattice_ps();
  const auto rows = classify_lattice(deltas, ps);
  CHECK(rows.size() == 28);
  for (const auto& r : rows) {
    CAPTURE(r.delta);
    CAPTURE(r.p);
    CHECK(r.agree);
  }
  std::ostringstream csv;
  write_lattice_csv(rows, csv);
  CHECK(csv.str().rfind("delta,p,q,W_Lq_norm_or_inf,lp_unique,threshold_rule,agree\n", 0) == 0);
}

TEST_CASE("example cutoff values") {
  const DomainGrid g = profile_grid(1.0 / 64.0);
  const auto eta = example_cutoff(1.0, 10.0, g);
  const std::size_t center = g.nearest_cell({0.0, 0.0, 0.0});
  CHECK(eta[center] == doctest::Approx(1.0 - std::atanh(std::abs(g.center(center)[0])) / std::atanh(0.9)));
  const std::size_t half = g.nearest_cell({0.5 - 1.0 / 128.0, 0.0, 0.0});
  CHECK(eta[half] == doctest::Approx(1.0 - std::atanh(0.5 - 1.0 / 128.0) / std::atanh(0.9)));
  CHECK(1.0 - std::atanh(0.5) / std::atanh(0.9) == doctest::Approx(0.6269).epsilon(1e-4));
  for (std::size_t c = 0; c < g.inside_count(); ++c) {
    CHECK(eta[c] >= 0.0);
    CHECK(eta[c] <= 1.0);
    if (std::abs(g.center(c)[0]) >= 0.9) CHECK(eta[c] == 0.0);
  }
}

TEST_CASE("cutoff energy matches the closed form") {
  const CutoffEnergies e = cutoff_energies(1.0, 10.0, 1.0 / 4096.0);
  CHECK(e.closed_form == doctest::Approx(2.0 / std::atanh(0.9)));
  CHECK(e.closed_form == doctest::Approx(1.3585).epsilon(1e-4));
  CHECK(e.relative_gap < 0.05);
}

TEST_CASE("gamma sup growth") {
  const double ns[] = {10.0, 100.0, 1000.0};
  for (double delta : {1.0, 1.5, 2.0}) {
    std::vector<double> x, y;
    for (double n : ns) {
      x.push_back(std::log(n));
      y.push_back(std::log(gamma_sup(delta, n)));
    }
    const double slope = (y[2] - y[0]) / (x[2] - x[0]);
    CAPTURE(delta);
    if (delta == 1.5) CHECK(std::abs(slope - 0.5) < 0.1);
    if (delta == 2.0) CHECK(gamma_sup(2.0, 1000.0) < 2.0 * gamma_sup(2.0, 10.0));
  }
}

TEST_CASE("riemannian distance") {
  CHECK(riemannian_distance(1.0, 0.0, 1.0) == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-8));
  CHECK(std::isinf(riemannian_distance(2.0, 0.0, 1.0)));
  CHECK(riemannian_distance(1.3, 0.4, 0.4) == 0.0);
  CHECK(riemannian_distance(1.0, -0.5, 0.5) == doctest::Approx(2.0 * std::asin(0.5)).epsilon(1e-8));
}
