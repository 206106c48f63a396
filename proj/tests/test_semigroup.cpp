#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "lab/dirichlet_form.hpp"
#include "lab/expm.hpp"
#include "lab/random.hpp"
#include "lab/semigroup.hpp"
#include "support.hpp"

using namespace lab;
using lab::testing::interval_grid;
using lab::testing::unit_field;

namespace {

double fourier_mass(double t) {
  double s = 0.0;
  for (int k = 1; k < 200; k += 2) {
    const double kp = k * std::numbers::pi;
    s += 8.0 / (kp * kp) * std::exp(-kp * kp * t);
  }
  return s;
}

Generator unit_generator(double h, BoundaryMode mode) {
  return Generator(assemble(interval_grid(0.0, 1.0, h), unit_field(1), mode));
}

}  // namespace

TEST_CASE("dirichlet mass on the unit interval matches the fourier series") {
  CHECK(fourier_mass(0.1) == doctest::Approx(0.30211809).epsilon(1e-7));
  const Generator gen = unit_generator(1.0 / 512.0, BoundaryMode::dirichlet);
  const std::vector<double> ones(gen.size(), 1.0);
  const Trajectory tr = evolve(gen, ones, 0.1, 512, Scheme::backward_euler);
  CHECK(std::abs(tr.masses.back() - fourier_mass(0.1)) / fourier_mass(0.1) < 0.02);
  const auto defect = mass_defect(tr);
  CHECK(defect.back() == doctest::Approx(1.0 - fourier_mass(0.1)).epsilon(0.03));
}

TEST_CASE("trajectory bookkeeping") {
  const Generator gen = unit_generator(1.0 / 16.0, BoundaryMode::dirichlet);
  std::vector<double> u0(gen.size(), 0.0);
  u0[3] = 0.5;
  EvolveOptions opt;
  opt.record_every = 3;
  const Trajectory tr = evolve(gen, u0, 0.1, 10, Scheme::backward_euler, opt);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.states.front() == u0);
  CHECK(tr.times.back() == doctest::Approx(0.1));
  CHECK(tr.times.size() == 5);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < gen.size(); ++i) m += gen.form().mass[i] * tr.states[k][i];
    CHECK(tr.masses[k] == doctest::Approx(m).epsilon(1e-12));
  }
  CHECK_THROWS(mass_defect(tr));
}

TEST_CASE("null generator and free mode conserve") {
  const Interval bbox[] = {{0.0, 1.0}};
  const DomainGrid single = DomainGrid::build(bbox, 1.0, [](const Point&) { return true; });
  const Generator null_gen(assemble(single, unit_field(1), BoundaryMode::free));
  const std::vector<double> u0{0.7};
  const Trajectory tr = evolve(null_gen, u0, 1.0, 4, Scheme::backward_euler);
  for (const auto& s : tr.states) CHECK(s[0] == 0.7);

  const Generator free_gen = unit_generator(1.0 / 64.0, BoundaryMode::free);
  const std::vector<double> ones(free_gen.size(), 1.0);
  for (Scheme scheme : {Scheme::backward_euler, Scheme::matrix_exponential}) {
    const Trajectory f = evolve(free_gen, ones, 0.1, 8, scheme);
    for (double d : mass_defect(f)) CHECK(std::abs(d) < 1e-12);
    for (double v : f.states.back()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("generator is symmetric and nonnegative in the weighted inner product") {
  const Interval bbox[] = {{-1.0, 1.0}, {-1.0, 1.0}};
  const DomainGrid g = DomainGrid::build(bbox, 0.125, [](const Point& x) { return x[0] * x[0] + x[1] * x[1] < 1.0; });
  SymMatrix base(2);
  base.set(0, 0, 1.5);
  base.set(1, 1, 1.0);
  base.set(0, 1, 0.4);
  const CoefficientField field(
      2, [base](const Point& x) { return base.scaled(1.0 + x[0] * x[0]); }, "anisotropic", false);
  const Generator gen(assemble(g, field, BoundaryMode::dirichlet));
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    std::vector<double> a(gen.size()), b(gen.size());
    for (std::size_t i = 0; i < gen.size(); ++i) {
      a[i] = counter_uniform(21, trial, i);
      b[i] = counter_uniform(22, trial, i);
    }
    const double lhs = gen.inner(a, gen.apply(b));
    const double rhs = gen.inner(gen.apply(a), b);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    CHECK(gen.inner(a, gen.apply(a)) >= -1e-10);
  }
}

TEST_CASE("matrix exponential agrees with the eigendecomposition and the semigroup law") {
  const Generator gen = unit_generator(1.0 / 64.0, BoundaryMode::dirichlet);
  const Eigen::MatrixXd a = gen.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  const double t = 0.01, s = 0.02;
  const Eigen::MatrixXd spectral =
      es.eigenvectors() * (-t * es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd et = expm(-t * a);
  CHECK((et - spectral).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd es_ = expm(-s * a);
  const Eigen::MatrixXd ets = expm(-(t + s) * a);
  CHECK((ets - et * es_).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((expm(Eigen::MatrixXd::Zero(3, 3)) - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("backward euler converges to the matrix exponential") {
  const Generator gen = unit_generator(1.0 / 32.0, BoundaryMode::dirichlet);
  std::vector<double> u0(gen.size(), 0.0);
  for (std::size_t i = 8; i < 16; ++i) u0[i] = 1.0;
  const auto exact = evolve(gen, u0, 0.05, 1, Scheme::matrix_exponential).states.back();
  double prev = 1e300;
  for (std::size_t steps : {16u, 64u, 256u}) {
    const auto be = evolve(gen, u0, 0.05, steps, Scheme::backward_euler).states.back();
    double err = 0.0;
    for (std::size_t i = 0; i < gen.size(); ++i) err = std::max(err, std::abs(be[i] - exact[i]));
    CHECK(err < prev / 3.0);
    prev = err;
  }
}

TEST_CASE("conjugate gradient steps agree with the sparse factorization") {
  const Generator gen = unit_generator(1.0 / 128.0, BoundaryMode::dirichlet);
  const std::vector<double> ones(gen.size(), 1.0);
  EvolveOptions cg;
  cg.solver = StepSolver::conjugate_gradient;
  const auto a = evolve(gen, ones, 0.1, 32, Scheme::backward_euler).states.back();
  const auto b = evolve(gen, ones, 0.1, 32, Scheme::backward_euler, cg).states.back();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("submarkov bounds for diagonal coefficients") {
  const DomainGrid g = interval_grid(-1.0, 1.0, 1.0 / 64.0);
  const Generator gen(assemble(g, profile_field(Profile1D(1.5)), BoundaryMode::dirichlet));
  std::vector<double> u0(gen.size(), 0.0);
  for (std::size_t i = 0; i < gen.size() / 2; ++i) u0[i] = 1.0;
  const SubmarkovReport rep = check_submarkov(evolve(gen, u0, 0.2, 40, Scheme::backward_euler), true);
  CHECK(rep.asserted);
  CHECK(rep.violations == 0);
  CHECK(rep.min_value >= -1e-12);
  CHECK(rep.max_value <= 1.0 + 1e-12);
}

TEST_CASE("free evolution dominates dirichlet evolution") {
  const DomainGrid g = interval_grid(0.0, 1.0, 1.0 / 128.0);
  const Generator fr(assemble(g, unit_field(1), BoundaryMode::free));
  const Generator di(assemble(g, unit_field(1), BoundaryMode::dirichlet));
  std::vector<double> point(g.inside_count(), 0.0);
  point[g.nearest_cell({0.5, 0.0, 0.0})] = 1.0 / g.cell_volume();
  const DominationReport d = check_domination(fr, di, point, 0.05, 50);
  CHECK(d.passed);
  CHECK(d.min_margin >= -1e-10);

  const std::vector<double> ones(g.inside_count(), 1.0);
  const DominationReport o = check_domination(fr, di, ones, 0.05, 50);
  CHECK(o.passed);
  CHECK(o.max_margin > 0.0);

  const std::vector<double> zero(g.inside_count(), 0.0);
  const DominationReport z = check_domination(fr, di, zero, 0.05, 10);
  CHECK(z.max_margin == 0.0);
  CHECK(z.min_margin == 0.0);
}

TEST_CASE("davies gaffney bound and its sharpness under mis-scaling") {
  const DomainGrid g = interval_grid(0.0, 1.0, 1.0 / 256.0);
  const Box bx{{0.0, 0.0, 0.0}, {0.2, 0.0, 0.0}}, by{{0.8, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  std::vector<std::size_t> x, y;
  for (std::size_t c = 0; c < g.inside_count(); ++c) {
    const double p = g.center(c)[0];
    if (p <= 0.2) x.push_back(c);
    if (p >= 0.8) y.push_back(c);
  }
  const double ts[] = {0.01, 0.05};
  const Generator gen(assemble(g, unit_field(1), BoundaryMode::dirichlet));
  const auto ok = davies_gaffney_check(gen, g, x, y, ts, 1.0);
  CHECK(ok.passed);
  CHECK(ok.gap >= 0.59);
  CHECK(ok.rows[0].bound == doctest::Approx(std::exp(-ok.gap * ok.gap / 0.04) * std::sqrt(0.2 * 0.2)).epsilon(0.05));

  const Generator four(assemble(g, lab::testing::scalar_field(1, 4.0), BoundaryMode::dirichlet));
  CHECK(davies_gaffney_check(four, g, x, y, ts, 4.0).passed);
  std::vector<std::size_t> mid;
  for (std::size_t c = 0; c < g.inside_count(); ++c)
    if (g.center(c)[0] >= 0.4 && g.center(c)[0] <= 0.6) mid.push_back(c);
  CHECK_FALSE(davies_gaffney_check(four, g, x, mid, ts, 0.25).passed);
}

TEST_CASE("irreducibility of connected and split domains") {
  const DomainGrid one = interval_grid(0.0, 1.0, 1.0 / 64.0);
  const Generator g1(assemble(one, unit_field(1), BoundaryMode::free));
  const auto r1 = irreducibility_check(g1, one, 0.1, 1e-13, 3);
  CHECK(r1.verdict == Irreducibility::irreducible);
  CHECK(r1.consistent);
  CHECK(r1.min_ratio > 1e-13);

  const Interval bbox[] = {{0.0, 1.0}};
  const DomainGrid two = DomainGrid::build(bbox, 1.0 / 64.0, [](const Point& x) { return x[0] < 0.4 || x[0] > 0.6; });
  const Generator g2(assemble(two, unit_field(1), BoundaryMode::free));
  const auto r2 = irreducibility_check(g2, two, 0.1, 1e-13, 3);
  CHECK(r2.verdict == Irreducibility::reducible);
  CHECK(r2.consistent);
  CHECK(r2.mass_outside_seed_component == 0.0);
  CHECK(coupling_components(g2.form()).size() == 2);
}

TEST_CASE("a quadratic degeneracy splits the line into invariant halves") {
  const DomainGrid g = interval_grid(-2.0, 2.0, 1.0 / 64.0);
  const Point origin{0.0, 0.0, 0.0};
  const CoefficientField field =
      make_degenerate_field(1, TargetSet::points(1, std::span(&origin, 1)), 2.0, 1.0, SymMatrix::identity(1));
  const Generator gen(assemble(g, field, BoundaryMode::free));
  const auto rep = irreducibility_check(gen, g, 0.1, 1e-13, g.nearest_cell({-0.5, 0.0, 0.0}));
  CHECK(rep.coupling_components == 2);
  CHECK(rep.geometric_components == 1);
  double leak = 0.0;
  for (std::size_t c = 0; c < g.inside_count(); ++c)
    if (g.center(c)[0] > 0.0) leak += std::abs(rep.state[c]);
  CHECK(leak < 1e-8);
}

TEST_CASE("state dump layout") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  const Generator gen(assemble(g, unit_field(1), BoundaryMode::dirichlet));
  const std::vector<double> ones(4, 1.0);
  const Trajectory tr = evolve(gen, ones, 0.1, 2, Scheme::backward_euler);
  const auto dir = std::filesystem::temp_directory_path() / "lab_state_dump_test";
  std::filesystem::create_directories(dir);
  const auto files = write_state_dump(tr, g, (dir / "states").string());
  REQUIRE(files.size() == 2);
  CHECK(std::filesystem::file_size(dir / "states.bin") == tr.states.size() * 4 * sizeof(double));
  std::ifstream in(dir / "states.bin", std::ios::binary);
  double first = 0.0;
  in.read(reinterpret_cast<char*>(&first), sizeof first);
  CHECK(first == 1.0);
  std::filesystem::remove_all(dir);
}
