#include <doctest.h>

#include <cmath>

#include "lab/error.hpp"
#include "lab/geometry.hpp"
#include "support.hpp"

using namespace lab;
using lab::testing::interval_grid;

TEST_CASE("uniform interval grid") {
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  CHECK(g.cell_count() == 4);
  CHECK(g.inside_count() == 4);
  CHECK(g.center(0)[0] == doctest::Approx(0.125));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  CHECK(g.neighbor(0, 0, -1) == -1);
  CHECK(g.neighbor(0, 0, 1) == 1);
  CHECK(g.boundary_cells().size() == 2);
}

TEST_CASE("disk on a coarse square lattice has 12 cells") {
  const Interval bbox[] = {{-1.0, 1.0}, {-1.0, 1.0}};
  const DomainGrid g = DomainGrid::build(bbox, 0.5, [](const Point& x) { return x[0] * x[0] + x[1] * x[1] < 1.0; });
  CHECK(g.cell_count() == 16);
  CHECK(g.inside_count() == 12);
}

TEST_CASE("empty predicate is rejected") {
  const Interval bbox[] = {{0.0, 1.0}};
  try {
    DomainGrid::build(bbox, 0.25, [](const Point&) { return false; });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_domain);
  }
}

TEST_CASE("non-dyadic axis length is rejected") {
  const Interval bbox[] = {{0.0, 1.0}};
  CHECK_THROWS_AS(DomainGrid::build(bbox, 0.3, [](const Point&) { return true; }), Error);
}

TEST_CASE("distance to point, segment and endpoint sets") {
  const Point origin{0.0, 0.0, 0.0};
  const TargetSet a = TargetSet::points(1, std::span(&origin, 1));
  const DomainGrid g = interval_grid(0.0, 1.0, 0.25);
  const auto d = distance_to_set(g, a);
  CHECK(d[1] == doctest::Approx(0.375));

  const Segment s{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  const TargetSet seg = TargetSet::segments(2, std::span(&s, 1));
  CHECK(seg.distance({0.5, 0.3, 0.0}) == doctest::Approx(0.3));
  CHECK(seg.distance({2.0, 0.0, 0.0}) == doctest::Approx(1.0));

  const Point ends[] = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  const TargetSet e = TargetSet::points(1, ends);
  CHECK(e.distance({0.4, 0.0, 0.0}) == doctest::Approx(0.4));
  CHECK(e.distance({0.9, 0.0, 0.0}) == doctest::Approx(0.1));
}

TEST_CASE("boundary of the unit square is half a unit from its center") {
  const DomainGrid g = lab::testing::square_grid(0.0, 1.0, 0.125);
  const TargetSet b = TargetSet::boundary_of(g);
  CHECK(b.distance({0.5, 0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(b.distance({0.1, 0.5, 0.0}) == doctest::Approx(0.1));
}

TEST_CASE("minkowski dimension of a point, a segment and the cantor prefractal") {
  const auto scales = dyadic_scales(4, 10);
  const Point origin{0.0, 0.0, 0.0};
  CHECK(minkowski_dimension(TargetSet::points(2, std::span(&origin, 1)), 2, scales).estimate ==
        doctest::Approx(0.0).epsilon(0.05));
  const Segment s{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  CHECK(std::abs(minkowski_dimension(TargetSet::segments(2, std::span(&s, 1)), 2, scales).estimate - 1.0) <= 0.05);
  const double cantor = std::log(2.0) / std::log(3.0);
  CHECK(std::abs(minkowski_dimension(TargetSet::cantor_prefractal(8), 1, scales).estimate - cantor) <= 0.05);
}

TEST_CASE("minkowski fit needs three distinct scales") {
  const Point origin{0.0, 0.0, 0.0};
  const double two[] = {0.5, 0.25};
  CHECK_THROWS_AS(minkowski_dimension(TargetSet::points(2, std::span(&origin, 1)), 2, two), Error);
}

TEST_CASE("connected components") {
  CHECK(connected_components(interval_grid(0.0, 1.0, 0.0625)).size() == 1);

  const Interval line[] = {{0.0, 1.0}};
  const DomainGrid two = DomainGrid::build(line, 0.0625, [](const Point& x) { return x[0] < 0.4 || x[0] > 0.6; });
  const auto comps = connected_components(two);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].size() + comps[1].size() == two.inside_count());

  const Interval plane[] = {{0.0, 2.0}, {0.0, 1.0}};
  const DomainGrid dumbbell = DomainGrid::build(plane, 0.125, [](const Point& x) {
    const bool left = x[0] < 0.75, right = x[0] > 1.25;
    const bool channel = x[1] > 0.5 && x[1] < 0.625;
    return left || right || channel;
  });
  CHECK(connected_components(dumbbell).size() == 1);
}

TEST_CASE("least squares recovers an exact line") {
  const double x[] = {0.0, 1.0, 2.0, 3.0};
  const double y[] = {1.0, 3.0, 5.0, 7.0};
  const LinearFit f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
}
