#include "doctest.h"

#include <cmath>
#include <vector>

#include "rblab/errors.hpp"
#include "rblab/time_grid.hpp"

#include "test_support.hpp"

using rblab::ErrorKind;
using rblab::ScalarPath;
using rblab::TimeGrid;
using rblab::make_grid;
using rblab::test::thrown_kind;

TEST_CASE("uniform grid hits dyadic points exactly") {
  const TimeGrid g = TimeGrid::uniform(1.0, 8);
  CHECK(g.size() == 9);
  CHECK(g.steps() == 8);
  CHECK(g.point(0) == 0.0);
  CHECK(g.point(8) == 1.0);
  CHECK(g.point(4) == 0.5);
  CHECK(g.dt(3) == 0.125);
  CHECK(g.horizon() == 1.0);
  CHECK(g.mesh() == 0.125);
}

TEST_CASE("refine reproduces the original points bitwise") {
  const TimeGrid g = TimeGrid::uniform(0.7, 5);
  const TimeGrid fine = g.refine(4);
  CHECK(fine.steps() == 20);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(fine.point(4 * i) == g.point(i));
  }
  // Refined intervals tile each coarse interval.
  for (std::size_t i = 0; i < g.steps(); ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < 4; ++s) acc += fine.dt(4 * i + s);
    CHECK(acc == doctest::Approx(g.dt(i)).epsilon(1e-15));
  }
}

TEST_CASE("from_points keeps an irregular axis as given") {
  const std::vector<double> pts = {0.0, 0.1, 0.35, 0.6, 1.0};
  const TimeGrid g = TimeGrid::from_points(pts);
  CHECK(g.points() == pts);
  CHECK(g.dt(1) == doctest::Approx(0.25));
  CHECK(g.mesh() == doctest::Approx(0.4));
}

TEST_CASE("grid construction rejects bad input") {
  CHECK(thrown_kind([] { TimeGrid::uniform(0.0, 4); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] { TimeGrid::uniform(-1.0, 4); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] { TimeGrid::uniform(1.0, 0); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] {
          TimeGrid::from_points({0.0, 0.5, 0.5, 1.0});
        }) == ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] { TimeGrid::from_points({0.1, 0.5, 1.0}); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] { TimeGrid::from_points({0.0}); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([] { TimeGrid::uniform(1.0, 2).refine(0); }) ==
        ErrorKind::InvalidProblem);
}

TEST_CASE("scalar path sampling and extremes") {
  const auto g = make_grid(2.0, 4);
  const ScalarPath p = ScalarPath::sample(g, [](double t) { return t * t - 1.0; });
  CHECK(p.size() == 5);
  CHECK(p[0] == -1.0);
  CHECK(p[4] == 3.0);
  CHECK(p.sup() == 3.0);
  CHECK(p.inf() == -1.0);
  CHECK(p.sup_abs() == 3.0);

  const ScalarPath c = ScalarPath::constant(g, -2.5);
  CHECK(c.sup() == -2.5);
  CHECK(c.inf() == -2.5);
  CHECK(c.sup_abs() == 2.5);
}

TEST_CASE("scalar path interpolates linearly between grid points") {
  const auto g = make_grid(1.0, 2);
  const ScalarPath p{g, {0.0, 1.0, 0.0}};
  CHECK(p.at_time(0.0) == 0.0);
  CHECK(p.at_time(0.25) == doctest::Approx(0.5));
  CHECK(p.at_time(0.5) == 1.0);
  CHECK(p.at_time(0.75) == doctest::Approx(0.5));
  CHECK(p.at_time(1.0) == 0.0);
}

TEST_CASE("scalar path validates its grid") {
  const auto g = make_grid(1.0, 2);
  CHECK(thrown_kind([&] { ScalarPath(g, {1.0, 2.0}); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([&] {
          ScalarPath(nullptr, {1.0, 2.0, 3.0});
        }) == ErrorKind::InvalidProblem);
}
