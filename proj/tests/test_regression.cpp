#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>

#include "rblab/errors.hpp"
#include "rblab/rbsde.hpp"

#include "test_support.hpp"

using namespace rblab;
using namespace rblab::rbsde;
using rblab::test::thrown_kind;

namespace {

ScenarioSpec plain_scenario(
    std::function<double(std::span<const double>)> terminal) {
  ScenarioSpec s;
  s.driver.eval = [](double, double, std::span<const double>) { return 0.0; };
  s.driver.kind = DriverKind::Zero;
  s.driver.certificate = CertificateKind::Linear;
  s.driver.alpha = 0.0;
  s.driver.beta = 0.0;
  s.driver.gamma = 1.0;
  s.terminal = std::move(terminal);
  s.barrier = [](double, std::span<const double>) { return -50.0; };
  s.envelope_a = [](double) { return 60.0; };
  s.horizon = 1.0;
  return s;
}

ScenarioSpec put_scenario() {
  ScenarioSpec s = plain_scenario([](std::span<const double> b) {
    return std::max(1.0 - std::exp(b[0] - 0.5), 0.0);
  });
  s.barrier = [](double t, std::span<const double> b) {
    return std::max(1.0 - std::exp(b[0] - 0.5 * t), 0.0);
  };
  s.envelope_a = [](double) { return 2.0; };
  return s;
}

}  // namespace

TEST_CASE("regression solve is reproducible bit for bit") {
  const ScenarioSpec sc = put_scenario();
  const RegressionSolution a = solve_reflected_regression(sc, 500, 12, 2, 77);
  const RegressionSolution b = solve_reflected_regression(sc, 500, 12, 2, 77);
  CHECK(a.state == b.state);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
  CHECK(a.k == b.k);
  CHECK(a.y0 == b.y0);
  CHECK(a.y0_standard_error == b.y0_standard_error);

  const RegressionSolution c = solve_reflected_regression(sc, 500, 12, 2, 78);
  CHECK(a.state != c.state);
}

TEST_CASE("regression recovers a polynomial conditional expectation") {
  // xi = B_T^2 lies in the degree-2 basis, so the backward induction is
  // exact and Y_0 estimates E[B_T^2] = T up to the plain-mean noise at the
  // first step.
  const ScenarioSpec sc =
      plain_scenario([](std::span<const double> b) { return b[0] * b[0]; });
  const RegressionSolution sol = solve_reflected_regression(sc, 4000, 8, 2, 11);
  CHECK(sol.y0 == sol.y_at(0, 0));
  CHECK(sol.y0_standard_error > 0.0);
  CHECK(std::abs(sol.y0 - 1.0) <=
        std::max(4.0 * sol.y0_standard_error, 0.03));
}

TEST_CASE("regression slope recovers the martingale representation") {
  // xi = B_T gives Z identically 1; the projected slope at the root is the
  // sample mean of (Delta B)^2 / dt.
  const ScenarioSpec sc =
      plain_scenario([](std::span<const double> b) { return b[0]; });
  const RegressionSolution sol = solve_reflected_regression(sc, 4000, 8, 1, 5);
  CHECK(std::abs(sol.z_at(0, 0, 0) - 1.0) <= 0.1);
  CHECK(std::abs(sol.z_at(17, 4, 0) - 1.0) <= 0.25);
}

TEST_CASE("regression enforces the barrier and accumulates k per path") {
  const ScenarioSpec sc = put_scenario();
  const RegressionSolution sol =
      solve_reflected_regression(sc, 2000, 25, 3, 2026);
  const std::size_t n = sol.grid->steps();
  REQUIRE(n == 25);
  std::size_t barrier_violations = 0;
  std::size_t k_decreases = 0;
  std::size_t k_start_nonzero = 0;
  bool pushed_somewhere = false;
  for (std::size_t p = 0; p < sol.paths; ++p) {
    if (sol.k_at(p, 0) != 0.0) ++k_start_nonzero;
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = sol.grid->point(i);
      const double b = sol.state_at(p, i, 0);
      const double barrier = sc.barrier(t, std::span<const double>(&b, 1));
      if (!(sol.y_at(p, i) >= barrier)) ++barrier_violations;
      if (i > 0) {
        if (!(sol.k_at(p, i) >= sol.k_at(p, i - 1))) ++k_decreases;
        if (sol.k_at(p, i) > sol.k_at(p, i - 1)) pushed_somewhere = true;
      }
    }
  }
  CHECK(barrier_violations == 0);
  CHECK(k_decreases == 0);
  CHECK(k_start_nonzero == 0);
  CHECK(pushed_somewhere);
}

TEST_CASE("regression input validation") {
  const ScenarioSpec sc = put_scenario();

  // Degree 3 needs 10 * 16 = 160 paths.
  CHECK(thrown_kind([&] { solve_reflected_regression(sc, 159, 10, 3, 1); }) ==
        ErrorKind::InvalidProblem);
  CHECK_NOTHROW(solve_reflected_regression(sc, 160, 10, 3, 1));

  CHECK(thrown_kind([&] { solve_reflected_regression(sc, 500, 0, 2, 1); }) ==
        ErrorKind::InvalidProblem);
  CHECK(thrown_kind([&] { solve_reflected_regression(sc, 500, 10, -1, 1); }) ==
        ErrorKind::InvalidProblem);

  ScenarioSpec bad_dim = sc;
  bad_dim.dimension = 0;
  CHECK(thrown_kind([&] {
          solve_reflected_regression(bad_dim, 500, 10, 2, 1);
        }) == ErrorKind::InvalidProblem);

  ScenarioSpec missing = sc;
  missing.terminal = nullptr;
  CHECK(thrown_kind([&] {
          solve_reflected_regression(missing, 500, 10, 2, 1);
        }) == ErrorKind::InvalidProblem);
}

TEST_CASE("regression probes assumptions on the sampled states") {
  ScenarioSpec loose = put_scenario();
  loose.barrier = [](double, std::span<const double>) { return -3.0; };
  loose.envelope_a = [](double) { return 2.9; };
  CHECK(thrown_kind([&] { solve_reflected_regression(loose, 200, 6, 1, 3); }) ==
        ErrorKind::AssumptionViolation);

  ScenarioSpec crossing = put_scenario();
  crossing.terminal = [](std::span<const double>) { return 0.0; };
  crossing.barrier = [](double, std::span<const double>) { return 0.1; };
  crossing.envelope_a = [](double) { return 2.0; };
  CHECK(thrown_kind([&] {
          solve_reflected_regression(crossing, 200, 6, 1, 3);
        }) == ErrorKind::AssumptionViolation);

  ScenarioSpec blown = put_scenario();
  blown.terminal = [](std::span<const double>) {
    return std::numeric_limits<double>::infinity();
  };
  CHECK(thrown_kind([&] { solve_reflected_regression(blown, 200, 6, 1, 3); }) ==
        ErrorKind::InvalidProblem);
}
