#include "rblab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "rblab/errors.hpp"
#include "rblab/rng.hpp"

namespace rblab::harness {

namespace {

constexpr const char* kModule = "harness";

double lerp_range(double lo, double hi, double u) { return lo + (hi - lo) * u; }

}  // namespace

ProbeReport certify_ordering(const rbsde::ScenarioSpec& low,
                             const rbsde::ScenarioSpec& high,
                             std::uint64_t seed, int probes) {
  ProbeReport report;
  report.seed = seed;
  report.probes = probes;
  report.worst_margin = std::numeric_limits<double>::infinity();
  CounterRng rng(seed);
  const double horizon = low.horizon;
  const double state_box = 4.0 * std::sqrt(horizon) + 1.0;
  for (int p = 0; p < probes; ++p) {
    const double t = horizon * rng.uniform(p, 0, 0);
    const double b = lerp_range(-state_box, state_box, rng.uniform(p, 0, 1));
    const double y = lerp_range(-5.0, 5.0, rng.uniform(p, 0, 2));
    const double z = lerp_range(-5.0, 5.0, rng.uniform(p, 0, 3));

    const double xi_gap = high.terminal1(b) - low.terminal1(b);
    const double f_gap =
        high.driver.eval1(t, y, z) - low.driver.eval1(t, y, z);
    const double l_gap = high.barrier1(t, b) - low.barrier1(t, b);
    const double margin = std::min({xi_gap, f_gap, l_gap});
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      if (margin < 0.0) {
        const char* what = xi_gap <= f_gap && xi_gap <= l_gap ? "terminal"
                           : f_gap <= l_gap                   ? "driver"
                                                              : "barrier";
        report.detail = std::string(what) + " ordering fails at t = " +
                        std::to_string(t) + ", state = " + std::to_string(b);
      }
    }
  }
  const double slack = 1e-12 * (1.0 + std::abs(report.worst_margin));
  report.passed = report.worst_margin >= -slack;
  return report;
}

OrderedScenarioPair make_ordered_pair(rbsde::ScenarioSpec low,
                                      rbsde::ScenarioSpec high,
                                      DriverClass driver_class,
                                      std::uint64_t seed, int probes) {
  OrderedScenarioPair pair;
  pair.low = std::move(low);
  pair.high = std::move(high);
  pair.driver_class = driver_class;
  pair.ordering_certificate = certify_ordering(pair.low, pair.high, seed, probes);
  if (!pair.ordering_certificate.passed) {
    raise(ErrorKind::InvalidProblem, kModule, "make_ordered_pair",
          "ordering certificate failed: " + pair.ordering_certificate.detail);
  }
  return pair;
}

OrderedScenarioPair random_ordered_pair(DriverClass driver_class,
                                        std::uint64_t seed, double horizon) {
  CounterRng rng(seed);
  const auto u = [&](std::uint64_t k) { return rng.uniform(0, k, 0); };

  const double mu1 = lerp_range(-1.0, 1.0, u(0));
  const double mu2 = lerp_range(-1.0, 1.0, u(1));
  const double d_xi = u(2);
  const double gap = lerp_range(0.1, 2.0, u(3));
  const double ramp = u(4);
  const double d_bar = u(5);
  const double c = lerp_range(-1.0, 1.0, u(6));
  const double d_f = u(9);

  rbsde::ScenarioSpec low, high;
  low.horizon = high.horizon = horizon;
  low.dimension = high.dimension = 1;
  low.envelope_a = high.envelope_a = [](double) { return 200.0; };

  const auto xi1 = [mu1, mu2](std::span<const double> s) {
    return mu1 * s[0] + mu2 * std::sin(s[0]);
  };
  low.terminal = xi1;
  high.terminal = [xi1, d_xi](std::span<const double> s) {
    return xi1(s) + d_xi;
  };

  const auto l1 = [xi1, gap, ramp, horizon](double t, std::span<const double> s) {
    return xi1(s) - gap - ramp * (horizon - t);
  };
  low.barrier = l1;
  high.barrier = [l1, d_bar, horizon](double t, std::span<const double> s) {
    return l1(t, s) + d_bar * (horizon - t) / horizon;
  };

  switch (driver_class) {
    case DriverClass::Lipschitz: {
      const double sy = lerp_range(0.0, 0.8, u(7));
      const double sz = lerp_range(0.0, 0.8, u(8));
      const auto f1 = [c, sy, sz](double, double y, std::span<const double> z) {
        return c + sy * std::sin(y) + sz * std::sin(z[0]);
      };
      low.driver.eval = f1;
      high.driver.eval = [f1, d_f](double t, double y,
                                   std::span<const double> z) {
        return f1(t, y, z) + d_f;
      };
      low.driver.kind = high.driver.kind = rbsde::DriverKind::Custom;
      low.driver.alpha = std::abs(c) + sy + sz;
      high.driver.alpha = low.driver.alpha + d_f;
      low.driver.beta = high.driver.beta = 0.0;
      low.driver.gamma = high.driver.gamma = 1.0;
      break;
    }
    case DriverClass::Linear: {
      const double by = lerp_range(-0.8, 0.8, u(7));
      const auto f1 = [c, by](double, double y, std::span<const double>) {
        return c + by * y;
      };
      low.driver.eval = f1;
      high.driver.eval = [f1, d_f](double t, double y,
                                   std::span<const double> z) {
        return f1(t, y, z) + d_f;
      };
      low.driver.kind = high.driver.kind = rbsde::DriverKind::Linear;
      low.driver.alpha = std::abs(c);
      high.driver.alpha = low.driver.alpha + d_f;
      low.driver.beta = high.driver.beta = std::abs(by);
      low.driver.gamma = high.driver.gamma = 1.0;
      break;
    }
    case DriverClass::QuadraticZ: {
      const double sy = lerp_range(0.0, 0.8, u(7));
      const double g = lerp_range(0.3, 1.0, u(8));
      const auto f1 = [c, sy, g](double, double y, std::span<const double> z) {
        return c + sy * std::sin(y) + 0.5 * g * z[0] * z[0];
      };
      low.driver.eval = f1;
      high.driver.eval = [f1, d_f](double t, double y,
                                   std::span<const double> z) {
        return f1(t, y, z) + d_f;
      };
      low.driver.kind = high.driver.kind = rbsde::DriverKind::QuadraticZ;
      low.driver.alpha = std::abs(c) + sy;
      high.driver.alpha = low.driver.alpha + d_f;
      low.driver.beta = high.driver.beta = 0.0;
      low.driver.gamma = high.driver.gamma = g;
      break;
    }
  }
  low.driver.certificate = high.driver.certificate =
      rbsde::CertificateKind::Linear;

  return make_ordered_pair(std::move(low), std::move(high), driver_class,
                           seed ^ 0x5bd1e995u);
}

ComparisonVerdict comparison_suite(const OrderedScenarioPair& pair,
                                   const rbsde::Lattice& lattice) {
  if (!pair.ordering_certificate.passed) {
    raise(ErrorKind::InvalidProblem, kModule, "comparison_suite",
          "ordering certificate did not pass");
  }
  const rbsde::LatticeSolution low =
      rbsde::solve_reflected_lattice(pair.low, lattice);
  const rbsde::LatticeSolution high =
      rbsde::solve_reflected_lattice(pair.high, lattice);

  const int n = lattice.steps;
  double scale = 1.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) {
      scale = std::max({scale, std::abs(low.y.at(i, j)),
                        std::abs(high.y.at(i, j))});
    }
  }

  ComparisonVerdict verdict;
  verdict.tolerance = 1e-10 * scale;
  verdict.asserted = pair.driver_class != DriverClass::QuadraticZ;
  verdict.worst_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double margin = high.y.at(i, j) - low.y.at(i, j);
      if (margin < verdict.worst_margin) {
        verdict.worst_margin = margin;
        verdict.worst_step = i;
        verdict.worst_node = j;
      }
    }
  }
  verdict.passed = verdict.worst_margin >= -verdict.tolerance;
  return verdict;
}

StabilityReport monotone_stability_check(const StabilityFamily& family,
                                         const rbsde::Lattice& lattice) {
  if (family.scenarios.size() < 2) {
    raise(ErrorKind::InvalidProblem, kModule, "monotone_stability_check",
          "need at least two scenarios, the last being the limit");
  }
  const int n = lattice.steps;
  const double slack = 1e-9 * (1.0 + std::abs(family.bound_b));
  for (std::size_t p = 0; p < family.scenarios.size(); ++p) {
    const rbsde::ScenarioSpec& s = family.scenarios[p];
    for (int i = 0; i <= n; ++i) {
      const double t = lattice.time(i);
      for (int j = 0; j <= i; ++j) {
        const double b = lattice.node(i, j);
        if (std::abs(s.barrier1(t, b)) > family.bound_b + slack) {
          raise(ErrorKind::AssumptionViolation, kModule,
                "monotone_stability_check",
                "|barrier| exceeds the family bound at step " +
                    std::to_string(i));
        }
        if (i == n && std::abs(s.terminal1(b)) > family.bound_b + slack) {
          raise(ErrorKind::AssumptionViolation, kModule,
                "monotone_stability_check",
                "|terminal| exceeds the family bound for family index " +
                    std::to_string(p));
        }
      }
    }
  }

  std::vector<rbsde::LatticeSolution> sols;
  sols.reserve(family.scenarios.size());
  for (const rbsde::ScenarioSpec& s : family.scenarios) {
    sols.push_back(rbsde::solve_reflected_lattice(s, lattice));
  }

  double scale = 1.0;
  for (const rbsde::LatticeSolution& s : sols) {
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        scale = std::max(scale, std::abs(s.y.at(i, j)));
      }
    }
  }
  const double tol = 1e-10 * scale;
  const bool increasing = family.direction == StabilityDirection::Increasing;

  StabilityReport report;
  for (const rbsde::LatticeSolution& s : sols) {
    report.y0.push_back(s.y.at(0, 0));
  }
  for (std::size_t p = 0; p + 1 < sols.size(); ++p) {
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double y_lo = sols[p].y.at(i, j);
        const double y_hi = sols[p + 1].y.at(i, j);
        const double k_lo = sols[p].k.at(i, j);
        const double k_hi = sols[p + 1].k.at(i, j);
        const bool y_ok =
            increasing ? y_lo <= y_hi + tol : y_lo >= y_hi - tol;
        const bool k_ok =
            increasing ? k_lo >= k_hi - tol : k_lo <= k_hi + tol;
        if (!y_ok || !k_ok) {
          report.passed = false;
          report.failing_index = static_cast<int>(p + 1);
          report.failing_step = i;
          report.failing_node = j;
          report.detail = std::string(!y_ok ? "y" : "k") +
                          " monotonicity fails between family indices " +
                          std::to_string(p) + " and " + std::to_string(p + 1);
          return report;
        }
      }
    }
  }

  const rbsde::LatticeSolution& limit = sols.back();
  for (const rbsde::LatticeSolution& s : sols) {
    double gap = 0.0;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        gap = std::max(gap, std::abs(s.y.at(i, j) - limit.y.at(i, j)));
      }
    }
    report.sup_gap.push_back(gap);
  }
  for (std::size_t p = 0; p + 1 < report.sup_gap.size(); ++p) {
    if (report.sup_gap[p + 1] > report.sup_gap[p] + 1e-12 * scale) {
      report.passed = false;
      report.failing_index = static_cast<int>(p + 1);
      report.detail = "sup-norm gap to the limit increased at family index " +
                      std::to_string(p + 1);
      return report;
    }
  }
  report.passed = true;
  return report;
}

rbsde::TriangularArray oracle_snell(
    const rbsde::Lattice& lattice,
    const std::function<double(int, int)>& payoff) {
  const int n = lattice.steps;
  rbsde::TriangularArray v(n);
  for (int j = 0; j <= n; ++j) {
    const double g = payoff(n, j);
    if (!std::isfinite(g)) {
      raise(ErrorKind::InvalidProblem, kModule, "oracle_snell",
            "payoff is non-finite at a terminal node");
    }
    v.at(n, j) = g;
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = 0; j <= i; ++j) {
      const double g = payoff(i, j);
      if (!std::isfinite(g)) {
        raise(ErrorKind::InvalidProblem, kModule, "oracle_snell",
              "payoff is non-finite at step " + std::to_string(i));
      }
      const double cont = 0.5 * (v.at(i + 1, j) + v.at(i + 1, j + 1));
      v.at(i, j) = std::max(g, cont);
    }
  }
  return v;
}

rbode::RbodeSolution oracle_rbode_bruteforce(const rbode::RbodeProblem& problem,
                                             int fine_factor) {
  if (fine_factor < 2) {
    raise(ErrorKind::InvalidProblem, kModule, "oracle_rbode_bruteforce",
          "fine_factor must be at least 2");
  }
  const TimeGridPtr coarse = problem.barrier.grid;
  const auto fine = std::make_shared<const TimeGrid>(
      coarse->refine(static_cast<std::size_t>(fine_factor)));

  rbode::RbodeProblem refined;
  refined.terminal = problem.terminal;
  refined.coefficient = problem.coefficient;
  refined.barrier = ScalarPath::sample(
      fine, [&](double t) { return problem.barrier.at_time(t); });

  const rbode::RbodeSolution fine_sol =
      rbode::solve_rbode(refined, rbode::RbodeMethod::Representation);

  const std::size_t points = coarse->size();
  std::vector<double> y(points), k(points);
  for (std::size_t i = 0; i < points; ++i) {
    y[i] = fine_sol.y.values[i * static_cast<std::size_t>(fine_factor)];
    k[i] = fine_sol.k.values[i * static_cast<std::size_t>(fine_factor)];
  }
  rbode::RbodeSolution out;
  out.y = ScalarPath(coarse, std::move(y));
  out.k = ScalarPath(coarse, std::move(k));
  out.method = rbode::RbodeMethod::Representation;
  // The defect is measured where the solve actually happened.
  out.residual = fine_sol.residual;
  return out;
}

rbsde::TriangularArray node_probabilities(int steps) {
  rbsde::TriangularArray prob(steps);
  prob.at(0, 0) = 1.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j <= i + 1; ++j) {
      double acc = 0.0;
      if (j >= 1) acc += 0.5 * prob.at(i, j - 1);
      if (j <= i) acc += 0.5 * prob.at(i, j);
      prob.at(i + 1, j) = acc;
    }
  }
  return prob;
}

double skorokhod_residual(const rbsde::LatticeSolution& solution,
                          const std::function<double(double, double)>& barrier) {
  const int n = solution.lattice.steps;
  const rbsde::TriangularArray prob = node_probabilities(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = solution.lattice.time(i);
    for (int j = 0; j <= i; ++j) {
      const double gap =
          solution.y.at(i, j) - barrier(t, solution.lattice.node(i, j));
      total += prob.at(i, j) * gap * solution.dk.at(i, j);
    }
  }
  return total;
}

WeightedResidual skorokhod_residual(const rbsde::RegressionSolution& solution,
                                    const rbsde::ScenarioSpec& scenario) {
  const std::size_t n = solution.grid->steps();
  const std::size_t paths = solution.paths;
  WeightedResidual out;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = solution.grid->point(i);
      std::span<const double> s(
          &solution.state[(p * (n + 1) + i) * solution.dimension],
          static_cast<std::size_t>(solution.dimension));
      const double gap = solution.y_at(p, i) - scenario.barrier(t, s);
      const double dk = solution.k_at(p, i + 1) - solution.k_at(p, i);
      g += gap * dk;
    }
    const double delta = g - mean;
    mean += delta / static_cast<double>(p + 1);
    m2 += delta * (g - mean);
  }
  out.value = mean;
  if (paths > 1) {
    out.standard_error = std::sqrt(m2 / static_cast<double>(paths - 1)) /
                         std::sqrt(static_cast<double>(paths));
  }
  return out;
}

double skorokhod_residual(const rbode::RbodeSolution& solution,
                          const ScalarPath& barrier) {
  const std::size_t points = barrier.values.size();
  if (solution.y.values.size() != points ||
      solution.k.values.size() != points) {
    raise(ErrorKind::InvalidProblem, kModule, "skorokhod_residual",
          "solution and barrier grids do not match");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points; ++i) {
    const double gap = solution.y.values[i] - barrier.values[i];
    const double dk = solution.k.values[i + 1] - solution.k.values[i];
    total += gap * dk;
  }
  return total;
}

}  // namespace rblab::harness
