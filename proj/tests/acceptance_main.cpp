// Acceptance gate: one check per release criterion, each printed as a single
// [PASS]/[FAIL] line with its measured margin.  The process exit code is the
// number of failed criteria, so the binary doubles as a ctest entry.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rblab/bounds.hpp"
#include "rblab/cli.hpp"
#include "rblab/harness.hpp"
#include "rblab/rbode.hpp"
#include "rblab/rbsde.hpp"
#include "rblab/rng.hpp"
#include "rblab/time_grid.hpp"

#include "test_support.hpp"

namespace {

using rblab::CounterRng;
using rblab::make_grid;
using rblab::ScalarPath;
namespace rbode = rblab::rbode;
namespace bounds = rblab::bounds;
namespace rbsde = rblab::rbsde;
namespace harness = rblab::harness;

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

rbsde::DriverSpec zero_driver() {
  rbsde::DriverSpec d;
  d.kind = rbsde::DriverKind::Zero;
  d.eval = [](double, double, std::span<const double>) { return 0.0; };
  d.alpha = 0.0;
  d.beta = 0.0;
  d.gamma = 1.0;
  return d;
}

rbsde::DriverSpec quadratic_driver(double c0, double gamma) {
  rbsde::DriverSpec d;
  d.kind = rbsde::DriverKind::QuadraticZ;
  d.eval = [c0, gamma](double, double, std::span<const double> z) {
    return c0 + 0.5 * gamma * z[0] * z[0];
  };
  d.alpha = c0;
  d.beta = 0.0;
  d.gamma = gamma;
  return d;
}

struct SuiteEntry {
  std::string name;
  rbsde::ScenarioSpec scenario;
};

// Mirrors the scenario suite shipped with the command-line tool.
std::vector<SuiteEntry> acceptance_suite() {
  std::vector<SuiteEntry> suite;
  {
    SuiteEntry s;
    s.name = "martingale-baseline";
    s.scenario.driver = zero_driver();
    s.scenario.terminal = [](std::span<const double> b) { return b[0]; };
    s.scenario.barrier = [](double, std::span<const double>) { return -10.0; };
    s.scenario.envelope_a = [](double) { return 12.0; };
    suite.push_back(std::move(s));
  }
  {
    SuiteEntry s;
    s.name = "quadratic-closed-form";
    s.scenario.driver = quadratic_driver(0.0, 1.0);
    s.scenario.terminal = [](std::span<const double> b) { return b[0]; };
    s.scenario.barrier = [](double, std::span<const double>) { return -10.0; };
    s.scenario.envelope_a = [](double) { return 12.0; };
    suite.push_back(std::move(s));
  }
  {
    SuiteEntry s;
    s.name = "american-put";
    s.scenario.driver = zero_driver();
    s.scenario.barrier = [](double t, std::span<const double> b) {
      return std::max(1.0 - std::exp(b[0] - 0.5 * t), 0.0);
    };
    s.scenario.terminal = [barrier = s.scenario.barrier](
                              std::span<const double> b) {
      return barrier(1.0, b);
    };
    s.scenario.envelope_a = [](double) { return 2.0; };
    suite.push_back(std::move(s));
  }
  {
    SuiteEntry s;
    s.name = "linear-drift";
    s.scenario.driver.kind = rbsde::DriverKind::Linear;
    s.scenario.driver.eval = [](double, double y, std::span<const double>) {
      return 0.25 + 0.2 * y;
    };
    s.scenario.driver.alpha = 0.25;
    s.scenario.driver.beta = 0.2;
    s.scenario.driver.gamma = 1.0;
    s.scenario.terminal = [](std::span<const double> b) {
      return std::sin(b[0]);
    };
    s.scenario.barrier = [](double, std::span<const double>) { return -2.0; };
    s.scenario.envelope_a = [](double) { return 3.0; };
    suite.push_back(std::move(s));
  }
  {
    SuiteEntry s;
    s.name = "quadratic-active-barrier";
    s.scenario.driver = quadratic_driver(0.2, 1.0);
    s.scenario.terminal = [](std::span<const double> b) {
      return std::max(b[0], 0.35);
    };
    s.scenario.barrier = [](double, std::span<const double> b) {
      return 0.35 - 0.4 * (b[0] - 0.3) * (b[0] - 0.3);
    };
    s.scenario.envelope_a = [](double) { return 28.5; };
    suite.push_back(std::move(s));
  }
  return suite;
}

// --------------------------------------------------------------------------
// 1. Representation and Picard agree on randomized Lipschitz problems.
// --------------------------------------------------------------------------
bool criterion_cross_method(std::string& note) {
  const auto start = std::chrono::steady_clock::now();
  const CounterRng rng(424242);
  const auto grid = make_grid(1.0, 1000);
  double worst = 0.0;
  for (int p = 0; p < 25; ++p) {
    const double c = 2.0 * rng.uniform(p, 0, 0) - 1.0;
    const double s = 0.3 + 0.7 * rng.uniform(p, 1, 0);
    const double w = 0.5 + 1.5 * rng.uniform(p, 2, 0);
    const double x = 2.0 * rng.uniform(p, 3, 0);
    const double amp = 0.5 + rng.uniform(p, 4, 0);
    rbode::RbodeProblem prob;
    prob.terminal = x;
    prob.coefficient = rbode::Coefficient::lipschitz(
        [c, s, w](double y) { return c + s * std::sin(w * y); }, s * w);
    prob.barrier = ScalarPath::sample(grid, [x, amp](double t) {
      return x - 0.2 + amp * std::sin(4.0 * t) * (1.0 - t);
    });
    const rbode::RbodeSolution rep =
        rbode::solve_rbode(prob, rbode::RbodeMethod::Representation);
    const rbode::RbodeSolution pic =
        rbode::solve_rbode(prob, rbode::RbodeMethod::Picard);
    for (std::size_t i = 0; i < rep.y.size(); ++i)
      worst = std::max(worst, std::abs(rep.y[i] - pic.y[i]));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  note = fmt("sup gap %.2e over 25 problems in %.2f s", worst, seconds);
  return worst <= 1e-6 && seconds < 10.0;
}

// --------------------------------------------------------------------------
// 2. The linear-growth majorant equation matches its closed form.
// --------------------------------------------------------------------------
bool criterion_theta_closed_form(std::string& note) {
  const bounds::GrowthTransform H = bounds::build_H_linear(1.0, 1.0, 1.0);
  const std::size_t steps = std::size_t{1} << 23;
  const auto grid = make_grid(1.0, steps);
  const ScalarPath a = ScalarPath::constant(grid, 0.0);
  double worst = 0.0;
  for (const double x : {0.0, 0.5, 1.0}) {
    const double expected = std::exp(1.0) * x + (std::exp(1.0) - 1.0);
    const bounds::ThetaSolution sol = bounds::solve_theta(x, H, a);
    const double got = std::log(sol.theta[0]);
    worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
  }
  note = fmt("worst relative gap %.2e at 2^23 grid points", worst);
  return worst <= 1e-6;
}

// --------------------------------------------------------------------------
// 3. The driverless lattice martingale is exact in every bit.
// --------------------------------------------------------------------------
bool criterion_martingale_exact(std::string& note) {
  const int sizes[] = {1, 2, 3, 5, 8, 16, 21, 64, 100, 257, 512, 777, 1000};
  for (const int n : sizes) {
    rbsde::ScenarioSpec sc;
    sc.driver = zero_driver();
    sc.terminal = [](std::span<const double> b) { return b[0]; };
    sc.barrier = [](double, std::span<const double>) { return -10.0; };
    sc.envelope_a = [](double) { return 12.0; };
    // A dyadic horizon makes dt = 2^-14 and sqrt(dt) = 2^-7 exact, so every
    // lattice node, children mean, and jump is computed without rounding.
    sc.horizon = n * std::ldexp(1.0, -14);
    const rbsde::Lattice lat = rbsde::build_lattice(sc.horizon, n);
    const rbsde::LatticeSolution sol = rbsde::solve_reflected_lattice(sc, lat);
    if (sol.y.at(0, 0) != 0.0) {
      note = fmt("Y0 != 0 at N = %g", n);
      return false;
    }
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) {
        if (sol.k.at(i, j) != 0.0 || (i < n && sol.dk.at(i, j) != 0.0)) {
          note = fmt("K != 0 at N = %g", n);
          return false;
        }
      }
  }
  note = "Y0 = 0 and K = 0 bitwise on 13 lattice sizes up to N = 1000";
  return true;
}

// --------------------------------------------------------------------------
// 4. Quadratic driver with inactive barrier converges to ln E e^{B_T} = T/2.
// --------------------------------------------------------------------------
bool criterion_quadratic_closed_form(std::string& note) {
  rbsde::ScenarioSpec sc;
  sc.driver = quadratic_driver(0.0, 1.0);
  sc.terminal = [](std::span<const double> b) { return b[0]; };
  sc.barrier = [](double, std::span<const double>) { return -16.0; };
  sc.envelope_a = [](double) { return 18.0; };
  std::vector<double> errors;
  for (const int n : {25, 50, 100, 200}) {
    const rbsde::Lattice lat = rbsde::build_lattice(1.0, n);
    const rbsde::LatticeSolution sol = rbsde::solve_reflected_lattice(sc, lat);
    errors.push_back(std::abs(sol.y.at(0, 0) - 0.5));
  }
  bool pass = errors.back() <= 1e-2;
  // The backward recursion happens to be exact for this driver (z = 1 at
  // every node, so each level adds exactly dt/2), leaving only rounding
  // noise of order 1e-15.  The nonincreasing-error check therefore carries
  // an absolute floor far below the headline tolerance; it only engages
  // once the error sequence has bottomed out at machine precision.
  for (std::size_t k = 0; k + 1 < errors.size(); ++k)
    pass = pass && errors[k + 1] <= 1.1 * errors[k] + 1e-12;
  note = fmt("|Y0 - 1/2| at N = 25..200: %.3g %.3g %.3g %.3g", errors[0],
             errors[1], errors[2], errors[3]);
  return pass;
}

// --------------------------------------------------------------------------
// 5. Direct solves agree with exponentially transformed solves mapped back.
// --------------------------------------------------------------------------
bool criterion_transform_round_trip(std::string& note) {
  double worst_ratio = 0.0;
  for (int s = 0; s < 10; ++s) {
    const CounterRng rng(5000 + s);
    const double horizon = 2e-5 + 6e-5 * rng.uniform(s, 0, 0);
    const int n = 8 + static_cast<int>(17.0 * rng.uniform(s, 1, 0));
    const double gamma = 0.5 + rng.uniform(s, 2, 0);
    const double c0 = 0.4 * rng.uniform(s, 3, 0);
    const double squeeze = 0.02 + 0.08 * rng.uniform(s, 4, 0);
    const bool contact = (s % 2) == 1;

    rbsde::ScenarioSpec sc;
    sc.driver = quadratic_driver(c0, gamma);
    sc.terminal = [](std::span<const double> b) { return b[0]; };
    sc.horizon = horizon;
    sc.envelope_a = [](double) { return 2.0; };
    if (contact) {
      // Barrier above the continuation everywhere: reflection is active at
      // every interior node on both sides of the transform.
      sc.barrier = [squeeze, horizon](double t, std::span<const double> b) {
        return b[0] + squeeze * (horizon - t) / horizon;
      };
    } else {
      sc.barrier = [squeeze, horizon](double t, std::span<const double> b) {
        return b[0] - squeeze * (1.0 + (horizon - t) / horizon);
      };
    }

    const rbsde::Lattice lat = rbsde::build_lattice(horizon, n);
    const rbsde::LatticeSolution direct =
        rbsde::solve_reflected_lattice(sc, lat);
    const rbsde::LatticeSolution transformed = rbsde::solve_reflected_lattice(
        rbsde::exponential_scenario(sc), lat);
    const rbsde::LatticeSolution back =
        rbsde::transform_back(transformed, gamma);

    double scale = 1.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j)
        scale = std::max(scale, 1.0 + std::abs(direct.y.at(i, j)));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double gap = std::abs(direct.y.at(i, j) - back.y.at(i, j));
        worst_ratio = std::max(worst_ratio, gap / (1e-9 * scale));
      }
  }
  note = fmt("worst node gap at %.3f of the 1e-9 scale allowance",
             worst_ratio);
  return worst_ratio <= 1.0;
}

// --------------------------------------------------------------------------
// 6. Driverless reflected solves equal the optimal-stopping oracle.
// --------------------------------------------------------------------------
bool criterion_snell_oracle(std::string& note) {
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 100);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const CounterRng rng(7700 + s);
    const double scale = 0.5 + 1.5 * rng.uniform(s, 0, 0);
    const double strike = 0.8 + 0.4 * rng.uniform(s, 1, 0);
    const double slope = 0.3 + 0.5 * rng.uniform(s, 2, 0);
    const double wobble = 0.2 * rng.uniform(s, 3, 0);
    const double freq = 1.0 + 3.0 * rng.uniform(s, 4, 0);
    const double drift = 2.0 * rng.uniform(s, 5, 0) - 1.0;
    const auto payoff = [=](double t, double b) {
      return scale * std::max(strike - std::exp(slope * b - 0.1 * t), 0.0) +
             wobble * std::cos(freq * b + drift * t) - wobble;
    };

    double sup_abs = 0.0;
    for (int i = 0; i <= lat.steps; ++i)
      for (int j = 0; j <= i; ++j)
        sup_abs = std::max(sup_abs,
                           std::abs(payoff(lat.time(i), lat.node(i, j))));

    rbsde::ScenarioSpec sc;
    sc.driver = zero_driver();
    sc.terminal = [payoff](std::span<const double> b) {
      return payoff(1.0, b[0]);
    };
    sc.barrier = [payoff](double t, std::span<const double> b) {
      return payoff(t, b[0]);
    };
    sc.envelope_a = [sup_abs](double) { return sup_abs + 1.0; };

    const rbsde::LatticeSolution sol = rbsde::solve_reflected_lattice(sc, lat);
    const rbsde::TriangularArray snell = harness::oracle_snell(
        lat, [&](int i, int j) { return payoff(lat.time(i), lat.node(i, j)); });
    for (int i = 0; i <= lat.steps; ++i)
      for (int j = 0; j <= i; ++j)
        worst = std::max(worst, std::abs(sol.y.at(i, j) - snell.at(i, j)));
  }
  note = fmt("worst node gap %.2e over 20 payoffs at N = 100", worst);
  return worst <= 1e-12;
}

// --------------------------------------------------------------------------
// 7. The a-priori log-moment bound dominates every shipped scenario.
// --------------------------------------------------------------------------
bool criterion_a_priori_bound(std::string& note) {
  double worst_slack = std::numeric_limits<double>::infinity();
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 64);
  const rbsde::TriangularArray probs = harness::node_probabilities(64);
  const auto theta_grid = make_grid(1.0, 20000);
  for (const SuiteEntry& entry : acceptance_suite()) {
    const rbsde::ScenarioSpec& sc = entry.scenario;
    const rbsde::LatticeSolution sol = rbsde::solve_reflected_lattice(sc, lat);
    const double y0 = sol.y.at(0, 0);

    const double a_T = sc.envelope_a(1.0);
    std::vector<bounds::WeightedSample> samples;
    for (int j = 0; j <= 64; ++j)
      samples.push_back({probs.at(64, j), sc.terminal1(lat.node(64, j))});

    const bounds::GrowthTransform H = bounds::build_H_linear(
        sc.driver.alpha, sc.driver.beta, sc.driver.gamma);
    bounds::ThetaFamily family(
        H, ScalarPath::sample(theta_grid, sc.envelope_a));
    const double bound = bounds::a_priori_bound(family, samples, a_T, 0);
    worst_slack =
        std::min(worst_slack, bound + 1e-8 * (1.0 + std::abs(y0)) - y0);
  }
  note = fmt("smallest bound slack %.3g over 5 scenarios", worst_slack);
  return worst_slack >= 0.0;
}

// --------------------------------------------------------------------------
// 8. Pairing residuals: exactly zero on the lattice, within noise for the
//    regression backend.
// --------------------------------------------------------------------------
bool criterion_pairing_residuals(std::string& note) {
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 64);
  const std::vector<SuiteEntry> suite = acceptance_suite();
  for (const SuiteEntry& entry : suite) {
    const rbsde::LatticeSolution sol =
        rbsde::solve_reflected_lattice(entry.scenario, lat);
    const double residual = harness::skorokhod_residual(
        sol, [&entry](double t, double b) {
          return entry.scenario.barrier1(t, b);
        });
    if (residual != 0.0) {
      note = "lattice residual is not exactly zero on " + entry.name;
      return false;
    }
  }
  const rbsde::ScenarioSpec& put = suite[2].scenario;
  const rbsde::RegressionSolution reg =
      rbsde::solve_reflected_regression(put, 100000, 50, 3, 2026);
  const harness::WeightedResidual wr = harness::skorokhod_residual(reg, put);
  note = fmt("lattice residuals 0.0; regression residual %.2e vs 3 SE %.2e",
             wr.value, 3.0 * wr.standard_error);
  return std::abs(wr.value) <= 3.0 * wr.standard_error;
}

// --------------------------------------------------------------------------
// 9. Randomized comparison suites: ordered data gives ordered solutions.
// --------------------------------------------------------------------------
bool criterion_comparison_suites(std::string& note) {
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 24);
  int asserted_failures = 0;
  int quadratic_observed = 0;
  for (int s = 1; s <= 100; ++s) {
    for (const harness::DriverClass cls :
         {harness::DriverClass::Lipschitz, harness::DriverClass::Linear,
          harness::DriverClass::QuadraticZ}) {
      const harness::OrderedScenarioPair pair =
          harness::random_ordered_pair(cls, static_cast<std::uint64_t>(s));
      const harness::ComparisonVerdict verdict =
          harness::comparison_suite(pair, lat);
      if (!verdict.passed) {
        if (verdict.asserted)
          ++asserted_failures;
        else
          ++quadratic_observed;
      }
    }
  }
  note = fmt("asserted violations %g/200; quadratic-z observed %g/100",
             asserted_failures, quadratic_observed);
  return asserted_failures == 0;
}

// --------------------------------------------------------------------------
// 10. Terminal truncation ladders rise monotonically to exact saturation.
// --------------------------------------------------------------------------
bool criterion_truncation(std::string& note) {
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 64);
  std::vector<double> levels;
  for (int v = 1; v <= 11; ++v) levels.push_back(static_cast<double>(v));
  for (const bool quadratic : {false, true}) {
    rbsde::ScenarioSpec sc;
    sc.driver = quadratic ? quadratic_driver(0.0, 1.0) : zero_driver();
    sc.terminal = [](std::span<const double> b) {
      return std::max(b[0] + 2.0, 0.0);
    };
    sc.barrier = [](double, std::span<const double>) { return -0.5; };
    sc.envelope_a = [](double) { return 0.75; };
    const rbsde::TruncationReport report =
        rbsde::truncate_terminal_sequence(sc, lat, levels);
    for (std::size_t v = 0; v + 1 < report.y0_values.size(); ++v) {
      if (report.y0_values[v] > report.y0_values[v + 1] + 1e-12 ||
          report.sup_gap_to_final[v + 1] >
              report.sup_gap_to_final[v] + 1e-12) {
        note = "ladder monotonicity failed";
        return false;
      }
    }
    if (!report.saturated_exactly || report.sup_gap_to_final.back() != 0.0) {
      note = "saturation is not exact";
      return false;
    }
  }
  note = "zero and quadratic drivers both saturate exactly at level 11";
  return true;
}

// --------------------------------------------------------------------------
// 11. Superlinear growth-transform constants match their analytic values.
// --------------------------------------------------------------------------
bool criterion_superlinear_constants(std::string& note) {
  bounds::SuperlinearGrowth growth;
  growth.h = [](double y) {
    return (y + std::exp(1.0)) * std::log(y + std::exp(1.0));
  };
  growth.gamma = 1.0;
  const bounds::GrowthTransform H = bounds::build_H_superlinear(growth);
  const double c0_err = std::abs(H.c0() - std::exp(1.0));
  const double p0_err = std::abs(H.p0() - 1.0);
  note = fmt("|c0 - e| = %.2e, |p0 - 1| = %.2e", c0_err, p0_err);
  return c0_err <= 1e-6 && p0_err <= 1e-6;
}

// --------------------------------------------------------------------------
// 12. The stopped z-energy certificate holds on every shipped scenario.
// --------------------------------------------------------------------------
bool criterion_energy_certificate(std::string& note) {
  const rbsde::Lattice lat = rbsde::build_lattice(1.0, 18);
  const double levels[] = {0.5, 1.0, 2.0, 5.0};
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const SuiteEntry& entry : acceptance_suite()) {
    const rbsde::ScenarioSpec& sc = entry.scenario;
    const rbsde::LatticeSolution sol = rbsde::solve_reflected_lattice(sc, lat);
    const rbsde::EnergyCertificate cert = rbsde::z_energy_certificate(
        sol, sc.driver.alpha, sc.driver.beta, sc.driver.gamma, levels);
    if (!cert.exact) {
      note = "expected exact path enumeration at N = 18";
      return false;
    }
    for (const rbsde::EnergyLevel& level : cert.levels)
      worst_slack = std::min(worst_slack, level.rhs - level.lhs);
  }
  note = fmt("smallest rhs - lhs slack %.3g over 5 scenarios x 4 levels",
             worst_slack);
  return worst_slack >= 0.0;
}

// --------------------------------------------------------------------------
// 13. Identical config and seed reproduce result.csv byte for byte.
// --------------------------------------------------------------------------
int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("rblab");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return rblab::cli::run(static_cast<int>(argv.size()), argv.data());
}

bool criterion_reproducibility(std::string& note) {
  using rblab::test::read_text_file;
  using rblab::test::TempDir;

  TempDir a, b;
  if (run_cli({"solve-rbsde", "--config", "configs/quadratic.json", "--out",
               a.str()}) != 0 ||
      run_cli({"solve-rbsde", "--config", "configs/quadratic.json", "--out",
               b.str()}) != 0) {
    note = "lattice runs did not exit cleanly";
    return false;
  }
  if (read_text_file(a.str("result.csv")) !=
      read_text_file(b.str("result.csv"))) {
    note = "lattice result.csv differs between identical runs";
    return false;
  }

  TempDir c, d;
  const std::vector<std::string> reg = {"solve-rbsde", "--config",
                                        "configs/american_put.json",
                                        "--backend", "regression"};
  auto with_out = [&reg](const std::string& out) {
    std::vector<std::string> args = reg;
    args.insert(args.end(), {"--out", out});
    return args;
  };
  if (run_cli(with_out(c.str())) != 0 || run_cli(with_out(d.str())) != 0) {
    note = "regression runs did not exit cleanly";
    return false;
  }
  if (read_text_file(c.str("result.csv")) !=
      read_text_file(d.str("result.csv"))) {
    note = "regression result.csv differs between identical runs";
    return false;
  }
  note = "lattice and regression artifacts are byte-identical";
  return true;
}

}  // namespace

int main() {
  int failures = 0;
  const auto run = [&failures](int id, const char* what, auto&& body) {
    std::string detail;
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("raised: ") + e.what();
      ok = false;
    }
    std::printf("[%s] %02d %s%s%s\n", ok ? "PASS" : "FAIL", id, what,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  };

  run(1, "randomized reflected-ODE solves agree across methods",
      criterion_cross_method);
  run(2, "linear-growth majorant equation matches its closed form",
      criterion_theta_closed_form);
  run(3, "driverless lattice martingale is exact", criterion_martingale_exact);
  run(4, "quadratic-driver closed form converges",
      criterion_quadratic_closed_form);
  run(5, "exponential transform round trip is consistent",
      criterion_transform_round_trip);
  run(6, "driverless solves equal the optimal-stopping oracle",
      criterion_snell_oracle);
  run(7, "a-priori log-moment bound dominates the shipped suite",
      criterion_a_priori_bound);
  run(8, "pairing residuals vanish on lattice and regression backends",
      criterion_pairing_residuals);
  run(9, "comparison suites hold with zero asserted violations",
      criterion_comparison_suites);
  run(10, "terminal truncation ladders rise to exact saturation",
      criterion_truncation);
  run(11, "superlinear growth-transform constants match the scan",
      criterion_superlinear_constants);
  run(12, "stopped z-energy certificate holds on the shipped suite",
      criterion_energy_certificate);
  run(13, "identical seeds reproduce artifacts byte for byte",
      criterion_reproducibility);

  if (failures == 0)
    std::printf("all 13 acceptance criteria passed\n");
  else
    std::printf("%d of 13 acceptance criteria failed\n", failures);
  return failures;
}
