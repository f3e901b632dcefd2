#include "rblab/rbsde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "rblab/errors.hpp"
#include "rblab/rng.hpp"
#include "rbsde_detail.hpp"

namespace rblab::rbsde {

namespace {

constexpr const char* kModule = "rbsde";

double lerp_range(double lo, double hi, double u) { return lo + (hi - lo) * u; }

}  // namespace

void DriverSpec::spot_check(std::uint64_t seed, int probes, double y_box,
                            double z_box) const {
  if (!eval) {
    raise(ErrorKind::InvalidProblem, kModule, "spot_check",
          "driver has no evaluation function");
  }
  if (certificate == CertificateKind::None) return;
  CounterRng rng(seed);
  const double slack = 1e-9;
  for (int p = 0; p < probes; ++p) {
    const double t = rng.uniform(p, 0, 0);
    const double y = lerp_range(-y_box, y_box, rng.uniform(p, 0, 1));
    const double z = lerp_range(-z_box, z_box, rng.uniform(p, 0, 2));
    const double fv = eval1(t, y, z);
    double bound = 0.0;
    if (certificate == CertificateKind::Linear) {
      bound = alpha + beta * std::abs(y) + 0.5 * gamma * z * z;
    } else {
      bound = growth.h(std::abs(y)) + 0.5 * growth.gamma * z * z;
    }
    if (std::abs(fv) > bound + slack * (1.0 + bound)) {
      raise(ErrorKind::CertificateFailure, kModule, "spot_check",
            "driver exceeds its growth certificate at y = " +
                std::to_string(y) + ", z = " + std::to_string(z));
    }
    const double eps = 1e-6;
    const double fy = eval1(t, y + eps, z);
    const double fz = eval1(t, y, z + eps);
    const double wiggle = 1e-2 * (1.0 + std::abs(fv));
    if (!std::isfinite(fy) || !std::isfinite(fz) ||
        std::abs(fy - fv) > wiggle || std::abs(fz - fv) > wiggle) {
      raise(ErrorKind::CertificateFailure, kModule, "spot_check",
            "driver fails the small-perturbation continuity probe at y = " +
                std::to_string(y));
    }
  }
}

double Lattice::time(int i) const {
  return horizon * static_cast<double>(i) / static_cast<double>(steps);
}

TimeGridPtr Lattice::grid() const {
  return make_grid(horizon, static_cast<std::size_t>(steps));
}

Lattice build_lattice(double horizon, int steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    raise(ErrorKind::InvalidProblem, kModule, "build_lattice",
          "horizon must be positive and finite");
  }
  if (steps < 1) {
    raise(ErrorKind::InvalidProblem, kModule, "build_lattice",
          "step count must be at least 1");
  }
  Lattice lat;
  lat.horizon = horizon;
  lat.steps = steps;
  lat.dt = horizon / static_cast<double>(steps);
  lat.sqrt_dt = std::sqrt(lat.dt);
  return lat;
}

void validate_scenario_on_lattice(const ScenarioSpec& scenario,
                                  const Lattice& lattice) {
  if (!scenario.driver.eval || !scenario.terminal || !scenario.barrier ||
      !scenario.envelope_a) {
    raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
          "scenario is missing one of driver, terminal, barrier, envelope");
  }
  if (scenario.dimension != 1) {
    raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
          "the lattice backend handles dimension 1 only");
  }
  if (std::abs(scenario.horizon - lattice.horizon) >
      1e-12 * (1.0 + std::abs(scenario.horizon))) {
    raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
          "scenario horizon does not match the lattice horizon");
  }
  const int n = lattice.steps;
  for (int i = 0; i <= n; ++i) {
    const double t = lattice.time(i);
    const double a_t = scenario.envelope_a(t);
    if (!std::isfinite(a_t)) {
      raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
            "envelope is non-finite at t = " + std::to_string(t));
    }
    for (int j = 0; j <= i; ++j) {
      const double b = lattice.node(i, j);
      const double barrier = scenario.barrier1(t, b);
      if (!std::isfinite(barrier)) {
        raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
              "barrier is non-finite at a lattice node");
      }
      if (std::abs(barrier) > a_t + 1e-12 * (1.0 + std::abs(a_t))) {
        raise(ErrorKind::AssumptionViolation, kModule, "validate_scenario",
              "|barrier| exceeds its envelope at step " + std::to_string(i) +
                  ", node " + std::to_string(j));
      }
      if (i == n) {
        const double xi = scenario.terminal1(b);
        if (!std::isfinite(xi)) {
          raise(ErrorKind::InvalidProblem, kModule, "validate_scenario",
                "terminal value is non-finite at a lattice node");
        }
        if (barrier > xi + 1e-12 * (1.0 + std::abs(xi))) {
          raise(ErrorKind::AssumptionViolation, kModule, "validate_scenario",
                "terminal barrier exceeds the terminal value at node " +
                    std::to_string(j));
        }
      }
    }
  }
}

namespace {

/// Conditional-mean cumulative pushing process from per-node jumps, using
/// the exact parent weights j/(i+1) and (i+1-j)/(i+1).
TriangularArray accumulate_conditional_k(const TriangularArray& dk, int n) {
  TriangularArray k(n);
  k.at(0, 0) = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i + 1; ++j) {
      double acc = 0.0;
      if (j >= 1) {
        const double w = static_cast<double>(j) / static_cast<double>(i + 1);
        acc += w * (k.at(i, j - 1) + dk.at(i, j - 1));
      }
      if (j <= i) {
        const double w =
            static_cast<double>(i + 1 - j) / static_cast<double>(i + 1);
        acc += w * (k.at(i, j) + dk.at(i, j));
      }
      k.at(i + 1, j) = acc;
    }
  }
  return k;
}

}  // namespace

LatticeSolution solve_reflected_lattice(const ScenarioSpec& scenario,
                                        const Lattice& lattice,
                                        DriverMode mode) {
  validate_scenario_on_lattice(scenario, lattice);
  const DriverMode effective = detail::resolve_mode(scenario.driver, mode);
  const int n = lattice.steps;
  const double dt = lattice.dt;

  LatticeSolution sol;
  sol.lattice = lattice;
  sol.mode = effective;
  sol.y = TriangularArray(n);
  sol.z = TriangularArray(n - 1);
  sol.dk = TriangularArray(n - 1);

  for (int j = 0; j <= n; ++j) {
    sol.y.at(n, j) = scenario.terminal1(lattice.node(n, j));
  }
  for (int i = n - 1; i >= 0; --i) {
    const double t = lattice.time(i);
    for (int j = 0; j <= i; ++j) {
      const double up = sol.y.at(i + 1, j + 1);
      const double down = sol.y.at(i + 1, j);
      const double zv = (up - down) / (2.0 * lattice.sqrt_dt);
      const double mean = 0.5 * (up + down);
      const double barrier = scenario.barrier1(t, lattice.node(i, j));
      const double c = detail::continuation_value(
          scenario.driver, effective, t, mean,
          std::span<const double>(&zv, 1), barrier, dt);
      if (!std::isfinite(c)) {
        raise(ErrorKind::Overflow, kModule, "solve_reflected_lattice",
              "non-finite value at step " + std::to_string(i) + ", node " +
                  std::to_string(j));
      }
      sol.z.at(i, j) = zv;
      sol.y.at(i, j) = std::max(barrier, c);
      sol.dk.at(i, j) = sol.y.at(i, j) - c;
    }
  }
  sol.k = accumulate_conditional_k(sol.dk, n);
  return sol;
}

DriverSpec exponential_transform(const DriverSpec& driver, double gamma) {
  if (!driver.eval) {
    raise(ErrorKind::InvalidProblem, kModule, "exponential_transform",
          "driver has no evaluation function");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    raise(ErrorKind::InvalidProblem, kModule, "exponential_transform",
          "gamma must be positive and finite");
  }
  const double cert_gamma = driver.certificate == CertificateKind::Superlinear
                                ? driver.growth.gamma
                                : driver.gamma;
  if (driver.certificate != CertificateKind::None &&
      std::abs(gamma - cert_gamma) > 1e-12 * (1.0 + std::abs(gamma))) {
    raise(ErrorKind::InvalidProblem, kModule, "exponential_transform",
          "gamma does not match the driver certificate");
  }
  const auto f = driver.eval;
  DriverSpec out;
  out.kind = DriverKind::Transformed;
  out.certificate = CertificateKind::None;
  out.gamma = gamma;
  out.eval = [f, gamma](double t, double p, std::span<const double> q) {
    if (!(p > 0.0)) return 0.0;
    std::array<double, 16> zbuf;
    std::vector<double> zheap;
    double* zs = zbuf.data();
    if (q.size() > zbuf.size()) {
      zheap.resize(q.size());
      zs = zheap.data();
    }
    double q2 = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      q2 += q[k] * q[k];
      zs[k] = q[k] / (gamma * p);
    }
    const double y = std::log(p) / gamma;
    return gamma * p * f(t, y, std::span<const double>(zs, q.size())) -
           q2 / (2.0 * p);
  };
  return out;
}

ScenarioSpec exponential_scenario(const ScenarioSpec& scenario) {
  const double gamma =
      scenario.driver.certificate == CertificateKind::Superlinear
          ? scenario.driver.growth.gamma
          : scenario.driver.gamma;
  ScenarioSpec out;
  out.driver = exponential_transform(scenario.driver, gamma);
  const auto xi = scenario.terminal;
  const auto barrier = scenario.barrier;
  const auto envelope = scenario.envelope_a;
  out.terminal = [xi, gamma](std::span<const double> s) {
    return std::exp(gamma * xi(s));
  };
  out.barrier = [barrier, gamma](double t, std::span<const double> s) {
    return std::exp(gamma * barrier(t, s));
  };
  out.envelope_a = [envelope, gamma](double t) {
    return std::exp(gamma * envelope(t));
  };
  out.horizon = scenario.horizon;
  out.dimension = scenario.dimension;
  return out;
}

LatticeSolution transform_back(const LatticeSolution& p_solution,
                               double gamma) {
  if (!(gamma > 0.0)) {
    raise(ErrorKind::InvalidProblem, kModule, "transform_back",
          "gamma must be positive");
  }
  const int n = p_solution.lattice.steps;
  LatticeSolution out;
  out.lattice = p_solution.lattice;
  out.mode = p_solution.mode;
  out.y = TriangularArray(n);
  out.z = TriangularArray(n - 1);
  out.dk = TriangularArray(n - 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double p = p_solution.y.at(i, j);
      if (!(p > 0.0)) {
        raise(ErrorKind::InvalidProblem, kModule, "transform_back",
              "transformed solution left the positive cone at step " +
                  std::to_string(i));
      }
      out.y.at(i, j) = std::log(p) / gamma;
      if (i < n) {
        out.z.at(i, j) = p_solution.z.at(i, j) / (gamma * p);
        out.dk.at(i, j) = p_solution.dk.at(i, j) / (gamma * p);
      }
    }
  }
  out.k = accumulate_conditional_k(out.dk, n);
  return out;
}

double verify_majorization(const DriverSpec& transformed,
                           const bounds::GrowthTransform& H,
                           std::uint64_t seed, int probes, double p_hi,
                           double q_hi) {
  if (!transformed.eval) {
    raise(ErrorKind::InvalidProblem, kModule, "verify_majorization",
          "driver has no evaluation function");
  }
  CounterRng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    const double t = rng.uniform(i, 0, 0);
    const double p = p_hi * std::max(1e-12, rng.uniform(i, 0, 1));
    const double q = lerp_range(-q_hi, q_hi, rng.uniform(i, 0, 2));
    const double margin = H(p) - transformed.eval1(t, p, q);
    worst = std::min(worst, margin);
  }
  return worst;
}

TruncationReport truncate_terminal_sequence(const ScenarioSpec& scenario,
                                            const Lattice& lattice,
                                            std::span<const double> levels,
                                            DriverMode mode) {
  if (levels.empty()) {
    raise(ErrorKind::InvalidProblem, kModule, "truncate_terminal_sequence",
          "need at least one truncation level");
  }
  const double a_T = scenario.envelope_a(scenario.horizon);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      raise(ErrorKind::InvalidProblem, kModule, "truncate_terminal_sequence",
            "levels must be strictly increasing");
    }
    if (levels[i] < a_T) {
      raise(ErrorKind::InvalidProblem, kModule, "truncate_terminal_sequence",
            "every level must be at least the terminal envelope value");
    }
  }

  TruncationReport report;
  report.levels.assign(levels.begin(), levels.end());
  const auto xi = scenario.terminal;
  for (double level : levels) {
    ScenarioSpec snap = scenario;
    snap.terminal = [xi, level](std::span<const double> s) {
      return std::min(xi(s), level);
    };
    report.solutions.push_back(solve_reflected_lattice(snap, lattice, mode));
    report.y0_values.push_back(report.solutions.back().y.at(0, 0));
  }

  const int n = lattice.steps;
  double scale = 1.0;
  for (const LatticeSolution& s : report.solutions) {
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        scale = std::max(scale, std::abs(s.y.at(i, j)));
      }
    }
  }
  const double tol = 1e-12 * scale;
  for (std::size_t v = 0; v + 1 < report.solutions.size(); ++v) {
    const LatticeSolution& low = report.solutions[v];
    const LatticeSolution& high = report.solutions[v + 1];
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        if (low.y.at(i, j) > high.y.at(i, j) + tol) {
          raise(ErrorKind::InvariantFailure, kModule,
                "truncate_terminal_sequence",
                "y is not nondecreasing across levels at step " +
                    std::to_string(i) + ", node " + std::to_string(j));
        }
        if (low.k.at(i, j) < high.k.at(i, j) - tol) {
          raise(ErrorKind::InvariantFailure, kModule,
                "truncate_terminal_sequence",
                "k is not nonincreasing across levels at step " +
                    std::to_string(i) + ", node " + std::to_string(j));
        }
      }
    }
  }

  const LatticeSolution& final_sol = report.solutions.back();
  for (const LatticeSolution& s : report.solutions) {
    double gap = 0.0;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= i; ++j) {
        gap = std::max(gap, std::abs(s.y.at(i, j) - final_sol.y.at(i, j)));
      }
    }
    report.sup_gap_to_final.push_back(gap);
  }

  const LatticeSolution untruncated =
      solve_reflected_lattice(scenario, lattice, mode);
  bool exact = true;
  for (int i = 0; i <= n && exact; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (final_sol.y.at(i, j) != untruncated.y.at(i, j)) {
        exact = false;
        break;
      }
    }
  }
  report.saturated_exactly = exact;
  return report;
}

std::vector<LocalizationLevel> localization_times(
    const TriangularArray& bound_path, const Lattice& lattice,
    std::span<const double> m_levels) {
  const int n = lattice.steps;
  if (bound_path.steps() < n) {
    raise(ErrorKind::InvalidProblem, kModule, "localization_times",
          "bound path does not cover the lattice");
  }
  std::vector<LocalizationLevel> out;
  for (double m : m_levels) {
    LocalizationLevel level;
    level.m = m;
    level.hit_probability_per_step.assign(n + 1, 0.0);
    std::vector<double> survive(1, 0.0);
    if (bound_path.at(0, 0) >= m) {
      level.hit_probability_per_step[0] = 1.0;
    } else {
      survive[0] = 1.0;
    }
    for (int i = 0; i < n; ++i) {
      std::vector<double> next(i + 2, 0.0);
      for (int j = 0; j <= i + 1; ++j) {
        double inflow = 0.0;
        if (j >= 1) inflow += 0.5 * survive[j - 1];
        if (j <= i) inflow += 0.5 * survive[j];
        if (inflow == 0.0) continue;
        if (bound_path.at(i + 1, j) >= m) {
          level.hit_probability_per_step[i + 1] += inflow;
        } else {
          next[j] = inflow;
        }
      }
      survive.swap(next);
    }
    double hit = 0.0;
    for (double h : level.hit_probability_per_step) hit += h;
    level.fraction_hit = hit;
    out.push_back(std::move(level));
  }
  return out;
}

double energy_weight(double x, double gamma) {
  return (std::exp(gamma * x) - 1.0 - gamma * x) / (gamma * gamma);
}

EnergyCertificate z_energy_certificate(const LatticeSolution& solution,
                                       double alpha, double beta, double gamma,
                                       std::span<const double> n_levels,
                                       std::uint64_t seed) {
  if (!(gamma > 0.0) || !(alpha >= 0.0) || !(beta >= 0.0)) {
    raise(ErrorKind::InvalidProblem, kModule, "z_energy_certificate",
          "need alpha >= 0, beta >= 0, gamma > 0");
  }
  const int n = solution.lattice.steps;
  const double dt = solution.lattice.dt;
  const bool exact = n <= 22;
  const std::size_t paths = exact ? (std::size_t{1} << n) : 200000;
  const double weight = 1.0 / static_cast<double>(paths);
  CounterRng rng(seed);

  EnergyCertificate cert;
  cert.exact = exact;
  cert.sample_paths = paths;
  cert.seed = seed;

  for (double level : n_levels) {
    double e_lhs = 0.0, e_sup_a = 0.0, e_sum_b = 0.0, e_sup2 = 0.0;
    double e_kt2 = 0.0, stopped_fraction = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
      int j = 0;
      double running = 0.0;
      double lhs_sum = 0.0, sup_a = 0.0, sum_b = 0.0, sup2 = 0.0, k_t = 0.0;
      bool stopped = false;
      for (int i = 0; i <= n; ++i) {
        const double yv = solution.y.at(i, j);
        const double ey = std::exp(gamma * std::abs(yv));
        if (!stopped) {
          sup_a = std::max(sup_a, ey);
          sup2 = std::max(sup2, ey * ey);
        }
        if (i == n) break;
        if (!stopped && running >= level) {
          stopped = true;
          stopped_fraction += weight;
        }
        if (!stopped) {
          const double zv = solution.z.at(i, j);
          lhs_sum += zv * zv * dt;
          sum_b += ey * (alpha + beta * std::abs(yv)) * dt;
          running += ey * ey * zv * zv * dt;
        }
        k_t += solution.dk.at(i, j);
        const bool up = exact ? ((p >> i) & 1u) != 0 : rng.flip(p, i);
        if (up) ++j;
      }
      e_lhs += weight * 0.5 * lhs_sum;
      e_sup_a += weight * sup_a;
      e_sum_b += weight * sum_b;
      e_sup2 += weight * sup2;
      e_kt2 += weight * k_t * k_t;
    }
    EnergyLevel rec;
    rec.n = level;
    rec.lhs = e_lhs;
    rec.rhs = e_sup_a / (gamma * gamma) + e_sum_b / gamma +
              std::sqrt(e_sup2) * std::sqrt(e_kt2) / gamma;
    rec.fraction_stopped = stopped_fraction;
    const double tol = (exact ? 1e-12 : 1e-3) * (1.0 + std::abs(rec.rhs));
    if (rec.lhs > rec.rhs + tol) {
      raise(ErrorKind::CertificateFailure, kModule, "z_energy_certificate",
            "energy estimate violated at level n = " + std::to_string(level));
    }
    cert.levels.push_back(rec);
  }
  return cert;
}

}  // namespace rblab::rbsde
