#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rblab/errors.hpp"
#include "rblab/rbsde.hpp"
#include "rblab/rng.hpp"
#include "rbsde_detail.hpp"

namespace rblab::rbsde {

namespace {

constexpr const char* kModule = "rbsde";

/// Exponent tuples of the monomial basis with total degree <= degree, in a
/// fixed deterministic order (by total degree, then lexicographic).
std::vector<std::vector<int>> monomial_exponents(int dimension, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(dimension, 0);
  const auto emit = [&](auto&& self, int dim, int remaining) -> void {
    if (dim == dimension) {
      if (remaining == 0) out.push_back(current);
      return;
    }
    for (int e = 0; e <= remaining; ++e) {
      current[dim] = e;
      self(self, dim + 1, remaining - e);
    }
    current[dim] = 0;
  };
  for (int total = 0; total <= degree; ++total) emit(emit, 0, total);
  return out;
}

void eval_features(const std::vector<std::vector<int>>& exps,
                   std::span<const double> state, std::vector<double>& out) {
  for (std::size_t m = 0; m < exps.size(); ++m) {
    double v = 1.0;
    for (std::size_t d = 0; d < exps[m].size(); ++d) {
      for (int e = 0; e < exps[m][d]; ++e) v *= state[d];
    }
    out[m] = v;
  }
}

/// In-place Cholesky solve of A x = b for several right-hand sides.  A must
/// be symmetric positive definite, which the ridge shift guarantees for any
/// finite design; a non-positive pivot therefore means the basis itself
/// produced non-finite or absurd columns.
void cholesky_solve(std::vector<double>& a, std::size_t m,
                    std::vector<std::vector<double>>& rhs) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) {
          raise(ErrorKind::Basis, kModule, "solve_reflected_regression",
                "regression normal equations lost positive definiteness; "
                "the feature basis is unusable on these states");
        }
        a[i * m + i] = std::sqrt(s);
      } else {
        a[i * m + j] = s / a[j * m + j];
      }
    }
  }
  for (auto& b : rhs) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= a[i * m + k] * b[k];
      b[i] = s / a[i * m + i];
    }
    for (std::size_t i = m; i-- > 0;) {
      double s = b[i];
      for (std::size_t k = i + 1; k < m; ++k) s -= a[k * m + i] * b[k];
      b[i] = s / a[i * m + i];
    }
  }
}

}  // namespace

double RegressionSolution::state_at(std::size_t path, std::size_t step,
                                    int dim) const {
  const std::size_t n = grid->steps();
  return state[(path * (n + 1) + step) * dimension + dim];
}

double RegressionSolution::y_at(std::size_t path, std::size_t step) const {
  return y[path * (grid->steps() + 1) + step];
}

double RegressionSolution::z_at(std::size_t path, std::size_t step,
                                int dim) const {
  return z[(path * grid->steps() + step) * dimension + dim];
}

double RegressionSolution::k_at(std::size_t path, std::size_t step) const {
  return k[path * (grid->steps() + 1) + step];
}

RegressionSolution solve_reflected_regression(const ScenarioSpec& scenario,
                                              std::size_t paths, int steps,
                                              int basis_degree,
                                              std::uint64_t seed,
                                              DriverMode mode) {
  if (!scenario.driver.eval || !scenario.terminal || !scenario.barrier ||
      !scenario.envelope_a) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_reflected_regression",
          "scenario is missing one of driver, terminal, barrier, envelope");
  }
  const int d = scenario.dimension;
  if (d < 1) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_reflected_regression",
          "dimension must be at least 1");
  }
  if (steps < 1 || basis_degree < 0) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_reflected_regression",
          "need steps >= 1 and a nonnegative basis degree");
  }
  const std::size_t min_paths =
      10u * static_cast<std::size_t>(basis_degree + 1) *
      static_cast<std::size_t>(basis_degree + 1);
  if (paths < std::max<std::size_t>(min_paths, 2)) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_reflected_regression",
          "need at least " + std::to_string(std::max<std::size_t>(min_paths, 2)) +
              " paths for basis degree " + std::to_string(basis_degree));
  }

  const DriverMode effective = detail::resolve_mode(scenario.driver, mode);
  const std::size_t n = static_cast<std::size_t>(steps);
  const double horizon = scenario.horizon;
  const double dt = horizon / static_cast<double>(n);
  const double sqrt_dt = std::sqrt(dt);

  RegressionSolution sol;
  sol.grid = make_grid(horizon, n);
  sol.dimension = d;
  sol.paths = paths;
  sol.seed = seed;
  sol.state.assign(paths * (n + 1) * d, 0.0);
  sol.y.assign(paths * (n + 1), 0.0);
  sol.z.assign(paths * n * d, 0.0);
  sol.k.assign(paths * (n + 1), 0.0);

  CounterRng rng(seed);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int dim = 0; dim < d; ++dim) {
        const double db = rng.normal(p, i, static_cast<std::uint64_t>(dim)) *
                          sqrt_dt;
        sol.state[(p * (n + 1) + i + 1) * d + dim] =
            sol.state[(p * (n + 1) + i) * d + dim] + db;
      }
    }
  }

  // Assumption probes on the sampled states; also seeds the terminal slice.
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = sol.grid->point(i);
      std::span<const double> s(&sol.state[(p * (n + 1) + i) * d],
                                static_cast<std::size_t>(d));
      const double barrier = scenario.barrier(t, s);
      const double a_t = scenario.envelope_a(t);
      if (std::abs(barrier) > a_t + 1e-12 * (1.0 + std::abs(a_t))) {
        raise(ErrorKind::AssumptionViolation, kModule,
              "solve_reflected_regression",
              "|barrier| exceeds its envelope on a sampled state at t = " +
                  std::to_string(t));
      }
      if (i == n) {
        const double xi = scenario.terminal(s);
        if (!std::isfinite(xi)) {
          raise(ErrorKind::InvalidProblem, kModule,
                "solve_reflected_regression",
                "terminal value is non-finite on a sampled state");
        }
        if (barrier > xi + 1e-12 * (1.0 + std::abs(xi))) {
          raise(ErrorKind::AssumptionViolation, kModule,
                "solve_reflected_regression",
                "terminal barrier exceeds the terminal value on a sampled "
                "state");
        }
        sol.y[p * (n + 1) + n] = xi;
      }
    }
  }

  const std::vector<std::vector<int>> exps =
      monomial_exponents(d, basis_degree);
  const std::size_t m = exps.size();
  std::vector<double> feats(m);
  std::vector<double> gram(m * m);
  std::vector<std::vector<double>> coeffs(1 + static_cast<std::size_t>(d),
                                          std::vector<double>(m));
  std::vector<double> cont(paths);
  std::vector<double> zproj(paths * d);

  for (std::size_t i = n; i-- > 0;) {
    const double t = sol.grid->point(i);
    if (i == 0) {
      // Every path starts at the same state, so the conditional expectation
      // degenerates to a plain mean and the design matrix would be rank one.
      double mean_y = 0.0;
      std::vector<double> mean_z(d, 0.0);
      for (std::size_t p = 0; p < paths; ++p) {
        const double y_next = sol.y[p * (n + 1) + 1];
        mean_y += y_next;
        for (int dim = 0; dim < d; ++dim) {
          const double db = sol.state[(p * (n + 1) + 1) * d + dim] -
                            sol.state[(p * (n + 1)) * d + dim];
          mean_z[dim] += y_next * db / dt;
        }
      }
      mean_y /= static_cast<double>(paths);
      for (int dim = 0; dim < d; ++dim) {
        mean_z[dim] /= static_cast<double>(paths);
      }
      for (std::size_t p = 0; p < paths; ++p) {
        cont[p] = mean_y;
        for (int dim = 0; dim < d; ++dim) zproj[p * d + dim] = mean_z[dim];
      }
      double var = 0.0;
      for (std::size_t p = 0; p < paths; ++p) {
        const double diff = sol.y[p * (n + 1) + 1] - mean_y;
        var += diff * diff;
      }
      sol.y0_standard_error =
          std::sqrt(var / static_cast<double>(paths - 1)) /
          std::sqrt(static_cast<double>(paths));
    } else {
      std::fill(gram.begin(), gram.end(), 0.0);
      for (auto& c : coeffs) std::fill(c.begin(), c.end(), 0.0);
      for (std::size_t p = 0; p < paths; ++p) {
        std::span<const double> s(&sol.state[(p * (n + 1) + i) * d],
                                  static_cast<std::size_t>(d));
        eval_features(exps, s, feats);
        const double y_next = sol.y[p * (n + 1) + i + 1];
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c <= r; ++c) {
            gram[r * m + c] += feats[r] * feats[c];
          }
          coeffs[0][r] += feats[r] * y_next;
          for (int dim = 0; dim < d; ++dim) {
            const double db = sol.state[(p * (n + 1) + i + 1) * d + dim] -
                              sol.state[(p * (n + 1) + i) * d + dim];
            coeffs[1 + dim][r] += feats[r] * y_next * db / dt;
          }
        }
      }
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = r + 1; c < m; ++c) {
          gram[r * m + c] = gram[c * m + r];
        }
        gram[r * m + r] += 1e-10;
      }
      cholesky_solve(gram, m, coeffs);
      for (std::size_t p = 0; p < paths; ++p) {
        std::span<const double> s(&sol.state[(p * (n + 1) + i) * d],
                                  static_cast<std::size_t>(d));
        eval_features(exps, s, feats);
        double c = 0.0;
        for (std::size_t r = 0; r < m; ++r) c += coeffs[0][r] * feats[r];
        cont[p] = c;
        for (int dim = 0; dim < d; ++dim) {
          double zv = 0.0;
          for (std::size_t r = 0; r < m; ++r) {
            zv += coeffs[1 + dim][r] * feats[r];
          }
          zproj[p * d + dim] = zv;
        }
      }
    }

    for (std::size_t p = 0; p < paths; ++p) {
      std::span<const double> s(&sol.state[(p * (n + 1) + i) * d],
                                static_cast<std::size_t>(d));
      std::span<const double> zrow(&zproj[p * d], static_cast<std::size_t>(d));
      const double barrier = scenario.barrier(t, s);
      const double c = detail::continuation_value(scenario.driver, effective,
                                                  t, cont[p], zrow, barrier,
                                                  dt);
      if (!std::isfinite(c)) {
        raise(ErrorKind::Overflow, kModule, "solve_reflected_regression",
              "non-finite value at step " + std::to_string(i));
      }
      const double y_here = std::max(barrier, c);
      sol.y[p * (n + 1) + i] = y_here;
      for (int dim = 0; dim < d; ++dim) {
        sol.z[(p * n + i) * d + dim] = zrow[dim];
      }
      // Park the jump in the k slot; the forward pass below accumulates it.
      sol.k[p * (n + 1) + i + 1] = y_here - c;
    }
  }

  for (std::size_t p = 0; p < paths; ++p) {
    sol.k[p * (n + 1)] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sol.k[p * (n + 1) + i + 1] += sol.k[p * (n + 1) + i];
    }
  }
  sol.y0 = sol.y[0];
  return sol;
}

}  // namespace rblab::rbsde
