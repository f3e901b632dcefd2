#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rblab/bounds.hpp"
#include "rblab/time_grid.hpp"

namespace rblab::rbsde {

enum class DriverKind { Zero, Constant, Linear, QuadraticZ, Custom, Transformed };
enum class CertificateKind { Linear, Superlinear, None };

/// Generator f(t, y, z) with its declared growth certificate
/// |f| <= alpha + beta |y| + (gamma/2) |z|^2, or the superlinear variant
/// |f| <= h(|y|) + (gamma/2) |z|^2.
struct DriverSpec {
  std::function<double(double, double, std::span<const double>)> eval;
  DriverKind kind = DriverKind::Custom;
  CertificateKind certificate = CertificateKind::Linear;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;
  bounds::SuperlinearGrowth growth;  // superlinear certificate only

  double eval1(double t, double y, double z) const {
    return eval(t, y, std::span<const double>(&z, 1));
  }

  /// Random probes of the growth certificate plus a coarse continuity probe
  /// (small input perturbations must not move f by order one).
  void spot_check(std::uint64_t seed, int probes, double y_box,
                  double z_box) const;
};

/// A full problem statement: driver, terminal map, barrier with its
/// deterministic envelope, horizon, and state dimension.
struct ScenarioSpec {
  DriverSpec driver;
  std::function<double(std::span<const double>)> terminal;
  std::function<double(double, std::span<const double>)> barrier;
  std::function<double(double)> envelope_a;
  double horizon = 1.0;
  int dimension = 1;

  double terminal1(double b) const {
    return terminal(std::span<const double>(&b, 1));
  }
  double barrier1(double t, double b) const {
    return barrier(t, std::span<const double>(&b, 1));
  }
};

/// Recombining binomial tree: node value (2j - i) sqrt(dt) at step i,
/// j = 0..i, both branches with probability 1/2.
struct Lattice {
  double horizon = 1.0;
  int steps = 1;
  double dt = 1.0;
  double sqrt_dt = 1.0;

  double node(int i, int j) const { return (2.0 * j - i) * sqrt_dt; }
  double time(int i) const;
  TimeGridPtr grid() const;
};

Lattice build_lattice(double horizon, int steps);

/// Dense lower-triangular storage for per-node lattice values.
class TriangularArray {
 public:
  TriangularArray() = default;
  explicit TriangularArray(int steps)
      : steps_(steps),
        data_(static_cast<std::size_t>(steps + 1) * (steps + 2) / 2, 0.0) {}

  double& at(int i, int j) { return data_[offset(i, j)]; }
  double at(int i, int j) const { return data_[offset(i, j)]; }
  int steps() const { return steps_; }

 private:
  std::size_t offset(int i, int j) const {
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }
  int steps_ = -1;
  std::vector<double> data_;
};

enum class DriverMode { Auto, Explicit, FixedPoint };

/// Lattice solve output.  y and cumulative conditional-mean k live on steps
/// 0..N; z and the per-node jumps dk on steps 0..N-1.  k_path along any
/// concrete path is the running sum of dk, which is nondecreasing by
/// construction; the node-indexed k shown here is its conditional mean.
struct LatticeSolution {
  Lattice lattice;
  TriangularArray y;
  TriangularArray z;
  TriangularArray dk;
  TriangularArray k;
  DriverMode mode = DriverMode::Auto;
};

LatticeSolution solve_reflected_lattice(const ScenarioSpec& scenario,
                                        const Lattice& lattice,
                                        DriverMode mode = DriverMode::Auto);

/// Regression Monte-Carlo solve output; arrays are path-major and
/// fixed-order, so runs are reproducible bit for bit.
struct RegressionSolution {
  TimeGridPtr grid;
  int dimension = 1;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> state;  // paths x (steps+1) x dimension
  std::vector<double> y;      // paths x (steps+1)
  std::vector<double> z;      // paths x steps x dimension
  std::vector<double> k;      // paths x (steps+1), per-path cumulative
  double y0 = 0.0;
  double y0_standard_error = 0.0;

  double state_at(std::size_t path, std::size_t step, int dim) const;
  double y_at(std::size_t path, std::size_t step) const;
  double z_at(std::size_t path, std::size_t step, int dim) const;
  double k_at(std::size_t path, std::size_t step) const;
};

RegressionSolution solve_reflected_regression(const ScenarioSpec& scenario,
                                              std::size_t paths, int steps,
                                              int basis_degree,
                                              std::uint64_t seed,
                                              DriverMode mode = DriverMode::Auto);

/// Exponential change of variables P = e^{gamma Y}, Q = gamma P Z,
/// dJ = gamma P dK, with the transformed generator
/// F(t,p,q) = 1_{p>0} (gamma p f(t, ln p / gamma, q/(gamma p)) - |q|^2/(2p)).
DriverSpec exponential_transform(const DriverSpec& driver, double gamma);

/// The fully transformed scenario: terminal e^{gamma xi}, barrier
/// e^{gamma L}, envelope e^{gamma a}, driver F.
ScenarioSpec exponential_scenario(const ScenarioSpec& scenario);

/// Map a solution of the transformed scenario back to original coordinates
/// via Y = (1/gamma) ln P, Z = Q / (gamma P), dK = dJ / (gamma P).
LatticeSolution transform_back(const LatticeSolution& p_solution,
                               double gamma);

/// Probe-point verification that the transformed generator is majorized by
/// the growth transform: F(t, p, q) <= H(p).  Returns the worst margin
/// rhs - lhs (negative means a violation was found).
double verify_majorization(const DriverSpec& transformed,
                           const bounds::GrowthTransform& H,
                           std::uint64_t seed, int probes, double p_hi,
                           double q_hi);

struct TruncationReport {
  std::vector<double> levels;
  std::vector<LatticeSolution> solutions;
  std::vector<double> y0_values;
  std::vector<double> sup_gap_to_final;  // sup-norm gap of y to the last level
  bool saturated_exactly = false;        // last level equals the untruncated solve
};

/// Solves with terminal xi ^ n for each level and verifies that y is
/// nondecreasing and the conditional-mean k nonincreasing across levels at
/// every node.
TruncationReport truncate_terminal_sequence(const ScenarioSpec& scenario,
                                            const Lattice& lattice,
                                            std::span<const double> levels,
                                            DriverMode mode = DriverMode::Auto);

struct LocalizationLevel {
  double m = 0.0;
  double fraction_hit = 0.0;  // probability the threshold is reached before T
  std::vector<double> hit_probability_per_step;
};

/// First-passage diagnostics of a node-indexed bound path over levels m:
/// exact forward survival recursion over the lattice.
std::vector<LocalizationLevel> localization_times(
    const TriangularArray& bound_path, const Lattice& lattice,
    std::span<const double> m_levels);

/// v(x) = (e^{gamma x} - 1 - gamma x) / gamma^2, the convex weight behind
/// the energy estimate.
double energy_weight(double x, double gamma);

struct EnergyLevel {
  double n = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double fraction_stopped = 0.0;  // paths with sigma_n < T
};

struct EnergyCertificate {
  std::vector<EnergyLevel> levels;
  bool exact = false;          // full path enumeration vs sampled paths
  std::size_t sample_paths = 0;
  std::uint64_t seed = 0;
};

/// Evaluates both sides of the stopped Z-energy estimate
///   (1/2) E[sum_{i < sigma_n} |Z|^2 dt]
///     <= E[(1/gamma^2) sup e^{gamma|Y|} + (1/gamma) sum e^{gamma|Y|}
///          (alpha + beta |Y|) dt]
///        + (1/gamma) sqrt(E[sup e^{2 gamma|Y|}]) sqrt(E[K_T^2])
/// with sup and sums over the stopped window.  Expectations are exact path
/// enumerations for N <= 22 and seeded path samples beyond; a violated level
/// raises a certificate error.
EnergyCertificate z_energy_certificate(const LatticeSolution& solution,
                                       double alpha, double beta, double gamma,
                                       std::span<const double> n_levels,
                                       std::uint64_t seed = 2026);

/// Assumption probes for a scenario on a concrete lattice: |L| <= a at every
/// node and L_T <= xi at every terminal node.  Violations abort the run.
void validate_scenario_on_lattice(const ScenarioSpec& scenario,
                                  const Lattice& lattice);

}  // namespace rblab::rbsde
