#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rblab/time_grid.hpp"

namespace rblab::rbode {

enum class GrowthClass { Lipschitz, Linear, Superlinear };

/// Scalar coefficient y -> phi(y) together with its declared growth regime.
/// The declaration is trusted by the solvers and spot-checked on probe points.
struct Coefficient {
  std::function<double(double)> eval;
  GrowthClass growth_class = GrowthClass::Lipschitz;
  double mu = 0.0;    // Lipschitz modulus (Lipschitz class)
  double mu_l = 0.0;  // |phi(y)| <= mu_l (1 + |y|) (Linear class)
  std::function<double(double)> l0;  // dominating envelope (Superlinear class)
  bool monotone = false;

  static Coefficient lipschitz(std::function<double(double)> f, double mu,
                               bool monotone = false);
  static Coefficient linear(std::function<double(double)> f, double mu_l,
                            bool monotone = false);
  static Coefficient superlinear(std::function<double(double)> f,
                                 std::function<double(double)> l0,
                                 bool monotone = true);

  /// Probe the declared growth class on random points; throws on violation.
  void spot_check(std::uint64_t seed, int probes, double lo, double hi) const;
};

/// Terminal value x, coefficient phi and lower barrier l on a grid,
/// for y_t = x + int_t^T phi(y_s) ds + k_T - k_t with y >= l.
struct RbodeProblem {
  double terminal = 0.0;
  Coefficient coefficient;
  ScalarPath barrier;

  const TimeGrid& grid() const { return *barrier.grid; }
  void validate() const;         // barrier/terminal compatibility
  void validate_regime() const;  // strict barrier-band check: 0 < inf l <= 1 < sup l
};

enum class RbodeMethod { Representation, Picard, MonotoneMin, MonotoneMax, Superlinear };

struct RbodeSolution {
  ScalarPath y;
  ScalarPath k;   // nondecreasing, k_0 = 0
  RbodeMethod method = RbodeMethod::Representation;
  double residual = 0.0;  // max integral-equation defect under the grid quadrature
};

/// Scale-aware tolerances used across this module.
double defect_tol(double terminal, double sup_barrier_abs);
double contact_tol(double sup_barrier_abs);

/// Backward ODE u_t = terminal + int_t^{t_hi} phi(u_s) ds on grid points
/// [lo, hi], integrated with a classical 4-stage step per interval.  The
/// defect is estimated against a step-halved pass; one automatic halving
/// retry is applied before an accuracy error is raised.  Returns values on
/// the full index range [lo, hi] of `grid`.
std::vector<double> solve_backward_ode(const Coefficient& phi, double terminal,
                                       const TimeGrid& grid, std::size_t lo,
                                       std::size_t hi);

/// Reflected solve.  All methods realise the same grid dynamics
///   y_i = max(l_i, y_{i+1} + phi(y_{i+1}) dt_i),   y_N = x,
/// whose value at each point equals the running supremum of the one-sided
/// flows restarted from every later grid point (the two coincide whenever the
/// one-step maps are nondecreasing; the brute-force scan in the harness
/// re-derives the supremum form directly).
RbodeSolution solve_rbode(const RbodeProblem& problem, RbodeMethod method);

enum class ConvolutionDirection { Inf, Sup };

/// n-Lipschitz envelope of phi over [-box, box] by grid minimisation
/// (inf direction; sup mirrors it).  Attaining the optimum on the box edge
/// raises an error instead of silently truncating.
Coefficient lipschitz_regularize(const Coefficient& phi, double n,
                                 ConvolutionDirection dir, double box,
                                 double step);

/// Per-level reflected solves with regularized coefficients; used by the
/// monotone methods and exposed for stability experiments.
std::vector<RbodeSolution> monotone_family(const RbodeProblem& problem,
                                           ConvolutionDirection dir,
                                           std::span<const double> levels);

struct HittingTime {
  std::size_t index;  // first grid index >= t with y at the barrier, else N
  double time;
  double defect;      // |y_t - u_t| with u restarted from the hitting point
};

/// First-contact certificate: restart the unreflected recursion from the
/// hitting point and measure how far it lands from y_t.  Requires a
/// monotone coefficient.
HittingTime hitting_time_check(const RbodeSolution& solution,
                               const RbodeProblem& problem, std::size_t t_index);

/// Deterministic envelope v_t = b + int_t^T l0(v_s) ds.
ScalarPath growth_envelope(const std::function<double(double)>& l0, double b,
                           TimeGridPtr grid);

/// Clamp data for the superlinear method: smooth identity on [r, R],
/// constant outside [r/2, 2R].
struct TruncationPlan {
  double r = 0.0;
  double R = 0.0;
  double b = 0.0;        // envelope terminal value
  double barrier_inf = 0.0;
  ScalarPath envelope;   // v on the problem grid

  static TruncationPlan build(const RbodeProblem& problem);
  double rho(double x) const;
};

/// Largest complementarity product max_i (y_i - l_i) dk_i under the grid
/// quadrature; zero iff pushing only happens on the contact set.
double skorokhod_residual(const RbodeSolution& solution, const ScalarPath& barrier);

}  // namespace rblab::rbode
