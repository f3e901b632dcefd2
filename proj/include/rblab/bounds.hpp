#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "rblab/time_grid.hpp"

namespace rblab::bounds {

/// Superlinear growth data: h nondecreasing and convex on [0, inf) with
/// h(0) > 0, paired with the quadratic-term weight gamma.
struct SuperlinearGrowth {
  std::function<double(double)> h;
  double gamma = 1.0;

  /// Probe-grid validation: positivity at 0, monotonicity, midpoint
  /// convexity, and a boundedness certificate for e^{-gamma y} h(y) scanned
  /// up to y = 50 / gamma (a still-rising trend at the scan edge fails).
  void validate() const;
};

/// The deterministic majorant H used by the theta equation, in its linear
/// flavor H(p) = p(alpha gamma + beta ln p) for p >= 1 and gamma alpha below,
/// or the superlinear flavor gamma p h(ln p / gamma) above p0 and c0 below.
class GrowthTransform {
 public:
  enum class Flavor { Linear, Superlinear };

  double operator()(double p) const;

  Flavor flavor() const { return flavor_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double c0() const { return c0_; }
  double p0() const { return p0_; }

  friend GrowthTransform build_H_linear(double alpha, double beta,
                                        double gamma, bool strict_regime);
  friend GrowthTransform build_H_superlinear(const SuperlinearGrowth& growth,
                                             double scan_step);

 private:
  Flavor flavor_ = Flavor::Linear;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double gamma_ = 1.0;
  std::function<double(double)> h_;
  double c0_ = 0.0;
  double p0_ = 1.0;
};

/// Linear flavor; strict_regime additionally enforces alpha >= beta / gamma.
GrowthTransform build_H_linear(double alpha, double beta, double gamma,
                               bool strict_regime = false);

/// Superlinear flavor; c0 is the scanned supremum of gamma p h(-ln p / gamma)
/// over (0, 1) together with its analytic limit gamma h(0) at p -> 1, and p0
/// the first p >= 1 where gamma p h(ln p / gamma) reaches c0.
GrowthTransform build_H_superlinear(const SuperlinearGrowth& growth,
                                    double scan_step = 1e-5);

/// Reflected solve of theta_t = e^{gamma x} + int_t^T H(theta_s) ds with
/// theta >= e^{gamma a_t}.
struct ThetaSolution {
  ScalarPath theta;
  ScalarPath k;
  double terminal_x = 0.0;
  ScalarPath barrier_a;
  double residual = 0.0;
};

ThetaSolution solve_theta(double x, const GrowthTransform& transform,
                          const ScalarPath& a);

/// Memoized theta solves over terminal values, with an optional monotone
/// cubic interpolation table for continuum terminals.  Uniform x spacing is
/// log-spacing of theta itself, since ln theta is affine in x along the
/// unreflected flow.
class ThetaFamily {
 public:
  ThetaFamily(GrowthTransform transform, ScalarPath a);

  const ThetaSolution& solve_for(double x);
  double theta(double x, std::size_t t_index);

  void build_table(double x_lo, double x_hi, std::size_t nodes);
  bool has_table() const { return !table_xs_.empty(); }
  double theta_interpolated(double x, std::size_t t_index) const;

  const GrowthTransform& transform() const { return transform_; }
  const ScalarPath& barrier_a() const { return a_; }

 private:
  GrowthTransform transform_;
  ScalarPath a_;
  std::map<double, ThetaSolution> solved_;
  std::vector<double> table_xs_;
  // One row per grid time: log-theta values and monotone slopes per x node.
  std::vector<std::vector<double>> table_log_theta_;
  std::vector<std::vector<double>> table_slopes_;
};

struct WeightedSample {
  double probability = 0.0;
  double value = 0.0;
};

/// (1/gamma) ln sum_i p_i theta_t(xi_i v a_T); uses the family's
/// interpolation table when one has been built, exact solves otherwise.
double a_priori_bound(ThetaFamily& family,
                      std::span<const WeightedSample> samples, double a_T,
                      std::size_t t_index);

/// Finite-sample estimate of E[e^{c gamma e^{beta T} |xi|}], c = 1 or 2.
/// Purely diagnostic; saturates to +inf instead of raising on overflow.
double integrability_check(std::span<const WeightedSample> samples,
                           double gamma, double beta, double horizon,
                           bool doubled);

}  // namespace rblab::bounds
