#include "rblab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rblab/errors.hpp"
#include "rblab/rbode.hpp"

namespace rblab::bounds {

namespace {

constexpr const char* kModule = "bounds";
constexpr double kExpArgCap = 700.0;  // stays clear of double overflow

double checked_exp(double arg, const char* op) {
  if (!(arg <= kExpArgCap)) {
    raise(ErrorKind::Overflow, kModule, op,
          "exponent " + std::to_string(arg) + " is too large to represent");
  }
  return std::exp(arg);
}

}  // namespace

void SuperlinearGrowth::validate() const {
  if (!h) {
    raise(ErrorKind::InvalidProblem, kModule, "superlinear_growth",
          "growth function is empty");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    raise(ErrorKind::InvalidProblem, kModule, "superlinear_growth",
          "gamma must be positive and finite");
  }
  if (!(h(0.0) > 0.0)) {
    raise(ErrorKind::CertificateFailure, kModule, "superlinear_growth",
          "h(0) must be strictly positive");
  }
  const int probes = 2001;
  const double hi = 50.0 / gamma;
  const double step = hi / (probes - 1);
  const double slack = 1e-10;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  double prev = h(0.0);
  double prev2 = prev;
  for (int i = 0; i < probes; ++i) {
    const double y = step * i;
    const double hy = h(y);
    if (!std::isfinite(hy)) {
      raise(ErrorKind::CertificateFailure, kModule, "superlinear_growth",
            "h is non-finite at y = " + std::to_string(y));
    }
    if (i >= 1 && hy < prev - slack * (1.0 + std::abs(prev))) {
      raise(ErrorKind::CertificateFailure, kModule, "superlinear_growth",
            "h fails the monotonicity probe near y = " + std::to_string(y));
    }
    if (i >= 2) {
      const double midpoint_gap = 0.5 * (prev2 + hy) - prev;
      if (midpoint_gap < -slack * (1.0 + std::abs(prev))) {
        raise(ErrorKind::CertificateFailure, kModule, "superlinear_growth",
              "h fails the midpoint convexity probe near y = " +
                  std::to_string(y));
      }
    }
    const double damped = std::exp(-gamma * y) * hy;
    if (damped > best) {
      best = damped;
      best_index = static_cast<std::size_t>(i);
    }
    prev2 = prev;
    prev = hy;
  }
  if (best_index + 1 == static_cast<std::size_t>(probes)) {
    raise(ErrorKind::CertificateFailure, kModule, "superlinear_growth",
          "e^{-gamma y} h(y) is still rising at the scan edge, so its "
          "boundedness certificate fails");
  }
}

double GrowthTransform::operator()(double p) const {
  if (flavor_ == Flavor::Linear) {
    if (p < 1.0) return gamma_ * alpha_;
    return p * (alpha_ * gamma_ + beta_ * std::log(p));
  }
  if (p < p0_) return c0_;
  return gamma_ * p * h_(std::log(p) / gamma_);
}

GrowthTransform build_H_linear(double alpha, double beta, double gamma,
                               bool strict_regime) {
  if (!(gamma > 0.0) || !std::isfinite(gamma) || !(alpha >= 0.0) ||
      !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    raise(ErrorKind::InvalidProblem, kModule, "build_H_linear",
          "need alpha >= 0, beta >= 0, gamma > 0, all finite");
  }
  if (strict_regime && alpha < beta / gamma) {
    raise(ErrorKind::AssumptionViolation, kModule, "build_H_linear",
          "alpha must be at least beta / gamma under strict validation");
  }
  GrowthTransform H;
  H.flavor_ = GrowthTransform::Flavor::Linear;
  H.alpha_ = alpha;
  H.beta_ = beta;
  H.gamma_ = gamma;
  H.c0_ = gamma * alpha;
  H.p0_ = 1.0;
  return H;
}

GrowthTransform build_H_superlinear(const SuperlinearGrowth& growth,
                                    double scan_step) {
  growth.validate();
  if (!(scan_step > 0.0) || scan_step >= 0.5) {
    raise(ErrorKind::InvalidProblem, kModule, "build_H_superlinear",
          "scan step must lie in (0, 0.5)");
  }
  const double gamma = growth.gamma;
  const auto& h = growth.h;

  // c0 = sup over (0,1) of gamma p h(-ln p / gamma); the scan cannot reach
  // the boundary, so the p -> 1 limit gamma h(0) enters analytically.
  const double limit_value = gamma * h(0.0);
  double scan_sup = -std::numeric_limits<double>::infinity();
  double left_edge_value = 0.0;
  double bulk_sup = -std::numeric_limits<double>::infinity();
  for (double p = scan_step; p < 1.0; p += scan_step) {
    const double value = gamma * p * h(-std::log(p) / gamma);
    scan_sup = std::max(scan_sup, value);
    if (p == scan_step) {
      left_edge_value = value;
    } else if (p >= 10.0 * scan_step) {
      bulk_sup = std::max(bulk_sup, value);
    }
  }
  const double c0 = std::max(scan_sup, limit_value);
  if (left_edge_value >
      std::max(bulk_sup, limit_value) * (1.0 + 1e-9) + 1e-12) {
    raise(ErrorKind::CertificateFailure, kModule, "build_H_superlinear",
          "the c0 scan is dominated by its p -> 0 edge, so the boundedness "
          "certificate of h fails at this scale");
  }

  // p0 = first p >= 1 with gamma p h(ln p / gamma) >= c0; since h is
  // nondecreasing, p = c0 / (gamma h(0)) already suffices.
  const double p_cap = std::max(2.0, 2.0 * c0 / limit_value);
  double p0 = -1.0;
  for (double p = 1.0; p <= p_cap; p += scan_step) {
    if (gamma * p * h(std::log(p) / gamma) >= c0) {
      p0 = p;
      break;
    }
  }
  if (p0 < 0.0) {
    raise(ErrorKind::Accuracy, kModule, "build_H_superlinear",
          "p0 scan exhausted its range without reaching c0");
  }

  GrowthTransform H;
  H.flavor_ = GrowthTransform::Flavor::Superlinear;
  H.gamma_ = gamma;
  H.h_ = h;
  H.c0_ = c0;
  H.p0_ = p0;
  return H;
}

ThetaSolution solve_theta(double x, const GrowthTransform& transform,
                          const ScalarPath& a) {
  if (!a.grid || a.values.size() != a.grid->size()) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_theta",
          "envelope path does not match its grid");
  }
  const double gamma = transform.gamma();
  const double a_T = a.values.back();
  if (x < a_T - 1e-12 * (1.0 + std::abs(x) + std::abs(a_T))) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_theta",
          "terminal value lies below the barrier envelope at the horizon");
  }

  rbode::RbodeProblem problem;
  problem.terminal = checked_exp(gamma * std::max(x, a_T), "solve_theta");
  problem.coefficient.eval = [transform](double p) { return transform(p); };
  problem.coefficient.growth_class = rbode::GrowthClass::Superlinear;
  problem.coefficient.monotone = true;
  std::vector<double> barrier(a.values.size());
  for (std::size_t i = 0; i < barrier.size(); ++i) {
    barrier[i] = checked_exp(gamma * a.values[i], "solve_theta");
  }
  problem.barrier = ScalarPath{a.grid, std::move(barrier)};

  rbode::RbodeSolution solved =
      rbode::solve_rbode(problem, rbode::RbodeMethod::Representation);

  ThetaSolution out;
  out.theta = std::move(solved.y);
  out.k = std::move(solved.k);
  out.terminal_x = x;
  out.barrier_a = a;
  out.residual = solved.residual;
  return out;
}

ThetaFamily::ThetaFamily(GrowthTransform transform, ScalarPath a)
    : transform_(std::move(transform)), a_(std::move(a)) {
  if (!a_.grid || a_.values.size() != a_.grid->size()) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "envelope path does not match its grid");
  }
}

const ThetaSolution& ThetaFamily::solve_for(double x) {
  auto it = solved_.find(x);
  if (it == solved_.end()) {
    it = solved_.emplace(x, solve_theta(x, transform_, a_)).first;
  }
  return it->second;
}

double ThetaFamily::theta(double x, std::size_t t_index) {
  const ThetaSolution& sol = solve_for(x);
  if (t_index >= sol.theta.values.size()) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "time index is out of range");
  }
  return sol.theta.values[t_index];
}

namespace {

/// Shape-preserving cubic slopes (harmonic-mean form with clamped one-sided
/// endpoint slopes), so interpolation of a monotone row stays monotone.
std::vector<double> monotone_slopes(const std::vector<double>& xs,
                                    const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (ys[i + 1] - ys[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] == 0.0 || delta[i] == 0.0 ||
        (delta[i - 1] > 0.0) != (delta[i] > 0.0)) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [&](std::size_t i0, std::size_t i1) {
    const double d0 = ((2.0 * h[i0] + h[i1]) * delta[i0] - h[i0] * delta[i1]) /
                      (h[i0] + h[i1]);
    if (d0 * delta[i0] <= 0.0) return 0.0;
    if (delta[i0] * delta[i1] <= 0.0 && std::abs(d0) > 3.0 * std::abs(delta[i0])) {
      return 3.0 * delta[i0];
    }
    return d0;
  };
  d[0] = endpoint(0, 1);
  d[n - 1] = endpoint(n - 2, n - 3);
  return d;
}

double hermite_eval(double x, double x0, double x1, double y0, double y1,
                    double d0, double d1) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 +
         (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

void ThetaFamily::build_table(double x_lo, double x_hi, std::size_t nodes) {
  if (!(x_lo < x_hi) || nodes < 4) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "interpolation table needs x_lo < x_hi and at least 4 nodes");
  }
  const double a_T = a_.values.back();
  x_lo = std::max(x_lo, a_T);
  if (!(x_lo < x_hi)) x_hi = x_lo + 1.0;

  table_xs_.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    table_xs_[j] =
        x_lo + (x_hi - x_lo) * static_cast<double>(j) /
                   static_cast<double>(nodes - 1);
  }
  const std::size_t steps = a_.grid->size();
  table_log_theta_.assign(steps, std::vector<double>(nodes));
  table_slopes_.assign(steps, std::vector<double>(nodes));
  for (std::size_t j = 0; j < nodes; ++j) {
    const ThetaSolution& sol = solve_for(table_xs_[j]);
    for (std::size_t i = 0; i < steps; ++i) {
      table_log_theta_[i][j] = std::log(sol.theta.values[i]);
    }
  }
  for (std::size_t i = 0; i < steps; ++i) {
    table_slopes_[i] = monotone_slopes(table_xs_, table_log_theta_[i]);
  }
}

double ThetaFamily::theta_interpolated(double x, std::size_t t_index) const {
  if (table_xs_.empty()) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "no interpolation table has been built");
  }
  if (t_index >= table_log_theta_.size()) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "time index is out of range");
  }
  const double span = table_xs_.back() - table_xs_.front();
  if (x < table_xs_.front() - 1e-9 * span ||
      x > table_xs_.back() + 1e-9 * span) {
    raise(ErrorKind::InvalidProblem, kModule, "theta_family",
          "interpolation query x = " + std::to_string(x) +
              " lies outside the table range");
  }
  x = std::clamp(x, table_xs_.front(), table_xs_.back());
  const auto it =
      std::upper_bound(table_xs_.begin(), table_xs_.end(), x);
  std::size_t j =
      static_cast<std::size_t>(std::distance(table_xs_.begin(), it));
  j = std::clamp<std::size_t>(j, 1, table_xs_.size() - 1) - 1;
  const auto& row = table_log_theta_[t_index];
  const auto& slope = table_slopes_[t_index];
  const double log_theta =
      hermite_eval(x, table_xs_[j], table_xs_[j + 1], row[j], row[j + 1],
                   slope[j], slope[j + 1]);
  return std::exp(log_theta);
}

namespace {

void validate_distribution(std::span<const WeightedSample> samples,
                           const char* op) {
  if (samples.empty()) {
    raise(ErrorKind::InvalidDistribution, kModule, op,
          "sample set is empty");
  }
  double total = 0.0;
  for (const WeightedSample& s : samples) {
    if (!(s.probability >= 0.0) || !std::isfinite(s.probability)) {
      raise(ErrorKind::InvalidDistribution, kModule, op,
            "negative or non-finite probability in the sample set");
    }
    if (!std::isfinite(s.value)) {
      raise(ErrorKind::InvalidDistribution, kModule, op,
            "non-finite sample value");
    }
    total += s.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    raise(ErrorKind::InvalidDistribution, kModule, op,
          "probabilities sum to " + std::to_string(total) +
              " instead of 1");
  }
}

}  // namespace

double a_priori_bound(ThetaFamily& family,
                      std::span<const WeightedSample> samples, double a_T,
                      std::size_t t_index) {
  validate_distribution(samples, "a_priori_bound");
  const bool interpolate = family.has_table();
  double acc = 0.0;
  for (const WeightedSample& s : samples) {
    const double x = std::max(s.value, a_T);
    const double theta = interpolate
                             ? family.theta_interpolated(x, t_index)
                             : family.theta(x, t_index);
    acc += s.probability * theta;
  }
  return std::log(acc) / family.transform().gamma();
}

double integrability_check(std::span<const WeightedSample> samples,
                           double gamma, double beta, double horizon,
                           bool doubled) {
  validate_distribution(samples, "integrability_check");
  const double c = doubled ? 2.0 : 1.0;
  const double weight = c * gamma * std::exp(beta * horizon);
  double acc = 0.0;
  for (const WeightedSample& s : samples) {
    const double arg = weight * std::abs(s.value);
    acc += arg > kExpArgCap ? std::numeric_limits<double>::infinity()
                            : s.probability * std::exp(arg);
  }
  return acc;
}

}  // namespace rblab::bounds
