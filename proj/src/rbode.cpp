#include "rblab/rbode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "rblab/errors.hpp"
#include "rblab/rng.hpp"

namespace rblab::rbode {

namespace {

constexpr const char* kModule = "rbode";

/// Compensated accumulator for the long suffix sums in the defect checks.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double lerp_range(double lo, double hi, double u) { return lo + (hi - lo) * u; }

}  // namespace

Coefficient Coefficient::lipschitz(std::function<double(double)> f, double mu,
                                   bool monotone) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    raise(ErrorKind::InvalidProblem, kModule, "coefficient",
          "lipschitz modulus must be finite and nonnegative");
  }
  Coefficient c;
  c.eval = std::move(f);
  c.growth_class = GrowthClass::Lipschitz;
  c.mu = mu;
  c.monotone = monotone;
  return c;
}

Coefficient Coefficient::linear(std::function<double(double)> f, double mu_l,
                                bool monotone) {
  if (!(mu_l >= 0.0) || !std::isfinite(mu_l)) {
    raise(ErrorKind::InvalidProblem, kModule, "coefficient",
          "linear growth constant must be finite and nonnegative");
  }
  Coefficient c;
  c.eval = std::move(f);
  c.growth_class = GrowthClass::Linear;
  c.mu_l = mu_l;
  c.monotone = monotone;
  return c;
}

Coefficient Coefficient::superlinear(std::function<double(double)> f,
                                     std::function<double(double)> l0,
                                     bool monotone) {
  Coefficient c;
  c.eval = std::move(f);
  c.growth_class = GrowthClass::Superlinear;
  c.l0 = std::move(l0);
  c.monotone = monotone;
  return c;
}

void Coefficient::spot_check(std::uint64_t seed, int probes, double lo,
                             double hi) const {
  if (!eval) {
    raise(ErrorKind::InvalidProblem, kModule, "spot_check",
          "coefficient has no evaluation function");
  }
  CounterRng rng(seed);
  const double slack = 1e-9;
  for (int p = 0; p < probes; ++p) {
    const double a = lerp_range(lo, hi, rng.uniform(p, 0, 0));
    const double b = lerp_range(lo, hi, rng.uniform(p, 0, 1));
    const double fa = eval(a);
    switch (growth_class) {
      case GrowthClass::Lipschitz: {
        const double fb = eval(b);
        const double bound = mu * std::abs(a - b);
        if (std::abs(fa - fb) > bound + slack * (1.0 + bound)) {
          raise(ErrorKind::CertificateFailure, kModule, "spot_check",
                "declared Lipschitz modulus violated near y = " +
                    std::to_string(a));
        }
        break;
      }
      case GrowthClass::Linear: {
        const double bound = mu_l * (1.0 + std::abs(a));
        if (std::abs(fa) > bound + slack * (1.0 + bound)) {
          raise(ErrorKind::CertificateFailure, kModule, "spot_check",
                "declared linear growth violated near y = " +
                    std::to_string(a));
        }
        break;
      }
      case GrowthClass::Superlinear: {
        if (!l0) {
          raise(ErrorKind::InvalidProblem, kModule, "spot_check",
                "superlinear coefficient is missing its envelope function");
        }
        const double env = l0(a);
        if (!(env > 0.0)) {
          raise(ErrorKind::CertificateFailure, kModule, "spot_check",
                "envelope is not strictly positive at y = " +
                    std::to_string(a));
        }
        if (std::abs(fa) > env + slack * (1.0 + env)) {
          raise(ErrorKind::CertificateFailure, kModule, "spot_check",
                "coefficient exceeds its declared envelope near y = " +
                    std::to_string(a));
        }
        break;
      }
    }
  }
}

void RbodeProblem::validate() const {
  if (!barrier.grid || barrier.values.size() != barrier.grid->size()) {
    raise(ErrorKind::InvalidProblem, kModule, "validate",
          "barrier path does not match its grid");
  }
  if (!std::isfinite(terminal)) {
    raise(ErrorKind::InvalidProblem, kModule, "validate",
          "terminal value must be finite");
  }
  for (double v : barrier.values) {
    if (!std::isfinite(v)) {
      raise(ErrorKind::InvalidProblem, kModule, "validate",
            "barrier contains a non-finite value");
    }
  }
  const double l_T = barrier.values.back();
  const double scale = 1.0 + std::abs(terminal) + barrier.sup_abs();
  if (l_T > terminal + 1e-12 * scale) {
    raise(ErrorKind::InvalidProblem, kModule, "validate",
          "barrier exceeds the terminal value at the horizon");
  }
}

void RbodeProblem::validate_regime() const {
  validate();
  // A positive floor is the substantive requirement; the band constants
  // bracketing 1 can then always be chosen.
  if (!(barrier.inf() > 0.0)) {
    raise(ErrorKind::Regime, kModule, "validate_regime",
          "barrier must be bounded away from zero from below");
  }
}

double defect_tol(double terminal, double sup_barrier_abs) {
  return 1e-8 * (1.0 + std::abs(terminal) + sup_barrier_abs);
}

double contact_tol(double sup_barrier_abs) {
  return 1e-6 * (1.0 + sup_barrier_abs);
}

namespace {

/// One classical 4-stage step of u' = -phi(u) taken backward in time,
/// i.e. from u(t+h) to u(t).
double rk4_back_step(const std::function<double(double)>& f, double u, double h) {
  const double k1 = f(u);
  const double k2 = f(u + 0.5 * h * k1);
  const double k3 = f(u + 0.5 * h * k2);
  const double k4 = f(u + h * k3);
  return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> integrate_backward(const std::function<double(double)>& f,
                                       double terminal, const TimeGrid& grid,
                                       std::size_t lo, std::size_t hi,
                                       int substeps) {
  std::vector<double> u(hi - lo + 1);
  u.back() = terminal;
  for (std::size_t i = hi; i-- > lo;) {
    const double h = grid.dt(i) / substeps;
    double v = u[i - lo + 1];
    for (int s = 0; s < substeps; ++s) {
      v = rk4_back_step(f, v, h);
      if (!std::isfinite(v)) {
        raise(ErrorKind::Overflow, kModule, "solve_backward_ode",
              "non-finite value while integrating across t = " +
                  std::to_string(grid.point(i)));
      }
    }
    u[i - lo] = v;
  }
  return u;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

std::vector<double> solve_backward_ode(const Coefficient& phi, double terminal,
                                       const TimeGrid& grid, std::size_t lo,
                                       std::size_t hi) {
  if (!phi.eval) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_backward_ode",
          "coefficient has no evaluation function");
  }
  if (hi >= grid.size() || lo > hi) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_backward_ode",
          "horizon indices are out of range");
  }
  if (!std::isfinite(terminal)) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_backward_ode",
          "terminal value must be finite");
  }
  if (lo == hi) return {terminal};

  const double tol = defect_tol(terminal, 0.0);
  std::vector<double> coarse = integrate_backward(phi.eval, terminal, grid, lo, hi, 1);
  std::vector<double> fine = integrate_backward(phi.eval, terminal, grid, lo, hi, 2);
  if (sup_diff(coarse, fine) <= tol) return fine;

  // One automatic halving retry: compare the 2- and 4-substep passes.
  std::vector<double> finer = integrate_backward(phi.eval, terminal, grid, lo, hi, 4);
  const double defect = sup_diff(fine, finer);
  if (defect <= tol) return finer;
  raise(ErrorKind::Accuracy, kModule, "solve_backward_ode",
        "step-halved defect " + std::to_string(defect) +
            " stayed above tolerance after refinement");
}

namespace {

/// Reconstruct the pushing process from a value path and re-measure the
/// integral-equation defect under the right-endpoint rectangle quadrature.
RbodeSolution package_solution(const RbodeProblem& problem,
                               std::vector<double> y,
                               const std::function<double(double)>& f,
                               RbodeMethod tag) {
  const TimeGrid& g = problem.grid();
  const std::size_t n = g.size();
  std::vector<double> fvals(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    fvals[i] = f(y[i + 1]);
  }

  std::vector<double> k(n);
  k[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double c = y[i + 1] + fvals[i] * g.dt(i);
    k[i + 1] = k[i] + std::max(0.0, y[i] - c);
  }

  double residual = 0.0;
  KahanSum suffix;
  std::vector<double> s(n);
  s[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    suffix.add(fvals[i] * g.dt(i));
    s[i] = suffix.value();
  }
  const double k_total = k[n - 1];
  for (std::size_t i = 0; i < n; ++i) {
    const double defect =
        y[i] - problem.terminal - s[i] - (k_total - k[i]);
    residual = std::max(residual, std::abs(defect));
  }

  RbodeSolution out;
  out.y = ScalarPath{problem.barrier.grid, std::move(y)};
  out.k = ScalarPath{problem.barrier.grid, std::move(k)};
  out.method = tag;
  out.residual = residual;
  return out;
}

/// Shared backward recursion y_i = max(l_i, y_{i+1} + f(y_{i+1}) dt_i); its
/// value at each point equals the grid supremum of the restarted flows.
RbodeSolution reflected_recursion(const RbodeProblem& problem,
                                  const std::function<double(double)>& f,
                                  RbodeMethod tag) {
  const TimeGrid& g = problem.grid();
  const std::size_t n = g.size();
  std::vector<double> y(n);
  y[n - 1] = problem.terminal;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double c = y[i + 1] + f(y[i + 1]) * g.dt(i);
    if (!std::isfinite(c)) {
      raise(ErrorKind::Overflow, kModule, "solve_rbode",
            "non-finite value while stepping across t = " +
                std::to_string(g.point(i)));
    }
    y[i] = std::max(problem.barrier.values[i], c);
  }
  return package_solution(problem, std::move(y), f, tag);
}

RbodeSolution solve_picard(const RbodeProblem& problem) {
  if (problem.coefficient.growth_class != GrowthClass::Lipschitz) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_rbode",
          "the picard method requires a lipschitz coefficient");
  }
  const TimeGrid& g = problem.grid();
  const std::size_t n = g.size();
  const auto& f = problem.coefficient.eval;
  const auto& l = problem.barrier.values;

  std::vector<double> prev(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    prev[i] = std::max(problem.terminal, l[i]);
  }

  // Each sweep solves the frozen-coefficient reflected problem in Snell form;
  // the backward pass below is its exact dynamic-programming evaluation.
  const int max_sweeps = 200;
  const int warmup = 5;
  double last_change = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    next[n - 1] = problem.terminal;
    for (std::size_t i = n - 1; i-- > 0;) {
      const double c = next[i + 1] + f(prev[i + 1]) * g.dt(i);
      if (!std::isfinite(c)) {
        raise(ErrorKind::Overflow, kModule, "solve_rbode",
              "non-finite value in picard sweep across t = " +
                  std::to_string(g.point(i)));
      }
      next[i] = std::max(l[i], c);
    }
    const double change = sup_diff(prev, next);
    prev.swap(next);
    if (change <= 1e-10) {
      return package_solution(problem, std::move(prev), f, RbodeMethod::Picard);
    }
    if (sweep >= warmup && change > last_change) {
      raise(ErrorKind::Divergence, kModule, "solve_rbode",
            "picard sweeps stopped contracting (change " +
                std::to_string(change) + " after sweep " +
                std::to_string(sweep) + ")");
    }
    last_change = change;
  }
  raise(ErrorKind::Divergence, kModule, "solve_rbode",
        "picard did not reach its fixed point within 200 sweeps");
}

struct ConvolutionTable {
  std::shared_ptr<std::vector<double>> values;
  double left = 0.0;
  double step = 0.0;
};

double case_b_box(const RbodeProblem& problem) {
  const double head =
      std::max(std::abs(problem.terminal), problem.barrier.sup_abs());
  const double mu_l = problem.coefficient.mu_l;
  const double horizon = problem.grid().horizon();
  return 2.0 * ((head + mu_l * horizon) * std::exp(mu_l * horizon) + 1.0);
}

RbodeSolution solve_monotone(const RbodeProblem& problem,
                             ConvolutionDirection dir, RbodeMethod tag) {
  if (problem.coefficient.growth_class != GrowthClass::Linear) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_rbode",
          "the monotone methods require a linear-growth coefficient");
  }
  const double box = case_b_box(problem);
  const double step = 1e-3 * (2.0 * box);

  // Estimate the local modulus on the search box so the level ladder is
  // known to end where the convolution reproduces the coefficient.
  double local_mu = 0.0;
  {
    const auto& f = problem.coefficient.eval;
    const int samples = 2001;
    double prev = f(-box);
    for (int i = 1; i < samples; ++i) {
      const double x = -box + (2.0 * box) * i / (samples - 1);
      const double cur = f(x);
      local_mu = std::max(local_mu, std::abs(cur - prev) / (2.0 * box / (samples - 1)));
      prev = cur;
    }
  }

  const double n0 = std::max(1.0, problem.coefficient.mu_l);
  const double target = std::max(8.0 * n0, 2.0 * local_mu);
  std::vector<double> levels;
  for (double level = n0; ; level *= 2.0) {
    levels.push_back(level);
    if (level >= target) break;
    if (levels.size() > 64) {
      raise(ErrorKind::Accuracy, kModule, "solve_rbode",
            "regularization level ladder failed to reach its target modulus");
    }
  }

  RbodeSolution out;
  for (double level : levels) {
    Coefficient reg =
        lipschitz_regularize(problem.coefficient, level, dir, box, step);
    out = reflected_recursion(problem, reg.eval, tag);
  }
  return out;
}

RbodeSolution solve_superlinear(const RbodeProblem& problem) {
  TruncationPlan plan = TruncationPlan::build(problem);
  const auto& f = problem.coefficient.eval;
  const auto composed = [&f, plan](double y) { return f(plan.rho(y)); };
  return reflected_recursion(problem, composed, RbodeMethod::Superlinear);
}

}  // namespace

RbodeSolution solve_rbode(const RbodeProblem& problem, RbodeMethod method) {
  problem.validate();
  if (!problem.coefficient.eval) {
    raise(ErrorKind::InvalidProblem, kModule, "solve_rbode",
          "coefficient has no evaluation function");
  }
  switch (method) {
    case RbodeMethod::Representation:
      return reflected_recursion(problem, problem.coefficient.eval,
                                 RbodeMethod::Representation);
    case RbodeMethod::Picard:
      return solve_picard(problem);
    case RbodeMethod::MonotoneMin:
      return solve_monotone(problem, ConvolutionDirection::Inf,
                            RbodeMethod::MonotoneMin);
    case RbodeMethod::MonotoneMax:
      return solve_monotone(problem, ConvolutionDirection::Sup,
                            RbodeMethod::MonotoneMax);
    case RbodeMethod::Superlinear:
      return solve_superlinear(problem);
  }
  raise(ErrorKind::InvalidProblem, kModule, "solve_rbode", "unknown method");
}

Coefficient lipschitz_regularize(const Coefficient& phi, double n,
                                 ConvolutionDirection dir, double box,
                                 double step) {
  if (!phi.eval) {
    raise(ErrorKind::InvalidProblem, kModule, "lipschitz_regularize",
          "coefficient has no evaluation function");
  }
  if (!(n > 0.0) || !std::isfinite(n)) {
    raise(ErrorKind::InvalidProblem, kModule, "lipschitz_regularize",
          "regularization level must be positive");
  }
  if (phi.growth_class == GrowthClass::Linear && n < phi.mu_l) {
    raise(ErrorKind::InvalidProblem, kModule, "lipschitz_regularize",
          "regularization level is below the declared growth constant");
  }
  if (!(box > 0.0) || !(step > 0.0) || step >= box) {
    raise(ErrorKind::InvalidProblem, kModule, "lipschitz_regularize",
          "search box and step must be positive with step < box");
  }

  const std::size_t count =
      static_cast<std::size_t>(std::ceil(2.0 * box / step)) + 1;
  auto table = std::make_shared<std::vector<double>>(count);
  const double left = -box;
  const double actual_step = 2.0 * box / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    (*table)[i] = phi.eval(left + actual_step * static_cast<double>(i));
  }

  const bool inf_dir = (dir == ConvolutionDirection::Inf);
  auto eval = [table, left, actual_step, n, inf_dir](double y) {
    const auto& tab = *table;
    double best = inf_dir ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < tab.size(); ++i) {
      const double x = left + actual_step * static_cast<double>(i);
      const double cand =
          inf_dir ? tab[i] + n * std::abs(y - x) : tab[i] - n * std::abs(y - x);
      const bool better = inf_dir ? (cand < best) : (cand > best);
      if (better) {
        best = cand;
        best_index = i;
      }
    }
    // A strictly better value on the box edge than anywhere inside means the
    // true optimum lies outside the scanned range.
    if (best_index == 0 || best_index + 1 == tab.size()) {
      bool interior_ties = false;
      for (std::size_t i = 1; i + 1 < tab.size() && !interior_ties; ++i) {
        const double x = left + actual_step * static_cast<double>(i);
        const double cand = inf_dir ? tab[i] + n * std::abs(y - x)
                                    : tab[i] - n * std::abs(y - x);
        interior_ties = inf_dir ? (cand <= best) : (cand >= best);
      }
      if (!interior_ties) {
        raise(ErrorKind::BoxTooSmall, kModule, "lipschitz_regularize",
              "optimum attained on the search-box edge at y = " +
                  std::to_string(y));
      }
    }
    return best;
  };

  Coefficient out;
  out.eval = eval;
  out.growth_class = GrowthClass::Lipschitz;
  out.mu = n;
  out.monotone = phi.monotone;
  return out;
}

std::vector<RbodeSolution> monotone_family(const RbodeProblem& problem,
                                           ConvolutionDirection dir,
                                           std::span<const double> levels) {
  problem.validate();
  if (problem.coefficient.growth_class != GrowthClass::Linear) {
    raise(ErrorKind::InvalidProblem, kModule, "monotone_family",
          "the convolution family requires a linear-growth coefficient");
  }
  const double box = case_b_box(problem);
  const double step = 1e-3 * (2.0 * box);
  const RbodeMethod tag = dir == ConvolutionDirection::Inf
                              ? RbodeMethod::MonotoneMin
                              : RbodeMethod::MonotoneMax;
  std::vector<RbodeSolution> out;
  out.reserve(levels.size());
  for (double level : levels) {
    Coefficient reg = lipschitz_regularize(problem.coefficient, level, dir,
                                           box, step);
    out.push_back(reflected_recursion(problem, reg.eval, tag));
  }
  return out;
}

HittingTime hitting_time_check(const RbodeSolution& solution,
                               const RbodeProblem& problem,
                               std::size_t t_index) {
  problem.validate();
  if (!problem.coefficient.monotone) {
    raise(ErrorKind::InvalidProblem, kModule, "hitting_time_check",
          "the hitting-time certificate requires a monotone coefficient");
  }
  const TimeGrid& g = problem.grid();
  const std::size_t n = g.size();
  if (t_index >= n || solution.y.values.size() != n) {
    raise(ErrorKind::InvalidProblem, kModule, "hitting_time_check",
          "index or solution does not match the problem grid");
  }
  const double ctol = contact_tol(problem.barrier.sup_abs());
  std::size_t hit = n - 1;
  for (std::size_t i = t_index; i < n; ++i) {
    if (solution.y.values[i] - problem.barrier.values[i] <= ctol) {
      hit = i;
      break;
    }
  }
  double defect = 0.0;
  if (hit > t_index) {
    const std::vector<double> u = solve_backward_ode(
        problem.coefficient, solution.y.values[hit], g, t_index, hit);
    defect = std::abs(solution.y.values[t_index] - u.front());
  }
  return HittingTime{hit, g.point(hit), defect};
}

ScalarPath growth_envelope(const std::function<double(double)>& l0, double b,
                           TimeGridPtr grid) {
  if (!l0) {
    raise(ErrorKind::InvalidProblem, kModule, "growth_envelope",
          "envelope function is empty");
  }
  if (!grid) {
    raise(ErrorKind::InvalidProblem, kModule, "growth_envelope",
          "grid is empty");
  }
  if (!(l0(b) > 0.0)) {
    raise(ErrorKind::InvalidProblem, kModule, "growth_envelope",
          "envelope function must be strictly positive at the terminal value");
  }
  Coefficient wrapped;
  wrapped.eval = l0;
  wrapped.growth_class = GrowthClass::Superlinear;
  try {
    std::vector<double> v =
        solve_backward_ode(wrapped, b, *grid, 0, grid->size() - 1);
    return ScalarPath{grid, std::move(v)};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Overflow) {
      raise(ErrorKind::EnvelopeBlowup, kModule, "growth_envelope",
            "envelope integration overflowed before reaching t = 0");
    }
    throw;
  }
}

TruncationPlan TruncationPlan::build(const RbodeProblem& problem) {
  problem.validate();
  if (problem.coefficient.growth_class != GrowthClass::Superlinear ||
      !problem.coefficient.l0) {
    raise(ErrorKind::InvalidProblem, kModule, "truncation_plan",
          "a truncation plan needs a superlinear coefficient with an envelope");
  }
  const double m_lower = problem.barrier.inf();
  if (!(m_lower > 0.0)) {
    raise(ErrorKind::Regime, kModule, "truncation_plan",
          "the superlinear method needs a barrier bounded away from zero");
  }
  TruncationPlan plan;
  plan.barrier_inf = m_lower;
  plan.b = std::max(problem.terminal, problem.barrier.sup());
  plan.envelope =
      growth_envelope(problem.coefficient.l0, plan.b, problem.barrier.grid);
  plan.r = 0.5 * m_lower;
  const double v0 = plan.envelope.values.front();
  plan.R = v0 + 1.0 + 0.1 * std::abs(v0);
  return plan;
}

namespace {

/// Monotone cubic blend on [a, b] between value/slope pairs chosen so the
/// composite clamp is C1 and nondecreasing.
double hermite_blend(double x, double a, double b, double pa, double pb,
                     double ma, double mb) {
  const double h = b - a;
  const double t = (x - a) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * pa + (t3 - 2.0 * t2 + t) * h * ma +
         (-2.0 * t3 + 3.0 * t2) * pb + (t3 - t2) * h * mb;
}

}  // namespace

double TruncationPlan::rho(double x) const {
  const double lo = 0.5 * r;
  const double hi = 2.0 * R;
  if (x <= lo) return 0.75 * r;
  if (x < r) return hermite_blend(x, lo, r, 0.75 * r, r, 0.0, 1.0);
  if (x <= R) return x;
  if (x < hi) return hermite_blend(x, R, hi, R, 1.5 * R, 1.0, 0.0);
  return 1.5 * R;
}

double skorokhod_residual(const RbodeSolution& solution,
                          const ScalarPath& barrier) {
  const std::size_t n = barrier.values.size();
  if (solution.y.values.size() != n || solution.k.values.size() != n) {
    raise(ErrorKind::InvalidProblem, kModule, "skorokhod_residual",
          "solution and barrier grids do not match");
  }
  double residual = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = solution.y.values[i] - barrier.values[i];
    const double dk = solution.k.values[i + 1] - solution.k.values[i];
    residual = std::max(residual, std::abs(gap * dk));
  }
  return residual;
}

}  // namespace rblab::rbode
