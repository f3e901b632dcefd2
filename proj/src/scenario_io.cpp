#include "rblab/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "json.hpp"
#include "rblab/errors.hpp"
#include "rblab/expr.hpp"

namespace rblab::scenario_io {

namespace {

constexpr const char* kModule = "scenario_io";

using nlohmann::json;

[[noreturn]] void config_error(const std::string& detail) {
  raise(ErrorKind::Config, kModule, "load_config", detail);
}

void expect_keys(const json& obj, const char* block,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return item.key() == k; });
    if (!known) {
      config_error("unknown key '" + item.key() + "' in block '" + block +
                   "'");
    }
  }
}

double get_double(const json& obj, const char* block, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    config_error(std::string(block) + "." + key + " must be a number");
  }
  return obj[key].get<double>();
}

bool get_bool(const json& obj, const char* block, const char* key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) {
    config_error(std::string(block) + "." + key + " must be a boolean");
  }
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* block, const char* key,
                       const std::string& fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) {
      config_error(std::string(block) + "." + key + " is required");
    }
    return fallback;
  }
  if (!obj[key].is_string()) {
    config_error(std::string(block) + "." + key + " must be a string");
  }
  return obj[key].get<std::string>();
}

expr::Expression parse_expression(const json& obj, const char* block,
                                  const char* key, const char* allowed_vars,
                                  bool required,
                                  const std::string& fallback = "") {
  std::string text = get_string(obj, block, key, fallback, required);
  if (text.empty()) text = fallback;
  expr::Expression e = expr::Expression::parse(text);
  for (char v : {'t', 'y', 'z', 'b'}) {
    if (e.uses(v) &&
        std::string(allowed_vars).find(v) == std::string::npos) {
      config_error(std::string(block) + "." + key + " may only use {" +
                   allowed_vars + "} but uses '" + std::string(1, v) + "'");
    }
  }
  return e;
}

rbsde::DriverSpec parse_driver(const json& j, double default_seed_gamma,
                               bool strict) {
  (void)default_seed_gamma;
  expect_keys(j, "driver",
              {"kind", "alpha", "beta", "gamma", "constant", "c0", "c1",
               "expression", "h"});
  const std::string kind = get_string(j, "driver", "kind", "", true);
  const double gamma = get_double(j, "driver", "gamma", 1.0);
  if (!(gamma > 0.0)) config_error("driver.gamma must be positive");

  rbsde::DriverSpec driver;
  driver.gamma = gamma;
  driver.certificate = rbsde::CertificateKind::Linear;
  bool custom = false;

  if (kind == "zero") {
    driver.kind = rbsde::DriverKind::Zero;
    driver.eval = [](double, double, std::span<const double>) { return 0.0; };
    driver.alpha = get_double(j, "driver", "alpha", 0.0);
    driver.beta = get_double(j, "driver", "beta", 0.0);
  } else if (kind == "constant") {
    const double c =
        get_double(j, "driver", "constant", get_double(j, "driver", "alpha", 0.0));
    driver.kind = rbsde::DriverKind::Constant;
    driver.eval = [c](double, double, std::span<const double>) { return c; };
    driver.alpha = get_double(j, "driver", "alpha", std::abs(c));
    driver.beta = get_double(j, "driver", "beta", 0.0);
  } else if (kind == "linear") {
    const double c0 =
        get_double(j, "driver", "c0", get_double(j, "driver", "alpha", 0.0));
    const double c1 =
        get_double(j, "driver", "c1", get_double(j, "driver", "beta", 0.0));
    driver.kind = rbsde::DriverKind::Linear;
    driver.eval = [c0, c1](double, double y, std::span<const double>) {
      return c0 + c1 * y;
    };
    driver.alpha = get_double(j, "driver", "alpha", std::abs(c0));
    driver.beta = get_double(j, "driver", "beta", std::abs(c1));
  } else if (kind == "quadratic_z") {
    const double c0 =
        get_double(j, "driver", "c0", get_double(j, "driver", "alpha", 0.0));
    driver.kind = rbsde::DriverKind::QuadraticZ;
    driver.eval = [c0, gamma](double, double, std::span<const double> z) {
      return c0 + 0.5 * gamma * z[0] * z[0];
    };
    driver.alpha = get_double(j, "driver", "alpha", std::abs(c0));
    driver.beta = get_double(j, "driver", "beta", 0.0);
  } else if (kind == "custom") {
    const expr::Expression f =
        parse_expression(j, "driver", "expression", "tyz", true);
    driver.kind = rbsde::DriverKind::Custom;
    driver.eval = [f](double t, double y, std::span<const double> z) {
      expr::Env env;
      env.t = t;
      env.y = y;
      env.z = z.empty() ? 0.0 : z[0];
      return f.eval(env);
    };
    driver.alpha = get_double(j, "driver", "alpha", 0.0);
    driver.beta = get_double(j, "driver", "beta", 0.0);
    custom = true;
  } else {
    config_error("driver.kind must be one of zero, constant, linear, "
                 "quadratic_z, custom");
  }

  if (j.contains("h")) {
    const expr::Expression h = parse_expression(j, "driver", "h", "y", true);
    driver.certificate = rbsde::CertificateKind::Superlinear;
    driver.growth.gamma = gamma;
    driver.growth.h = [h](double y) {
      expr::Env env;
      env.y = y;
      return h.eval(env);
    };
    driver.growth.validate();
  }

  if (strict && driver.certificate == rbsde::CertificateKind::Linear &&
      driver.alpha < driver.beta / gamma - 1e-12) {
    raise(ErrorKind::AssumptionViolation, kModule, "load_config",
          "strict assumptions require alpha >= beta / gamma for the driver "
          "certificate");
  }
  if (custom) {
    driver.spot_check(7, 128, 5.0, 5.0);
  }
  return driver;
}

NumericsConfig parse_numerics(const json& j) {
  expect_keys(j, "numerics",
              {"backend", "steps", "paths", "degree", "seed", "horizon",
               "mode"});
  NumericsConfig numerics;
  numerics.backend = get_string(j, "numerics", "backend", "lattice");
  if (numerics.backend != "lattice" && numerics.backend != "regression") {
    config_error("numerics.backend must be lattice or regression");
  }
  numerics.steps = static_cast<int>(get_double(j, "numerics", "steps", 100));
  if (numerics.steps < 1) config_error("numerics.steps must be >= 1");
  const double paths = get_double(j, "numerics", "paths", 10000);
  if (paths < 1) config_error("numerics.paths must be >= 1");
  numerics.paths = static_cast<std::size_t>(paths);
  numerics.degree = static_cast<int>(get_double(j, "numerics", "degree", 3));
  if (numerics.degree < 0) config_error("numerics.degree must be >= 0");
  numerics.seed =
      static_cast<std::uint64_t>(get_double(j, "numerics", "seed", 2026));
  numerics.horizon = get_double(j, "numerics", "horizon", 1.0);
  if (!(numerics.horizon > 0.0)) {
    config_error("numerics.horizon must be positive");
  }
  const std::string mode = get_string(j, "numerics", "mode", "auto");
  if (mode == "auto") {
    numerics.mode = rbsde::DriverMode::Auto;
  } else if (mode == "explicit") {
    numerics.mode = rbsde::DriverMode::Explicit;
  } else if (mode == "fixed_point") {
    numerics.mode = rbsde::DriverMode::FixedPoint;
  } else {
    config_error("numerics.mode must be auto, explicit, or fixed_point");
  }
  return numerics;
}

RbsdeConfig parse_rbsde(const json& root, const NumericsConfig& numerics,
                        bool strict) {
  RbsdeConfig cfg;
  cfg.scenario.horizon = numerics.horizon;
  cfg.scenario.dimension = 1;
  cfg.scenario.driver = parse_driver(root.at("driver"), 1.0, strict);

  const json& jt = root.at("terminal");
  expect_keys(jt, "terminal", {"expression", "truncation_levels"});
  const expr::Expression xi =
      parse_expression(jt, "terminal", "expression", "b", true);
  cfg.scenario.terminal = [xi](std::span<const double> s) {
    expr::Env env;
    env.b = s[0];
    return xi.eval(env);
  };
  if (jt.contains("truncation_levels")) {
    if (!jt["truncation_levels"].is_array()) {
      config_error("terminal.truncation_levels must be an array of numbers");
    }
    for (const auto& v : jt["truncation_levels"]) {
      if (!v.is_number()) {
        config_error("terminal.truncation_levels must contain numbers only");
      }
      cfg.truncation_levels.push_back(v.get<double>());
    }
  }

  const json& jb = root.at("barrier");
  expect_keys(jb, "barrier", {"expression", "envelope"});
  const expr::Expression barrier =
      parse_expression(jb, "barrier", "expression", "tb", true);
  cfg.scenario.barrier = [barrier](double t, std::span<const double> s) {
    expr::Env env;
    env.t = t;
    env.b = s[0];
    return barrier.eval(env);
  };
  if (jb.contains("envelope")) {
    const expr::Expression a =
        parse_expression(jb, "barrier", "envelope", "t", true);
    cfg.scenario.envelope_a = [a](double t) {
      expr::Env env;
      env.t = t;
      return a.eval(env);
    };
  } else {
    // Fit a constant envelope: scan |barrier| over the reachable state box.
    const double reach =
        std::sqrt(static_cast<double>(numerics.steps) * numerics.horizon);
    double sup = 0.0;
    for (int ti = 0; ti <= numerics.steps; ++ti) {
      const double t = numerics.horizon * ti / numerics.steps;
      for (int bi = 0; bi <= 200; ++bi) {
        const double b = -reach + 2.0 * reach * bi / 200.0;
        expr::Env env;
        env.t = t;
        env.b = b;
        sup = std::max(sup, std::abs(barrier.eval(env)));
      }
    }
    if (!std::isfinite(sup)) {
      config_error("barrier.expression is non-finite on the state box; give "
                   "an explicit envelope");
    }
    const double fitted = sup + 1.0;
    cfg.scenario.envelope_a = [fitted](double) { return fitted; };
    cfg.envelope_fitted = true;
  }
  return cfg;
}

RbodeConfig parse_rbode(const json& j, const NumericsConfig& numerics) {
  expect_keys(j, "rbode",
              {"coefficient", "growth", "mu", "l0", "monotone", "terminal",
               "barrier", "method"});
  RbodeConfig cfg;

  const expr::Expression phi =
      parse_expression(j, "rbode", "coefficient", "y", true);
  auto phi_fn = [phi](double y) {
    expr::Env env;
    env.y = y;
    return phi.eval(env);
  };
  const bool monotone = get_bool(j, "rbode", "monotone", false);
  const std::string growth = get_string(j, "rbode", "growth", "", true);
  if (growth == "lipschitz") {
    cfg.problem.coefficient = rbode::Coefficient::lipschitz(
        phi_fn, get_double(j, "rbode", "mu", 1.0), monotone);
  } else if (growth == "linear") {
    cfg.problem.coefficient = rbode::Coefficient::linear(
        phi_fn, get_double(j, "rbode", "mu", 1.0), monotone);
  } else if (growth == "superlinear") {
    const expr::Expression l0 =
        parse_expression(j, "rbode", "l0", "y", true);
    cfg.problem.coefficient = rbode::Coefficient::superlinear(
        phi_fn,
        [l0](double y) {
          expr::Env env;
          env.y = y;
          return l0.eval(env);
        },
        true);
  } else {
    config_error("rbode.growth must be lipschitz, linear, or superlinear");
  }

  cfg.problem.terminal = get_double(j, "rbode", "terminal", 0.0);
  const expr::Expression barrier =
      parse_expression(j, "rbode", "barrier", "t", true);
  cfg.problem.barrier = ScalarPath::sample(
      make_grid(numerics.horizon, static_cast<std::size_t>(numerics.steps)),
      [barrier](double t) {
        expr::Env env;
        env.t = t;
        return barrier.eval(env);
      });

  const std::string method =
      get_string(j, "rbode", "method", "representation");
  if (method == "representation") {
    cfg.method = rbode::RbodeMethod::Representation;
  } else if (method == "picard") {
    cfg.method = rbode::RbodeMethod::Picard;
  } else if (method == "monotone_min") {
    cfg.method = rbode::RbodeMethod::MonotoneMin;
  } else if (method == "monotone_max") {
    cfg.method = rbode::RbodeMethod::MonotoneMax;
  } else if (method == "superlinear") {
    cfg.method = rbode::RbodeMethod::Superlinear;
  } else {
    config_error("rbode.method must be representation, picard, "
                 "monotone_min, monotone_max, or superlinear");
  }
  return cfg;
}

ThetaConfig parse_theta(const json& j, const NumericsConfig& numerics,
                        bool strict) {
  expect_keys(j, "theta",
              {"flavor", "alpha", "beta", "gamma", "h", "terminal",
               "envelope"});
  ThetaConfig cfg;
  const std::string flavor = get_string(j, "theta", "flavor", "linear");
  const double gamma = get_double(j, "theta", "gamma", 1.0);
  if (flavor == "linear") {
    cfg.transform = bounds::build_H_linear(
        get_double(j, "theta", "alpha", 1.0),
        get_double(j, "theta", "beta", 1.0), gamma, strict);
  } else if (flavor == "superlinear") {
    const expr::Expression h = parse_expression(j, "theta", "h", "y", true);
    bounds::SuperlinearGrowth growth;
    growth.gamma = gamma;
    growth.h = [h](double y) {
      expr::Env env;
      env.y = y;
      return h.eval(env);
    };
    cfg.transform = bounds::build_H_superlinear(growth);
  } else {
    config_error("theta.flavor must be linear or superlinear");
  }
  cfg.terminal_x = get_double(j, "theta", "terminal", 1.0);
  const expr::Expression a = parse_expression(j, "theta", "envelope", "t",
                                              false, "0");
  cfg.envelope_a = ScalarPath::sample(
      make_grid(numerics.horizon, static_cast<std::size_t>(numerics.steps)),
      [a](double t) {
        expr::Env env;
        env.t = t;
        return a.eval(env);
      });
  return cfg;
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "validation", "skorokhod",    "comparison", "stability", "snell",
      "energy",     "majorization", "theta",      "rbode",     "regression",
  };
  return names;
}

LoadedConfig load_config(const std::string& path, bool strict_assumptions) {
  std::ifstream in(path);
  if (!in) {
    config_error("cannot open config file '" + path + "'");
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!root.is_object()) {
    config_error("config root must be an object");
  }
  expect_keys(root, "(root)",
              {"driver", "terminal", "barrier", "numerics", "checks",
               "rbode", "theta"});

  LoadedConfig cfg;
  if (root.contains("numerics")) {
    cfg.numerics = parse_numerics(root["numerics"]);
  }
  if (root.contains("checks")) {
    if (!root["checks"].is_array()) {
      config_error("checks must be an array of suite names");
    }
    for (const auto& v : root["checks"]) {
      if (!v.is_string()) config_error("checks must contain strings only");
      const std::string name = v.get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        config_error("unknown check '" + name + "'");
      }
      cfg.checks.push_back(name);
    }
  }

  const int rbsde_blocks = int(root.contains("driver")) +
                           int(root.contains("terminal")) +
                           int(root.contains("barrier"));
  if (rbsde_blocks == 3) {
    cfg.rbsde = parse_rbsde(root, cfg.numerics, strict_assumptions);
  } else if (rbsde_blocks != 0) {
    config_error("driver, terminal, and barrier blocks must appear together");
  }
  if (root.contains("rbode")) {
    cfg.rbode = parse_rbode(root["rbode"], cfg.numerics);
  }
  if (root.contains("theta")) {
    cfg.theta = parse_theta(root["theta"], cfg.numerics, strict_assumptions);
  }
  if (!cfg.rbsde && !cfg.rbode && !cfg.theta && cfg.checks.empty()) {
    config_error("config contains no scenario blocks and no checks");
  }
  return cfg;
}

}  // namespace rblab::scenario_io
