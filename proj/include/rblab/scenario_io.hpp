#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rblab/bounds.hpp"
#include "rblab/rbode.hpp"
#include "rblab/rbsde.hpp"

namespace rblab::scenario_io {

struct NumericsConfig {
  std::string backend = "lattice";  // lattice | regression
  int steps = 100;
  std::size_t paths = 10000;
  int degree = 3;
  std::uint64_t seed = 2026;
  double horizon = 1.0;
  rbsde::DriverMode mode = rbsde::DriverMode::Auto;
};

struct RbsdeConfig {
  rbsde::ScenarioSpec scenario;
  std::vector<double> truncation_levels;
  bool envelope_fitted = false;  // envelope was auto-fitted, not user-given
};

struct RbodeConfig {
  rbode::RbodeProblem problem;
  rbode::RbodeMethod method = rbode::RbodeMethod::Representation;
};

struct ThetaConfig {
  bounds::GrowthTransform transform;
  double terminal_x = 0.0;
  ScalarPath envelope_a;
};

/// A parsed scenario file.  Which optional blocks are present depends on
/// the subcommand the file is written for.
struct LoadedConfig {
  NumericsConfig numerics;
  std::vector<std::string> checks;
  std::optional<RbsdeConfig> rbsde;
  std::optional<RbodeConfig> rbode;
  std::optional<ThetaConfig> theta;
};

/// Parses a JSON scenario file; unknown keys anywhere are rejected, and
/// custom drivers are spot-checked against their declared certificate.
/// strict_assumptions additionally enforces alpha >= beta/gamma on linear
/// driver certificates.
LoadedConfig load_config(const std::string& path, bool strict_assumptions);

/// Check names accepted in the checks block.
const std::vector<std::string>& known_checks();

}  // namespace rblab::scenario_io
