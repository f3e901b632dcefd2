#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "rblab/errors.hpp"
#include "rblab/rbsde.hpp"

namespace rblab::rbsde::detail {

inline DriverMode resolve_mode(const DriverSpec& driver, DriverMode requested) {
  if (requested != DriverMode::Auto) return requested;
  switch (driver.kind) {
    case DriverKind::Zero:
    case DriverKind::Constant:
    case DriverKind::Linear:
      return DriverMode::Explicit;
    default:
      return DriverMode::FixedPoint;
  }
}

/// Driver step shared by both backends: from the projected continuation mean
/// and slope, produce the pre-reflection continuation value.
inline double continuation_value(const DriverSpec& driver, DriverMode mode,
                                 double t, double mean,
                                 std::span<const double> z, double barrier,
                                 double dt) {
  if (mode == DriverMode::Explicit) {
    return mean + driver.eval(t, mean, z) * dt;
  }
  double y_hat = mean;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const double next = std::max(barrier, mean + driver.eval(t, y_hat, z) * dt);
    if (std::abs(next - y_hat) <= 1e-12) {
      y_hat = next;
      converged = true;
      break;
    }
    y_hat = next;
  }
  if (!converged) {
    raise(ErrorKind::Mode, "rbsde", "driver_step",
          "fixed-point driver iteration did not converge in 50 sweeps; "
          "a smaller time step is needed");
  }
  return mean + driver.eval(t, y_hat, z) * dt;
}

}  // namespace rblab::rbsde::detail
