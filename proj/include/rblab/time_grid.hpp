#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace rblab {

/// Strictly increasing time axis 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
public:
  static TimeGrid uniform(double horizon, std::size_t steps);
  static TimeGrid from_points(std::vector<double> points);

  /// New grid splitting every interval into `factor` equal pieces.
  /// The original points are reproduced exactly.
  TimeGrid refine(std::size_t factor) const;

  std::size_t size() const { return points_.size(); }    // number of points, N + 1
  std::size_t steps() const { return points_.size() - 1; }
  double point(std::size_t i) const { return points_[i]; }
  double dt(std::size_t i) const { return points_[i + 1] - points_[i]; }
  double horizon() const { return points_.back(); }
  double mesh() const;

  const std::vector<double>& points() const { return points_; }

private:
  explicit TimeGrid(std::vector<double> points);
  std::vector<double> points_;
};

using TimeGridPtr = std::shared_ptr<const TimeGrid>;

inline TimeGridPtr make_grid(double horizon, std::size_t steps) {
  return std::make_shared<const TimeGrid>(TimeGrid::uniform(horizon, steps));
}

/// Values sampled on the points of a grid, interpreted piecewise-linearly
/// between them.
struct ScalarPath {
  TimeGridPtr grid;
  std::vector<double> values;

  ScalarPath() = default;
  ScalarPath(TimeGridPtr g, std::vector<double> v);
  static ScalarPath sample(TimeGridPtr g, const std::function<double(double)>& f);
  static ScalarPath constant(TimeGridPtr g, double c);

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
  double sup() const;
  double inf() const;
  double sup_abs() const;

  /// Piecewise-linear evaluation at an arbitrary time in [0, T].
  double at_time(double t) const;
};

}  // namespace rblab
