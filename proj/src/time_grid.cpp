#include "rblab/time_grid.hpp"

#include <algorithm>
#include <cmath>

#include "rblab/errors.hpp"

namespace rblab {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2)
    raise(ErrorKind::InvalidProblem, "time_grid", "construct", "need at least two points");
  if (points_.front() != 0.0)
    raise(ErrorKind::InvalidProblem, "time_grid", "construct", "first point must be 0");
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!(points_[i] < points_[i + 1]))
      raise(ErrorKind::InvalidProblem, "time_grid", "construct",
            "points must be strictly increasing at index " + std::to_string(i));
  }
  if (!std::isfinite(points_.back()))
    raise(ErrorKind::InvalidProblem, "time_grid", "construct", "horizon must be finite");
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (!(horizon > 0.0))
    raise(ErrorKind::InvalidProblem, "time_grid", "uniform", "horizon must be positive");
  if (steps == 0)
    raise(ErrorKind::InvalidProblem, "time_grid", "uniform", "need at least one step");
  std::vector<double> pts(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    pts[i] = (horizon * static_cast<double>(i)) / static_cast<double>(steps);
  pts[steps] = horizon;
  return TimeGrid(std::move(pts));
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
  return TimeGrid(std::move(points));
}

TimeGrid TimeGrid::refine(std::size_t factor) const {
  if (factor == 0)
    raise(ErrorKind::InvalidProblem, "time_grid", "refine", "factor must be >= 1");
  if (factor == 1) return *this;
  std::vector<double> pts;
  pts.reserve(steps() * factor + 1);
  for (std::size_t i = 0; i < steps(); ++i) {
    const double a = points_[i];
    const double w = points_[i + 1] - a;
    for (std::size_t m = 0; m < factor; ++m)
      pts.push_back(a + (w * static_cast<double>(m)) / static_cast<double>(factor));
  }
  pts.push_back(points_.back());
  return TimeGrid(std::move(pts));
}

double TimeGrid::mesh() const {
  double m = 0.0;
  for (std::size_t i = 0; i < steps(); ++i) m = std::max(m, dt(i));
  return m;
}

ScalarPath::ScalarPath(TimeGridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (!grid || values.size() != grid->size())
    raise(ErrorKind::InvalidProblem, "time_grid", "path", "value count must match grid");
}

ScalarPath ScalarPath::sample(TimeGridPtr g, const std::function<double(double)>& f) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->point(i));
  return ScalarPath(std::move(g), std::move(v));
}

ScalarPath ScalarPath::constant(TimeGridPtr g, double c) {
  std::vector<double> v(g->size(), c);
  return ScalarPath(std::move(g), std::move(v));
}

double ScalarPath::sup() const {
  return *std::max_element(values.begin(), values.end());
}

double ScalarPath::inf() const {
  return *std::min_element(values.begin(), values.end());
}

double ScalarPath::sup_abs() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::fabs(v));
  return s;
}

double ScalarPath::at_time(double t) const {
  const auto& pts = grid->points();
  if (t <= pts.front()) return values.front();
  if (t >= pts.back()) return values.back();
  auto it = std::upper_bound(pts.begin(), pts.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - pts.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - pts[lo]) / (pts[hi] - pts[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

}  // namespace rblab
