#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <vector>

namespace gpett {

using Point2 = Eigen::Vector2d;

/// Closed polygon; the last vertex connects back to the first.
using Polygon = std::vector<Point2>;

/// Signed shoelace area (positive for counter-clockwise order).
inline double signed_area(const Polygon& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

inline Point2 vertex_mean(const std::vector<Point2>& pts) {
  Point2 c = Point2::Zero();
  for (const auto& p : pts) c += p;
  return pts.empty() ? c : Point2(c / static_cast<double>(pts.size()));
}

}  // namespace gpett
