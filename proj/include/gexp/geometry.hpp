#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "gexp/types.hpp"

namespace gexp::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Even-odd ray casting against the closed polygon through `vertices`
/// (last vertex joins the first). Points within `boundary_tol` of an edge
/// count as inside.
inline bool point_in_polygon(Point2 p, std::span<const Point2> vertices, double boundary_tol = 1e-9) {
  const std::size_t n = vertices.size();
  if (n == 0) return false;
  if (n == 1) return std::hypot(p.x - vertices[0].x, p.y - vertices[0].y) <= boundary_tol;

  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[j];
    if (distance_to_segment(p, a, b) <= boundary_tol) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline bool all_inside(std::span<const Point2> points, std::span<const Point2> polygon,
                       double boundary_tol = 1e-9) {
  return std::all_of(points.begin(), points.end(),
                     [&](const Point2& p) { return point_in_polygon(p, polygon, boundary_tol); });
}

}  // namespace gexp::geometry
