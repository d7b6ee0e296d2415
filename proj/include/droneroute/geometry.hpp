#pragma once

#include <cmath>
#include <vector>

namespace droneroute {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

inline double dist(const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return std::sqrt(dx * dx + dy * dy);
}

enum class Side { plus, minus };

// Places the point at distance length/2 from both endpoints, offset from the
// chord midpoint along the left normal of a->b (side plus) or its negation.
Point split_point(const Point& a, const Point& b, double length, Side side);

// Rescales into the unit square: single uniform scale, both axes centered.
// The scale is reported so quantities in coordinate units (road lengths) can
// be rescaled consistently.
struct NormalizeInfo {
  std::vector<Point> points;
  double scale = 1.0;
};
NormalizeInfo normalize_coords_info(const std::vector<Point>& pts);
std::vector<Point> normalize_coords(const std::vector<Point>& pts);

// Equirectangular projection of (lon, lat) degrees about the centroid, in
// meters, for geographic inputs ahead of normalize_coords.
std::vector<Point> project_lonlat(const std::vector<Point>& lonlat);

}  // namespace droneroute
