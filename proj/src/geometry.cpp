#include "droneroute/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace droneroute {

Point split_point(const Point& a, const Point& b, double length, Side side) {
  const double d = dist(a, b);
  if (d == 0.0) throw std::invalid_argument("split_point: degenerate link (endpoints coincide)");
  if (length < d) throw std::invalid_argument("split_point: link shorter than endpoint distance");
  const double mx = 0.5 * (a.x + b.x);
  const double my = 0.5 * (a.y + b.y);
  // Offset along the chord's perpendicular bisector so that both half-legs
  // have length `length`/2.
  const double t = 0.5 * std::sqrt(std::max(0.0, length * length - d * d));
  const double nx = -(b.y - a.y) / d;
  const double ny = (b.x - a.x) / d;
  const double s = side == Side::plus ? t : -t;
  return {mx + s * nx, my + s * ny};
}

NormalizeInfo normalize_coords_info(const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("normalize_coords: empty point set");
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const Point& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double w = xmax - xmin, h = ymax - ymin;
  const double extent = std::max(w, h);
  if (extent <= 0.0) throw std::invalid_argument("normalize_coords: zero extent");
  const double s = 1.0 / extent;
  // (extent - w) is exactly zero on the dominant axis, keeping that axis's
  // extremes at exactly 0 and 1.
  const double ox = 0.5 * (extent - w) * s;
  const double oy = 0.5 * (extent - h) * s;
  NormalizeInfo info;
  info.scale = s;
  info.points.reserve(pts.size());
  for (const Point& p : pts) info.points.push_back({(p.x - xmin) * s + ox, (p.y - ymin) * s + oy});
  return info;
}

std::vector<Point> normalize_coords(const std::vector<Point>& pts) {
  return normalize_coords_info(pts).points;
}

std::vector<Point> project_lonlat(const std::vector<Point>& lonlat) {
  if (lonlat.empty()) throw std::invalid_argument("project_lonlat: empty point set");
  constexpr double kEarthRadius = 6371000.0;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  double clon = 0.0, clat = 0.0;
  for (const Point& p : lonlat) {
    if (p.x < -180.0 || p.x > 180.0 || p.y < -90.0 || p.y > 90.0)
      throw std::invalid_argument("project_lonlat: coordinate out of range");
    clon += p.x;
    clat += p.y;
  }
  clon /= static_cast<double>(lonlat.size());
  clat /= static_cast<double>(lonlat.size());
  const double coslat = std::cos(clat * kDegToRad);
  std::vector<Point> out;
  out.reserve(lonlat.size());
  for (const Point& p : lonlat) {
    out.push_back({kEarthRadius * (p.x - clon) * kDegToRad * coslat,
                   kEarthRadius * (p.y - clat) * kDegToRad});
  }
  return out;
}

}  // namespace droneroute
