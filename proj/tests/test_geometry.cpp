#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "droneroute/geometry.hpp"

using namespace droneroute;

TEST_CASE("split point sits half the road length from both endpoints") {
  const Point a{0.0, 0.0}, b{4.0, 0.0};
  const Point p = split_point(a, b, 5.0, Side::plus);
  CHECK(p.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::abs(dist(a, p) - 2.5) <= 1e-12);
  CHECK(std::abs(dist(b, p) - 2.5) <= 1e-12);

  const Point m = split_point(a, b, 5.0, Side::minus);
  CHECK(m.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.y == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("split point of a taut link is the chord midpoint") {
  const Point p = split_point({0.0, 0.0}, {4.0, 0.0}, 4.0, Side::plus);
  CHECK(p.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("split point offset follows the left normal of the directed chord") {
  // Vertical chord pointing +y: left normal points -x, so Side::minus lands at +x.
  const Point p = split_point({0.0, 0.0}, {0.0, 2.0}, 2.5, Side::minus);
  CHECK(p.x == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("split point equidistance holds across random geometries") {
  uint64_t state = 12345;
  auto next = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  for (int it = 0; it < 500; ++it) {
    const Point a{next() * 10.0 - 5.0, next() * 10.0 - 5.0};
    const Point b{next() * 10.0 - 5.0, next() * 10.0 - 5.0};
    const double chord = dist(a, b);
    if (chord < 1e-6) continue;
    const double length = chord * (1.0 + next());
    const Side side = next() < 0.5 ? Side::plus : Side::minus;
    const Point p = split_point(a, b, length, side);
    CHECK(std::abs(dist(a, p) - length / 2.0) <= 1e-9);
    CHECK(std::abs(dist(b, p) - length / 2.0) <= 1e-9);
  }
}

TEST_CASE("split point rejects degenerate inputs") {
  CHECK_THROWS_AS(split_point({0, 0}, {4, 0}, 3.9, Side::plus), std::invalid_argument);
  CHECK_THROWS_AS(split_point({1, 1}, {1, 1}, 1.0, Side::plus), std::invalid_argument);
}

TEST_CASE("normalize maps the bounding box into the unit square") {
  const std::vector<Point> pts{{0, 0}, {10, 0}, {10, 10}};
  const std::vector<Point> out = normalize_coords(pts);
  CHECK(out[0] == Point{0.0, 0.0});
  CHECK(out[1] == Point{1.0, 0.0});
  CHECK(out[2] == Point{1.0, 1.0});
}

TEST_CASE("normalize keeps the aspect ratio and centers the short axis") {
  const std::vector<Point> pts{{0, 0}, {4, 2}};
  const NormalizeInfo info = normalize_coords_info(pts);
  CHECK(info.scale == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(info.points[0].x == doctest::Approx(0.0));
  CHECK(info.points[1].x == doctest::Approx(1.0));
  // y span 2 scaled to 0.5, centered at 0.25..0.75.
  CHECK(info.points[0].y == doctest::Approx(0.25));
  CHECK(info.points[1].y == doctest::Approx(0.75));
  // Distances scale uniformly.
  CHECK(dist(info.points[0], info.points[1]) ==
        doctest::Approx(dist(pts[0], pts[1]) * info.scale).epsilon(1e-12));
}

TEST_CASE("normalize rejects empty and zero-extent input") {
  CHECK_THROWS_AS(normalize_coords({}), std::invalid_argument);
  CHECK_THROWS_AS(normalize_coords({{1, 1}, {1, 1}}), std::invalid_argument);
}

TEST_CASE("lonlat projection preserves small-area distances") {
  // ~1.11 km of latitude at the equator.
  const std::vector<Point> eq = project_lonlat({{0.0, 0.0}, {0.0, 0.01}});
  CHECK(dist(eq[0], eq[1]) == doctest::Approx(1111.95).epsilon(1e-3));

  // At 60 degrees north a degree of longitude is half as wide as at the equator.
  const std::vector<Point> north = project_lonlat({{10.0, 60.0}, {10.01, 60.0}});
  CHECK(dist(north[0], north[1]) == doctest::Approx(1111.95 * 0.5).epsilon(1e-2));
}

TEST_CASE("lonlat projection rejects out-of-range coordinates") {
  CHECK_THROWS_AS(project_lonlat({{181.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(project_lonlat({{0.0, 91.0}}), std::invalid_argument);
}
