#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "droneroute/transformed.hpp"

using namespace droneroute;

namespace {

RoadNetwork triangle() {
  RoadNetwork net;
  net.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.5, 1.0}};
  net.links = {{0, 1, 1.2, 0.4}, {1, 2, 1.3, 0.7}, {0, 2, 1.2, 0.2}};
  return net;
}

}  // namespace

TEST_CASE("road network validator catches structural defects") {
  CHECK_NOTHROW(validate_road_network(triangle()));

  RoadNetwork bad = triangle();
  bad.links[0].j = 3;
  CHECK_THROWS_AS(validate_road_network(bad), std::invalid_argument);

  bad = triangle();
  bad.links[0].j = 0;
  CHECK_THROWS_AS(validate_road_network(bad), std::invalid_argument);

  bad = triangle();
  bad.links[0].length = 0.5;  // below the chord
  CHECK_THROWS_AS(validate_road_network(bad), std::invalid_argument);

  bad = triangle();
  bad.links[0].value = -1.0;
  CHECK_THROWS_AS(validate_road_network(bad), std::invalid_argument);

  bad = triangle();
  bad.nodes[1] = bad.nodes[0];
  CHECK_THROWS_AS(validate_road_network(bad), std::invalid_argument);
}

TEST_CASE("connectivity is enforced only when links exist") {
  RoadNetwork isolated;
  isolated.nodes = {{0, 0}, {1, 0}, {0, 1}};
  CHECK(!road_connected(isolated));
  CHECK_NOTHROW(validate_road_network(isolated, true));

  RoadNetwork partial = isolated;
  partial.links = {{0, 1, 1.0, 0.5}};
  CHECK(!road_connected(partial));
  CHECK_THROWS_AS(validate_road_network(partial, true), std::invalid_argument);
  CHECK_NOTHROW(validate_road_network(partial, false));

  CHECK(road_connected(triangle()));
}

TEST_CASE("transform keeps originals and appends one value node per link") {
  const TransformedNetwork net = transform_network(triangle(), 42);
  CHECK(net.original_count == 3);
  CHECK(net.node_count() == 6);
  CHECK(net.value_count() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(net.coords[i] == triangle().nodes[i]);
    CHECK(net.value[i] == 0.0);
    CHECK(!net.is_value[i]);
  }
  CHECK(net.value[3] == 0.4);
  CHECK(net.value[4] == 0.7);
  CHECK(net.value[5] == 0.2);
}

TEST_CASE("value nodes sit half the road length from both endpoints") {
  const TransformedNetwork net = transform_network(triangle(), 42);
  for (int p = net.original_count; p < net.node_count(); ++p) {
    const double half =
        triangle().links[static_cast<size_t>(p) - net.original_count].length / 2.0;
    CHECK(std::abs(dist(net.coords[p], net.coords[net.end_a[p]]) - half) <= 1e-9);
    CHECK(std::abs(dist(net.coords[p], net.coords[net.end_b[p]]) - half) <= 1e-9);
  }
  CHECK_NOTHROW(validate_transformed(net));
}

TEST_CASE("adjacency: originals complete, value nodes only touch their endpoints") {
  const TransformedNetwork net = transform_network(triangle(), 42);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(net.adjacent(i, j) == (i != j));
  for (int p = 3; p < 6; ++p) {
    for (int o = 0; o < 3; ++o)
      CHECK(net.adjacent(p, o) == (o == net.end_a[p] || o == net.end_b[p]));
    for (int q = 3; q < 6; ++q) CHECK(!net.adjacent(p, q));
  }
  CHECK(net.travel_time(0, 1) == doctest::Approx(1.0));
  CHECK(net.travel_time(3, net.end_a[3]) == doctest::Approx(0.6));
  CHECK_THROWS_AS(net.travel_time(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(net.travel_time(0, 99), std::out_of_range);
}

TEST_CASE("edge list is the complete original clique plus two legs per value node") {
  const TransformedNetwork net = transform_network(triangle(), 42);
  const auto edges = net.edges();
  CHECK(edges.size() == 3 + 6);
  const std::set<std::pair<int, int>> set(edges.begin(), edges.end());
  CHECK(set.size() == edges.size());
  CHECK(set.count({0, 1}));
  CHECK(set.count({0, 3}));
  CHECK(set.count({1, 3}));
  // Sorted lexicographically.
  for (size_t e = 1; e < edges.size(); ++e) CHECK(edges[e - 1] < edges[e]);
}

TEST_CASE("transform is deterministic in the seed") {
  const TransformedNetwork a = transform_network(triangle(), 7);
  const TransformedNetwork b = transform_network(triangle(), 7);
  for (int i = 0; i < a.node_count(); ++i) CHECK(a.coords[i] == b.coords[i]);

  // Across many seeds both placement sides occur for the same link.
  bool above = false, below = false;
  for (uint64_t s = 0; s < 32; ++s) {
    const TransformedNetwork t = transform_network(triangle(), s);
    (t.coords[3].y < 0.0 ? below : above) = true;
  }
  CHECK(above);
  CHECK(below);
}

TEST_CASE("duplicate link placement flips to the mirror side") {
  RoadNetwork dup;
  dup.nodes = {{0.0, 0.0}, {4.0, 0.0}};
  dup.links = {{0, 1, 5.0, 0.3}, {0, 1, 5.0, 0.6}};
  const TransformedNetwork net = transform_network(dup, 11);
  CHECK(net.node_count() == 4);
  CHECK(net.coords[2].x == doctest::Approx(2.0));
  CHECK(net.coords[3].x == doctest::Approx(2.0));
  CHECK(net.coords[2].y == doctest::Approx(-net.coords[3].y));
  CHECK_NOTHROW(validate_transformed(net));

  // A third copy has nowhere to go.
  dup.links.push_back({0, 1, 5.0, 0.9});
  CHECK_THROWS_AS(transform_network(dup, 11), std::invalid_argument);
}

TEST_CASE("a node sitting exactly on the split point forces the mirror side") {
  RoadNetwork road;
  road.nodes = {{0.0, 0.0}, {4.0, 0.0}, {2.0, 1.5}};
  road.links = {{0, 1, 5.0, 0.3}, {1, 2, 2.5, 0.1}, {0, 2, 2.5, 0.1}};
  for (uint64_t s = 0; s < 16; ++s) {
    const TransformedNetwork net = transform_network(road, s);
    CHECK(net.coords[3].y == doctest::Approx(-1.5));  // (2.0, +1.5) is taken
  }
}

TEST_CASE("transformed validator catches tampering") {
  const TransformedNetwork good = transform_network(triangle(), 42);

  TransformedNetwork bad = good;
  bad.value[0] = 1.0;
  CHECK_THROWS_AS(validate_transformed(bad), std::invalid_argument);

  bad = good;
  bad.coords[3].x += 0.1;  // breaks equidistance
  CHECK_THROWS_AS(validate_transformed(bad), std::invalid_argument);

  bad = good;
  bad.end_b[3] = bad.end_a[3];
  CHECK_THROWS_AS(validate_transformed(bad), std::invalid_argument);

  bad = good;
  bad.is_value[3] = 0;
  CHECK_THROWS_AS(validate_transformed(bad), std::invalid_argument);

  bad = good;
  bad.value[4] = -0.5;
  CHECK_THROWS_AS(validate_transformed(bad), std::invalid_argument);
}
