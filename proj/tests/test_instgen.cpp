#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "droneroute/env.hpp"
#include "droneroute/instgen.hpp"
#include "droneroute/solvers.hpp"

using namespace droneroute;

TEST_CASE("lattice size and candidate link count") {
  const RoadNetwork g30 = generate_grid(30);
  CHECK(g30.nodes.size() == 30);
  CHECK(g30.links.size() == 49);

  const RoadNetwork g4 = generate_grid(4);
  CHECK(g4.nodes.size() == 4);
  CHECK(g4.links.size() == 4);

  const RoadNetwork g9 = generate_grid(9);
  CHECK(g9.nodes.size() == 9);
  CHECK(g9.links.size() == 12);

  CHECK(road_connected(g30));
  CHECK_THROWS_AS(generate_grid(3), std::invalid_argument);
}

TEST_CASE("lattice fills the unit square row by row") {
  const RoadNetwork g9 = generate_grid(9);
  CHECK(g9.nodes[0] == Point{0.0, 0.0});
  CHECK(g9.nodes[2] == Point{1.0, 0.0});
  CHECK(g9.nodes[8] == Point{1.0, 1.0});
  CHECK(g9.nodes[4] == Point{0.5, 0.5});
}

TEST_CASE("pruning hits the target count and preserves connectivity") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const RoadNetwork net = prune_links(generate_grid(30), 36, 2.0, rng);
    CHECK(net.links.size() == 36);
    CHECK(road_connected(net));
  }
}

TEST_CASE("pruning can cut all the way down to a spanning tree") {
  Rng rng(3);
  const RoadNetwork net = prune_links(generate_grid(16), 15, 2.0, rng);
  CHECK(net.links.size() == 15);
  CHECK(road_connected(net));

  Rng rng2(3);
  CHECK_THROWS_AS(prune_links(generate_grid(16), 14, 2.0, rng2), std::invalid_argument);
}

TEST_CASE("boundary weighting biases removals toward the rim") {
  // With a huge weight every removable boundary link goes before any
  // interior one; count surviving boundary links against weight zero.
  auto boundary_links = [](const RoadNetwork& net) {
    int count = 0;
    for (const RoadLink& l : net.links) {
      const Point& a = net.nodes[l.i];
      const Point& b = net.nodes[l.j];
      auto rim = [](const Point& p) {
        return p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
      };
      if (rim(a) || rim(b)) ++count;
    }
    return count;
  };
  int with_weight = 0, without = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng heavy(seed), flat(seed);
    with_weight += boundary_links(prune_links(generate_grid(25), 26, 1000.0, heavy));
    without += boundary_links(prune_links(generate_grid(25), 26, 0.0, flat));
  }
  CHECK(with_weight < without);
}

TEST_CASE("perturbation stays within delta of the lattice spacing") {
  const RoadNetwork base = generate_grid(30);
  Rng rng(9);
  const RoadNetwork moved = perturb_nodes(base, 0.4, rng);
  const double spacing = 1.0 / 5.0;
  for (size_t i = 0; i < base.nodes.size(); ++i) {
    CHECK(std::abs(moved.nodes[i].x - base.nodes[i].x) <= 0.4 * spacing + 1e-12);
    CHECK(std::abs(moved.nodes[i].y - base.nodes[i].y) <= 0.4 * spacing + 1e-12);
    CHECK(moved.nodes[i].x >= 0.0);
    CHECK(moved.nodes[i].x <= 1.0);
    CHECK(moved.nodes[i].y >= 0.0);
    CHECK(moved.nodes[i].y <= 1.0);
  }
  CHECK_THROWS_AS(perturb_nodes(base, 0.5, rng), std::invalid_argument);
}

TEST_CASE("attributes fall in the configured ranges") {
  GenSpec spec;
  spec.seed = 17;
  const RoadNetwork net = generate_road_network(spec);
  CHECK(net.links.size() == 36);
  for (const RoadLink& l : net.links) {
    const double chord = dist(net.nodes[l.i], net.nodes[l.j]);
    CHECK(l.length >= chord - 1e-12);
    CHECK(l.length <= 2.0 * chord + 1e-12);
    CHECK(l.value >= 0.1);
    CHECK(l.value <= 1.0);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  GenSpec spec;
  spec.seed = 123;
  const RoadNetwork a = generate_road_network(spec);
  const RoadNetwork b = generate_road_network(spec);
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.links.size() == b.links.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i] == b.nodes[i]);
  for (size_t i = 0; i < a.links.size(); ++i) {
    CHECK(a.links[i].i == b.links[i].i);
    CHECK(a.links[i].length == b.links[i].length);
    CHECK(a.links[i].value == b.links[i].value);
  }

  spec.seed = 124;
  const RoadNetwork c = generate_road_network(spec);
  bool differs = false;
  for (size_t i = 0; i < a.nodes.size() && !differs; ++i)
    differs = !(a.nodes[i] == c.nodes[i]);
  CHECK(differs);
}

TEST_CASE("generated instances pass validation and expose fleet parameters") {
  GenSpec spec;
  spec.seed = 5;
  const ProblemInstance inst = generate_instance(spec, 3, 1.5, 6.0);
  CHECK_NOTHROW(validate_instance(inst));
  CHECK(inst.K == 3);
  CHECK(inst.p_max == 1.5);
  CHECK(inst.Q == 6.0);
  CHECK(inst.budget() == 1.5);
  CHECK(inst.net.original_count == 30);
  CHECK(inst.net.value_count() == 36);
  CHECK(inst.depot >= 0);
  CHECK(inst.depot < 30);
  CHECK(!inst.net.is_value[inst.depot]);
  // return_leg: direct depot distance for originals, cheaper endpoint leg for
  // value nodes.
  CHECK(inst.return_leg[inst.depot] == 0.0);
  for (int p = inst.net.original_count; p < inst.net.node_count(); ++p) {
    const double ta = dist(inst.net.coords[inst.net.end_a[p]], inst.net.coords[inst.depot]);
    const double tb = dist(inst.net.coords[inst.net.end_b[p]], inst.net.coords[inst.depot]);
    CHECK(inst.return_leg[p] == std::min(ta, tb));
  }
}

TEST_CASE("gen spec json round-trips and rejects bad values") {
  GenSpec spec;
  spec.n = 20;
  spec.a = 25;
  spec.seed = 99;
  const GenSpec back = gen_spec_from_json(gen_spec_to_json(spec));
  CHECK(back.n == 20);
  CHECK(back.a == 25);
  CHECK(back.seed == 99);
  CHECK(back.delta == spec.delta);

  CHECK_THROWS_AS(gen_spec_from_json({{"n", 2}}), std::invalid_argument);
  CHECK_THROWS_AS(gen_spec_from_json({{"delta", 0.6}}), std::invalid_argument);
  CHECK_THROWS_AS(gen_spec_from_json({{"scale_lo", 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(gen_spec_from_json({{"value_lo", 5.0}, {"value_hi", 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("eightfold augmentation fixes the frozen example point") {
  GenSpec spec;
  spec.n = 9;
  spec.a = 10;
  spec.seed = 2;
  ProblemInstance inst = generate_instance(spec, 2, 2.0, 8.0);
  inst.net.coords[0] = {0.2, 0.7};
  const auto variants = augment_8fold(inst);
  CHECK(variants[0].net.coords[0] == Point{0.2, 0.7});
  CHECK(variants[1].net.coords[0].x == doctest::Approx(0.8));
  CHECK(variants[1].net.coords[0].y == doctest::Approx(0.7));
  CHECK(variants[4].net.coords[0].x == doctest::Approx(0.7));
  CHECK(variants[4].net.coords[0].y == doctest::Approx(0.2));
  CHECK(variants[7].net.coords[0].x == doctest::Approx(0.3));
  CHECK(variants[7].net.coords[0].y == doctest::Approx(0.8));
}

TEST_CASE("augmentation preserves all pairwise distances") {
  GenSpec spec;
  spec.seed = 31;
  const ProblemInstance inst = generate_instance(spec, 2, 2.0, 8.0);
  const auto variants = augment_8fold(inst);
  const int n = inst.net.node_count();
  for (const ProblemInstance& v : variants) {
    REQUIRE(v.net.node_count() == n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        CHECK(std::abs(dist(v.net.coords[i], v.net.coords[j]) -
                       dist(inst.net.coords[i], inst.net.coords[j])) <= 1e-12);
    CHECK(v.depot == inst.depot);
    CHECK(v.K == inst.K);
    for (int i = 0; i < n; ++i) CHECK(v.net.value[i] == inst.net.value[i]);
  }
}

TEST_CASE("a route keeps its collected value under every augmentation") {
  GenSpec spec;
  spec.n = 12;
  spec.a = 14;
  spec.seed = 8;
  const ProblemInstance inst = generate_instance(spec, 2, 2.0, 8.0);
  const Solution sol = solve_greedy(inst);
  REQUIRE(sol.value > 0.0);
  for (const ProblemInstance& v : augment_8fold(inst)) {
    const RouteSetReport rep = evaluate_route_set(v, sol.routes);
    CHECK(rep.feasible);
    CHECK(rep.value == doctest::Approx(sol.value).epsilon(1e-12));
  }
}

TEST_CASE("instance validator rejects broken fleet parameters") {
  GenSpec spec;
  spec.n = 9;
  spec.a = 10;
  spec.seed = 4;
  const ProblemInstance good = generate_instance(spec, 2, 2.0, 8.0);

  ProblemInstance bad = good;
  bad.K = 0;
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);

  bad = good;
  bad.depot = bad.net.node_count();
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);

  bad = good;
  bad.depot = bad.net.original_count;  // a value node cannot host the depot
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);

  bad = good;
  bad.p_max = 0.0;
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);

  bad = good;
  bad.Q = -1.0;
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);

  bad = good;
  bad.return_leg[0] += 0.5;  // stale cache
  CHECK_THROWS_AS(validate_instance(bad), std::invalid_argument);
}
