#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "droneroute/env.hpp"
#include "droneroute/instgen.hpp"
#include "droneroute/io.hpp"
#include "droneroute/linalg.hpp"
#include "droneroute/solvers.hpp"

using namespace droneroute;
using nlohmann::json;

namespace {

RoadNetwork triangle() {
  RoadNetwork net;
  net.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  net.links = {{0, 1, 1.25, 0.4}, {1, 2, 1.5, 0.7}, {0, 2, 1.0, 0.2}};
  return net;
}

ProblemInstance tiny_instance(uint64_t seed = 3) {
  GenSpec g;
  g.n = 4;
  g.a = 4;
  g.seed = seed;
  return generate_instance(g, 2, 2.0, 8.0);
}

}  // namespace

TEST_CASE("file helpers round-trip bytes and report missing paths") {
  const std::string path = "io_helper_probe.bin";
  const std::string payload = std::string("abc\0\n\xff""def", 9);
  write_file(path, payload);
  CHECK(read_file(path) == payload);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_file("no_such_file_here.bin"), std::runtime_error);
}

TEST_CASE("road networks round-trip through json") {
  const RoadNetwork net = triangle();
  const std::string text = road_network_json(net);
  const RoadNetwork back = parse_road_network(text);

  REQUIRE(back.nodes.size() == 3);
  REQUIRE(back.links.size() == 3);
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    CHECK(back.nodes[i].x == net.nodes[i].x);
    CHECK(back.nodes[i].y == net.nodes[i].y);
  }
  for (size_t i = 0; i < net.links.size(); ++i) {
    CHECK(back.links[i].i == net.links[i].i);
    CHECK(back.links[i].j == net.links[i].j);
    CHECK(back.links[i].length == net.links[i].length);
    CHECK(back.links[i].value == net.links[i].value);
  }
  CHECK(road_network_json(back) == text);

  json j = json::parse(text);
  j["format"] = "something-else";
  CHECK_THROWS_WITH_AS(parse_road_network(j.dump()), "road network file: unknown format tag",
                       std::invalid_argument);
  j = json::parse(text);
  j["links"][0]["length"] = 0.1;  // below the chord
  CHECK_THROWS_AS(parse_road_network(j.dump()), std::invalid_argument);
}

TEST_CASE("instances round-trip through json with provenance and caches intact") {
  const ProblemInstance inst = tiny_instance();
  const std::string text = instance_json(inst);
  const ProblemInstance back = parse_instance(text);

  CHECK(back.net.original_count == inst.net.original_count);
  REQUIRE(back.net.node_count() == inst.net.node_count());
  for (int i = 0; i < inst.net.node_count(); ++i) {
    CHECK(back.net.coords[i].x == inst.net.coords[i].x);
    CHECK(back.net.coords[i].y == inst.net.coords[i].y);
    CHECK(back.net.value[i] == inst.net.value[i]);
  }
  CHECK(back.net.edges() == inst.net.edges());
  CHECK(back.depot == inst.depot);
  CHECK(back.K == inst.K);
  CHECK(back.p_max == inst.p_max);
  CHECK(back.Q == inst.Q);
  CHECK(back.seed == inst.seed);
  CHECK(back.return_leg == inst.return_leg);
  CHECK(json::parse(back.provenance) == json::parse(inst.provenance));
  CHECK(instance_json(back) == text);
}

TEST_CASE("instance parser pinpoints malformed transformed networks") {
  const json base = json::parse(instance_json(tiny_instance()));
  const int oc = base.at("network").at("original_count");
  auto dumped = [&](const json& j) { return j.dump(); };

  json j = base;
  j["format"] = "nope";
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)), "instance file: unknown format tag",
                       std::invalid_argument);

  j = base;
  j["network"]["original_count"] = 999;
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)), "instance file: bad original_count",
                       std::invalid_argument);

  j = base;
  j["network"]["edges"].push_back({2, 2});
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)), "instance file: bad edge entry",
                       std::invalid_argument);

  j = base;
  j["network"]["edges"].push_back({oc, oc + 1});
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)), "instance file: edge joins two value nodes",
                       std::invalid_argument);

  // A third endpoint for the first value node.
  j = base;
  {
    int spare = -1;
    for (int o = 0; o < oc; ++o) {
      bool used = false;
      for (const json& e : j["network"]["edges"])
        if ((e.at(0) == o && e.at(1) == oc) || (e.at(0) == oc && e.at(1) == o)) used = true;
      if (!used) spare = o;
    }
    REQUIRE(spare >= 0);
    j["network"]["edges"].push_back({spare, oc});
  }
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)),
                       "instance file: value node with more than two edges",
                       std::invalid_argument);

  j = base;
  {
    json& edges = j["network"]["edges"];
    for (size_t i = 0; i < edges.size(); ++i)
      if (edges[i].at(0) == oc || edges[i].at(1) == oc) {
        edges.erase(i);
        break;
      }
  }
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)), "instance file: value node missing an endpoint",
                       std::invalid_argument);

  // Dropping a link between originals breaks the complete-subgraph shape.
  j = base;
  {
    json& edges = j["network"]["edges"];
    for (size_t i = 0; i < edges.size(); ++i)
      if (edges[i].at(0) < oc && edges[i].at(1) < oc) {
        edges.erase(i);
        break;
      }
  }
  CHECK_THROWS_WITH_AS(parse_instance(dumped(j)),
                       "instance file: edge list does not describe a transformed network",
                       std::invalid_argument);
}

TEST_CASE("route sets serialize with recomputed evaluation") {
  const ProblemInstance inst = tiny_instance();
  const Solution sol = solve_greedy(inst);
  REQUIRE_FALSE(sol.routes.empty());

  const json j = json::parse(route_set_json(inst, sol.routes));
  const RouteSetReport rep = evaluate_route_set(inst, sol.routes);
  CHECK(j.at("routes").get<std::vector<std::vector<int>>>() == sol.routes);
  CHECK(j.at("value").get<double>() == rep.value);
  CHECK(j.at("feasible") == true);
  CHECK(j.at("violations").empty());
  CHECK(parse_route_set(route_set_json(inst, sol.routes)) == sol.routes);

  // A route stranded away from the depot must surface as a violation.
  const std::vector<std::vector<int>> bad = {{inst.depot, (inst.depot + 1) % 4}};
  const json jb = json::parse(route_set_json(inst, bad));
  CHECK(jb.at("feasible") == false);
  CHECK(jb.at("violations").size() >= 1);

  const json js = json::parse(solution_json(inst, sol));
  CHECK(js.at("solver") == sol.solver);
  CHECK(js.at("optimal") == sol.optimal);
  CHECK(js.at("value").get<double>() == rep.value);
  CHECK(js.at("seconds").get<double>() >= 0.0);
}

TEST_CASE("geojson export renders one linestring per drone") {
  // One split link A--B with value node P; both routes trace the same loop,
  // so only the first may count P's value.
  RoadNetwork road;
  road.nodes = {{0.0, 0.0}, {4.0, 0.0}};
  road.links = {{0, 1, 5.0, 0.5}};
  const ProblemInstance inst = make_instance(road, 0, 2, 9.0, 18.0, 1);
  const std::vector<std::vector<int>> routes = {{0, 2, 1, 0}, {0, 2, 1, 0}};

  const json j = json::parse(routes_geojson(inst, routes));
  CHECK(j.at("type") == "FeatureCollection");
  REQUIRE(j.at("features").size() == 2);
  for (int r = 0; r < 2; ++r) {
    const json& f = j.at("features")[r];
    CHECK(f.at("type") == "Feature");
    CHECK(f.at("geometry").at("type") == "LineString");
    REQUIRE(f.at("geometry").at("coordinates").size() == 4);
    CHECK(f.at("geometry").at("coordinates")[1][0].get<double>() == 2.0);
    CHECK(f.at("properties").at("drone") == r + 1);
    CHECK(f.at("properties").at("duration") == doctest::Approx(2.5 + 2.5 + 4.0).epsilon(1e-12));
  }
  CHECK(j.at("features")[0].at("properties").at("value_collected") == doctest::Approx(0.5));
  CHECK(j.at("features")[1].at("properties").at("value_collected") == 0.0);
}

TEST_CASE("embedding dumps are plain shortest-form tsv") {
  Mat m(2, 3);
  m(0, 0) = 0.5;
  m(0, 1) = 1.0;
  m(0, 2) = -2.25;
  m(1, 0) = 0.0;
  m(1, 1) = 1e-3;
  m(1, 2) = 12345.0;
  CHECK(embeddings_tsv(m) == "0.5\t1\t-2.25\n0\t0.001\t12345\n");
}

TEST_CASE("tntp mapping parses defaults and rejects bad settings") {
  const TntpMapping d = parse_tntp_mapping("{}");
  CHECK(d.node_id_col == 0);
  CHECK(d.node_x_col == 1);
  CHECK(d.node_y_col == 2);
  CHECK(d.link_from_col == 0);
  CHECK(d.link_to_col == 1);
  CHECK(d.link_length_col == 3);
  CHECK(d.crs == "planar");
  CHECK(d.length_scale == 1.0);
  CHECK_FALSE(d.merge_reverse);
  CHECK(d.clamp_short_links);
  CHECK(d.value.mode == "uniform");

  const TntpMapping m = parse_tntp_mapping(R"({
    "node_columns": {"id": 1, "x": 2, "y": 3},
    "link_columns": {"from": 0, "to": 1, "length": 4},
    "crs": "wgs84",
    "length_scale": 0.3048,
    "merge_reverse": true,
    "clamp_short_links": false,
    "value": {"mode": "column", "column": 5, "divisor": 4.0}
  })");
  CHECK(m.node_id_col == 1);
  CHECK(m.link_length_col == 4);
  CHECK(m.crs == "wgs84");
  CHECK(m.length_scale == 0.3048);
  CHECK(m.merge_reverse);
  CHECK_FALSE(m.clamp_short_links);
  CHECK(m.value.column == 5);

  CHECK_THROWS_WITH_AS(parse_tntp_mapping(R"({"crs": "utm"})"),
                       "tntp mapping: crs must be planar or wgs84", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_tntp_mapping(R"({"length_scale": 0})"),
                       "tntp mapping: non-positive length_scale", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_tntp_mapping(R"({"value": {"mode": "zipf"}})"),
                       "tntp mapping: value mode must be uniform, column or constant",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_tntp_mapping(R"({"value": {"mode": "column"}})"),
                       "tntp mapping: value mode column needs a column index",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_tntp_mapping(R"({"value": {"divisor": 0}})"),
                       "tntp mapping: non-positive divisor", std::invalid_argument);
}

namespace {

const char* kNodes = R"(<NUMBER OF NODES> 3
~ id x y
node x y
1 0.0 0.0 ;
2 300.0 0.0 ;
3 0.0 400.0 ;
)";

const char* kLinks = R"(<NUMBER OF LINKS> 3
~ from to capacity length
init_node term_node capacity length ;
1 2 900 360.0 ;
2 3 900 505.0 ;
3 1 900 430.0 ;
)";

}  // namespace

TEST_CASE("tntp import reads tables, skips chatter and normalizes") {
  const TntpMapping mapping = parse_tntp_mapping(R"({"value": {"mode": "constant", "constant": 0.5}})");
  const RoadNetwork net = import_tntp(kNodes, kLinks, mapping, 1);

  REQUIRE(net.nodes.size() == 3);
  REQUIRE(net.links.size() == 3);
  // Raw extent is 400 on y, so every coordinate lands in [0,1] at scale 1/400.
  CHECK(net.nodes[0].x == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(net.nodes[0].y == 0.0);
  CHECK(net.nodes[1].x == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(net.nodes[2].y == 1.0);
  for (size_t i = 0; i < net.links.size(); ++i) {
    CHECK(net.links[i].value == 0.5);
    const double chord = dist(net.nodes[net.links[i].i], net.nodes[net.links[i].j]);
    CHECK(net.links[i].length >= chord);
  }
  // Lengths scale with the same factor as the coordinates: 360/400, etc.
  CHECK(net.links[0].length == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(net.links[1].length == doctest::Approx(1.2625).epsilon(1e-12));
}

TEST_CASE("tntp import seeds values deterministically") {
  const TntpMapping uniform = parse_tntp_mapping("{}");
  const RoadNetwork a = import_tntp(kNodes, kLinks, uniform, 7);
  const RoadNetwork b = import_tntp(kNodes, kLinks, uniform, 7);
  const RoadNetwork c = import_tntp(kNodes, kLinks, uniform, 8);
  for (size_t i = 0; i < a.links.size(); ++i) {
    CHECK(a.links[i].value == b.links[i].value);
    CHECK(a.links[i].value >= 0.1);
    CHECK(a.links[i].value <= 1.0);
  }
  bool differs = false;
  for (size_t i = 0; i < a.links.size(); ++i) differs = differs || a.links[i].value != c.links[i].value;
  CHECK(differs);

  const TntpMapping column = parse_tntp_mapping(R"({"value": {"mode": "column", "column": 2, "divisor": 1000}})");
  const RoadNetwork d = import_tntp(kNodes, kLinks, column, 7);
  for (const RoadLink& l : d.links) CHECK(l.value == 0.9);
}

TEST_CASE("reverse duplicate links can be merged or kept") {
  const char* nodes = "1 0 0\n2 300 0\n3 0 400\n";
  const char* links = "1 2 0 360\n2 1 0 360\n2 3 0 505\n3 1 0 430\n";
  const TntpMapping keep = parse_tntp_mapping(R"({"value": {"mode": "constant", "constant": 0.2}})");
  TntpMapping merged = keep;
  merged.merge_reverse = true;

  CHECK(import_tntp(nodes, links, keep, 1).links.size() == 4);
  const RoadNetwork m = import_tntp(nodes, links, merged, 1);
  REQUIRE(m.links.size() == 3);
  CHECK(m.links[0].i == 0);
  CHECK(m.links[0].j == 1);
}

TEST_CASE("tntp import projects geographic coordinates before normalizing") {
  // Latitudes symmetric about the equator keep the projection's reference
  // latitude at exactly zero, so longitude degrees equal latitude degrees.
  const char* nodes = "1 0.0 -0.01\n2 0.0 0.01\n3 0.01 0.0\n";
  const char* links = "1 2 0 4000\n1 3 0 2000\n";
  const TntpMapping mapping = parse_tntp_mapping(
      R"({"crs": "wgs84", "value": {"mode": "constant", "constant": 0.3}})");
  const RoadNetwork net = import_tntp(nodes, links, mapping, 1);

  const double meters_001deg = 6371000.0 * 0.01 * std::acos(-1.0) / 180.0;
  const double chord01 = dist(net.nodes[0], net.nodes[1]);
  const double chord02 = dist(net.nodes[0], net.nodes[2]);
  CHECK(chord01 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chord02 == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(net.links[0].length / chord01 ==
        doctest::Approx(4000.0 / (2.0 * meters_001deg)).epsilon(1e-9));
  CHECK(net.links[1].length / chord02 ==
        doctest::Approx(2000.0 / (std::sqrt(2.0) * meters_001deg)).epsilon(1e-9));
}

TEST_CASE("tntp errors carry the offending line number") {
  const TntpMapping mapping = parse_tntp_mapping(R"({"value": {"mode": "constant", "constant": 0.1}})");
  TntpMapping strict = mapping;
  strict.clamp_short_links = false;

  CHECK_THROWS_WITH_AS(import_tntp("~ only chatter\n", kLinks, mapping, 1),
                       "tntp: node file has no data rows", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp(kNodes, "<META> 1\n", mapping, 1),
                       "tntp: link file has no data rows", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp("1 0 0\n2 300 0\n2 0 400\n", kLinks, mapping, 1),
                       "tntp: duplicate node id 2 at line 3", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp("1 0 0\n2 300 zz\n3 0 400\n", kLinks, mapping, 1),
                       "tntp: bad coordinate at line 2", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp("1 0\n", kLinks, mapping, 1),
                       "tntp: missing y column at line 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp(kNodes, "1 9 0 360\n", mapping, 1),
                       "tntp: link references unknown node at line 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp(kNodes, "2 2 0 360\n", mapping, 1),
                       "tntp: self-loop at line 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp(kNodes, "1 2 0 -4\n", mapping, 1),
                       "tntp: bad link length at line 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS(import_tntp(kNodes, "1 2 0 360\n~\n1 3 0 1\n", strict, 1),
                       "tntp: link shorter than node distance at line 3", std::invalid_argument);

  // The default clamp lifts a short link just above its chord instead.
  const RoadNetwork clamped = import_tntp(kNodes, "1 2 0 360\n1 3 0 1\n", mapping, 1);
  CHECK(clamped.links[0].length == doctest::Approx(0.9).epsilon(1e-12));
  const double chord = dist(clamped.nodes[0], clamped.nodes[2]);
  CHECK(clamped.links[1].length == doctest::Approx(chord * (1.0 + 1e-9)).epsilon(1e-15));
  CHECK(clamped.links[1].length > chord);
}
