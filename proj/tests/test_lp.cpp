#include <doctest.h>

#include <stdexcept>
#include <string>

#include "droneroute/instgen.hpp"
#include "droneroute/lp.hpp"
#include "droneroute/solvers.hpp"

using namespace droneroute;

namespace {

// Depot plus a two-endpoint damaged road: d(0,0), o1(4,0), o2(8,0), P(6,1.5)
// on link o1-o2 of length 5, value 0.9.
ProblemInstance toy(double budget = 17.0) {
  TransformedNetwork net;
  net.original_count = 3;
  net.coords = {{0.0, 0.0}, {4.0, 0.0}, {8.0, 0.0}, {6.0, 1.5}};
  net.value = {0.0, 0.0, 0.0, 0.9};
  net.is_value = {0, 0, 0, 1};
  net.end_a = {-1, -1, -1, 1};
  net.end_b = {-1, -1, -1, 2};
  return pack_instance(std::move(net), 0, 1, budget, budget, 0);
}

constexpr const char* kGolden =
    "Maximize\n"
    " obj: 0.9 x_1_3_1 + 0.9 x_1_3_2\n"
    "Subject To\n"
    " visit_3: x_1_3_1 + x_1_3_2 <= 1\n"
    " flow_1_0: - x_1_0_1 - x_1_0_2 + x_1_1_0 + x_1_2_0 = 0\n"
    " flow_1_1: x_1_0_1 - x_1_1_0 - x_1_1_2 - x_1_1_3 + x_1_2_1 + x_1_3_1 = 0\n"
    " flow_1_2: x_1_0_2 + x_1_1_2 - x_1_2_0 - x_1_2_1 - x_1_2_3 + x_1_3_2 = 0\n"
    " flow_1_3: x_1_1_3 + x_1_2_3 - x_1_3_1 - x_1_3_2 = 0\n"
    " depart_1: x_1_0_1 + x_1_0_2 = 1\n"
    " return_1: x_1_1_0 + x_1_2_0 = 1\n"
    " battery_1: 4 x_1_0_1 + 8 x_1_0_2 + 4 x_1_1_0 + 4 x_1_1_2 + 2.5 x_1_1_3 + 8 x_1_2_0 +"
    " 4 x_1_2_1 + 2.5 x_1_2_3 + 2.5 x_1_3_1 + 2.5 x_1_3_2 <= 17\n"
    " duration_1: 4 x_1_0_1 + 8 x_1_0_2 + 4 x_1_1_0 + 4 x_1_1_2 + 2.5 x_1_1_3 + 8 x_1_2_0 +"
    " 4 x_1_2_1 + 2.5 x_1_2_3 + 2.5 x_1_3_1 + 2.5 x_1_3_2 <= 17\n"
    " order_1_1_2: u_1_1 - u_1_2 + 4 x_1_1_2 <= 3\n"
    " order_1_1_3: u_1_1 - u_1_3 + 4 x_1_1_3 <= 3\n"
    " order_1_2_1: u_1_2 - u_1_1 + 4 x_1_2_1 <= 3\n"
    " order_1_2_3: u_1_2 - u_1_3 + 4 x_1_2_3 <= 3\n"
    " order_1_3_1: u_1_3 - u_1_1 + 4 x_1_3_1 <= 3\n"
    " order_1_3_2: u_1_3 - u_1_2 + 4 x_1_3_2 <= 3\n"
    "Bounds\n"
    " 1 <= u_1_0 <= 4\n"
    " 1 <= u_1_1 <= 4\n"
    " 1 <= u_1_2 <= 4\n"
    " 1 <= u_1_3 <= 4\n"
    "Binaries\n"
    " x_1_0_1 x_1_0_2 x_1_1_0 x_1_1_2 x_1_1_3 x_1_2_0 x_1_2_1 x_1_2_3 x_1_3_1 x_1_3_2\n"
    "Generals\n"
    " u_1_0 u_1_1 u_1_2 u_1_3\n"
    "End\n";

}  // namespace

TEST_CASE("model has one route variable per drone and arc, one order per node") {
  const LpModel m = build_lp(toy());
  // 3 original pairs plus 2 value legs, both directions, one drone.
  CHECK(m.binaries.size() == 10);
  CHECK(m.generals.size() == 4);
  CHECK(m.bounds.size() == 4);
  // visit 1, flow 4, depart/return 2, battery/duration 2, order 6.
  CHECK(m.constraints.size() == 15);
  CHECK(m.maximize);
  CHECK(m.objective.size() == 2);

  int orders = 0;
  for (const LpConstraint& c : m.constraints)
    if (c.name.rfind("order_", 0) == 0) {
      ++orders;
      // Ordering never touches the depot, so drones may loop through it.
      CHECK(c.name.find("_0") == std::string::npos);
    }
  CHECK(orders == 6);
}

TEST_CASE("variables scale with the fleet") {
  ProblemInstance inst = toy();
  inst.K = 3;
  const LpModel m = build_lp(inst);
  CHECK(m.binaries.size() == 30);
  CHECK(m.generals.size() == 12);
  // visit stays fleet-wide: 1 + 3*(4 + 2 + 2 + 6).
  CHECK(m.constraints.size() == 43);
}

TEST_CASE("rendered model matches the golden text byte for byte") {
  CHECK(emit_lp(toy()) == kGolden);
}

TEST_CASE("rendering is deterministic") {
  GenSpec spec;
  spec.n = 9;
  spec.a = 10;
  spec.seed = 14;
  const ProblemInstance inst = generate_instance(spec, 2, 2.0, 8.0);
  const std::string a = emit_lp(inst);
  const std::string b = emit_lp(inst);
  CHECK(a == b);
  CHECK(a.find("End\n") != std::string::npos);
  // Continuation lines keep the file within the CPLEX line-length habit.
  size_t start = 0;
  while (start < a.size()) {
    size_t end = a.find('\n', start);
    if (end == std::string::npos) end = a.size();
    CHECK(end - start <= 220);
    start = end + 1;
  }
}

TEST_CASE("parse and render round-trip byte for byte") {
  GenSpec spec;
  spec.n = 9;
  spec.a = 10;
  spec.seed = 3;
  const ProblemInstance inst = generate_instance(spec, 2, 2.0, 8.0);
  const std::string text = emit_lp(inst);
  const LpModel parsed = parse_lp(text);
  CHECK(render_lp(parsed) == text);

  const LpModel golden = parse_lp(kGolden);
  CHECK(render_lp(golden) == kGolden);
  CHECK(golden.constraints.size() == 15);
  CHECK(golden.constraints[1].rel == '=');
  CHECK(golden.constraints[0].rel == '<');
  CHECK(golden.constraints[0].rhs == 1.0);
  CHECK(golden.bounds[0].lo == 1.0);
  CHECK(golden.bounds[0].hi == 4.0);
}

TEST_CASE("parser rejects malformed text") {
  CHECK_THROWS_AS(parse_lp(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_lp("Maximize\n obj: 1 x\nSubject To\n c: x ? 1\nEnd\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_lp("Maximize\n obj: 1 x\nSubject To\n c: x <= \nEnd\n"),
                  std::invalid_argument);
}

TEST_CASE("ordering constraints price out the revisit that the search allows") {
  // Budget 17 admits the loop-free tour d>o1>P>o2>d (cost 17).
  const ProblemInstance wide = toy(17.0);
  CHECK(solve_exact_norevisit(wide).value == doctest::Approx(0.9));
  // Budget 14 only admits d>o1>P>o1>d (cost 13), which revisits o1.
  const ProblemInstance tight = toy(14.0);
  CHECK(solve_exact_dfs(tight).value == doctest::Approx(0.9));
  CHECK(solve_exact_norevisit(tight).value == 0.0);
}
