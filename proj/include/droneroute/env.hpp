#pragma once

#include <string>
#include <vector>

#include "droneroute/instance.hpp"

namespace droneroute {

struct ActionMask {
  std::vector<uint8_t> ok;  // per node, 1 = selectable
  int count = 0;
};

// One in-flight mission. Holds a non-owning pointer to the instance, which
// must outlive the state. `partial` is the open route of the active drone and
// always starts at the depot; closed routes move to `routes` (empty routes
// are dropped, an idle drone leaves no trace).
struct EnvState {
  const ProblemInstance* inst = nullptr;
  int drone = 1;        // 1-based index of the active drone
  double elapsed = 0.0; // flight time of the active drone so far
  int current = 0;
  std::vector<uint8_t> visited;  // per node; meaningful for value nodes
  int remaining_values = 0;
  double collected = 0.0;
  std::vector<std::vector<int>> routes;
  std::vector<int> partial;
  int forced_first = -1;  // pending forced action, -1 once consumed
  bool done = false;
};

// Single-action feasibility, shared with the exact solvers (they carry their
// own visited representation). Rules: the move must use an edge; a visited
// value node is never reselectable; committing to a node must leave enough
// budget to get home (a value node costs the detour both ways plus the
// cheaper endpoint's depot leg). Selecting the depot at the depot closes the
// route immediately and is always allowed.
template <class VisitedFn>
bool action_allowed(const ProblemInstance& inst, int cur, double elapsed, int action,
                    VisitedFn&& visited) {
  const TransformedNetwork& net = inst.net;
  if (action < 0 || action >= net.node_count()) return false;
  if (action == inst.depot && cur == inst.depot) return true;
  if (!net.adjacent(cur, action)) return false;
  const bool is_value = net.is_value[action] != 0;
  if (is_value && visited(action)) return false;
  const double t = dist(net.coords[cur], net.coords[action]);
  const double commit = is_value ? 2.0 * t : t;
  return !(elapsed + commit + inst.return_leg[action] > inst.budget());
}

EnvState reset(const ProblemInstance& inst, int forced_first = -1);

bool is_terminal(const EnvState& s);

ActionMask feasible_actions(const EnvState& s);

// Applies an unmasked action; returns the value collected by the move.
double step(EnvState& s, int action);

// Forced first nodes for multi-start rollouts: depot-reachable zero-value
// nodes in index order, at most `cap`.
std::vector<int> secondary_starts(const ProblemInstance& inst, int cap);

struct RouteSetReport {
  double value = 0.0;
  bool feasible = true;
  std::vector<std::string> violations;
};

// Independent replay of an arbitrary route set: adjacency, depot endpoints,
// per-route duration, fleet size, single collection per value node.
RouteSetReport evaluate_route_set(const ProblemInstance& inst,
                                  const std::vector<std::vector<int>>& routes);

}  // namespace droneroute
