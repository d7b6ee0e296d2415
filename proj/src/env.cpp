#include "droneroute/env.hpp"

#include <sstream>
#include <stdexcept>

namespace droneroute {

namespace {

bool state_action_allowed(const EnvState& s, int action) {
  if (s.forced_first >= 0) return action == s.forced_first;
  return action_allowed(*s.inst, s.current, s.elapsed, action,
                        [&](int i) { return s.visited[i] != 0; });
}

}  // namespace

EnvState reset(const ProblemInstance& inst, int forced_first) {
  EnvState s;
  s.inst = &inst;
  s.current = inst.depot;
  s.visited.assign(inst.net.node_count(), 0);
  s.remaining_values = inst.net.value_count();
  s.partial = {inst.depot};
  if (s.remaining_values == 0) {
    s.done = true;
    s.partial.clear();
  }
  if (forced_first >= 0) {
    if (s.done) throw std::invalid_argument("reset: forced start on an already-terminal instance");
    if (forced_first >= inst.net.node_count() || forced_first == inst.depot ||
        inst.net.is_value[forced_first] ||
        !action_allowed(inst, inst.depot, 0.0, forced_first, [](int) { return false; }))
      throw std::invalid_argument("reset: invalid forced first node");
    s.forced_first = forced_first;
  }
  return s;
}

bool is_terminal(const EnvState& s) { return s.done; }

ActionMask feasible_actions(const EnvState& s) {
  if (s.done) throw std::logic_error("feasible_actions: terminal state");
  const int n = s.inst->net.node_count();
  ActionMask m;
  m.ok.assign(n, 0);
  if (s.forced_first >= 0) {
    m.ok[s.forced_first] = 1;
    m.count = 1;
    return m;
  }
  for (int i = 0; i < n; ++i) {
    if (state_action_allowed(s, i)) {
      m.ok[i] = 1;
      ++m.count;
    }
  }
  return m;
}

double step(EnvState& s, int action) {
  if (s.done) throw std::logic_error("step: terminal state");
  if (!state_action_allowed(s, action)) throw std::invalid_argument("step: infeasible action");
  s.forced_first = -1;
  const ProblemInstance& inst = *s.inst;
  if (action == inst.depot) {
    if (static_cast<int>(s.partial.size()) > 1) {
      s.elapsed += dist(inst.net.coords[s.current], inst.net.coords[inst.depot]);
      s.partial.push_back(inst.depot);
      s.routes.push_back(std::move(s.partial));
    }
    s.partial.clear();
    ++s.drone;
    s.elapsed = 0.0;
    s.current = inst.depot;
    if (s.drone > inst.K || s.remaining_values == 0)
      s.done = true;
    else
      s.partial = {inst.depot};
    return 0.0;
  }
  s.elapsed += dist(inst.net.coords[s.current], inst.net.coords[action]);
  s.current = action;
  s.partial.push_back(action);
  if (inst.net.is_value[action] && !s.visited[action]) {
    s.visited[action] = 1;
    --s.remaining_values;
    s.collected += inst.net.value[action];
    return inst.net.value[action];
  }
  return 0.0;
}

std::vector<int> secondary_starts(const ProblemInstance& inst, int cap) {
  std::vector<int> out;
  for (int i = 0; i < inst.net.original_count && static_cast<int>(out.size()) < cap; ++i) {
    if (i == inst.depot) continue;
    if (action_allowed(inst, inst.depot, 0.0, i, [](int) { return false; })) out.push_back(i);
  }
  return out;
}

RouteSetReport evaluate_route_set(const ProblemInstance& inst,
                                  const std::vector<std::vector<int>>& routes) {
  RouteSetReport rep;
  const TransformedNetwork& net = inst.net;
  auto flag = [&rep](const std::string& msg) { rep.violations.push_back(msg); };
  if (static_cast<int>(routes.size()) > inst.K)
    flag("route set uses " + std::to_string(routes.size()) + " drones, fleet has " +
         std::to_string(inst.K));
  std::vector<int> visits(net.node_count(), 0);
  for (size_t r = 0; r < routes.size(); ++r) {
    const std::vector<int>& route = routes[r];
    const std::string tag = "route " + std::to_string(r);
    if (route.empty()) {
      flag(tag + ": empty sequence");
      continue;
    }
    bool indices_ok = true;
    for (int node : route)
      if (node < 0 || node >= net.node_count()) {
        flag(tag + ": node index " + std::to_string(node) + " out of range");
        indices_ok = false;
      }
    if (!indices_ok) continue;
    if (route.front() != inst.depot) flag(tag + ": does not start at the depot");
    if (route.back() != inst.depot) flag(tag + ": does not end at the depot");
    for (size_t i = 1; i + 1 < route.size(); ++i)
      if (route[i] == inst.depot) {
        flag(tag + ": depot appears mid-route");
        break;
      }
    double duration = 0.0;
    for (size_t i = 1; i < route.size(); ++i) {
      const int a = route[i - 1], b = route[i];
      if (a == inst.depot && b == inst.depot) continue;  // immediate close, zero cost
      if (!net.adjacent(a, b)) {
        flag(tag + ": no edge between " + std::to_string(a) + " and " + std::to_string(b));
        continue;
      }
      duration += dist(net.coords[a], net.coords[b]);
      if (net.is_value[b]) {
        if (++visits[b] == 1)
          rep.value += net.value[b];
        else
          flag("value node " + std::to_string(b) + " collected more than once");
      }
    }
    if (duration > inst.budget()) {
      std::ostringstream os;
      os << tag << ": duration " << duration << " exceeds budget " << inst.budget();
      flag(os.str());
    }
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

}  // namespace droneroute
