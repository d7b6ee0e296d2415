#include "droneroute/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace droneroute {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct DfsSearch {
  const ProblemInstance& inst;
  bool norevisit;
  long budget;
  long expansions = 0;
  bool aborted = false;

  double best_value = 0.0;  // the empty route set is the baseline solution
  std::vector<std::vector<int>> best_routes;

  std::vector<uint8_t> visited;
  std::vector<uint8_t> onpath;  // nodes of the open route, norevisit only
  std::vector<std::vector<int>> routes;
  std::vector<int> partial;
  double collected = 0.0;
  double remaining = 0.0;

  DfsSearch(const ProblemInstance& i, bool norev, long b) : inst(i), norevisit(norev), budget(b) {
    visited.assign(inst.net.node_count(), 0);
    onpath.assign(inst.net.node_count(), 0);
    partial = {inst.depot};
    remaining = inst.total_value();
  }

  bool allowed(int cur, double elapsed, int action) const {
    if (!action_allowed(inst, cur, elapsed, action, [&](int i) { return visited[i] != 0; }))
      return false;
    // The depot is exempt: reaching it closes the route rather than revisiting.
    if (norevisit && action != inst.depot && onpath[action]) return false;
    return true;
  }

  void record() {
    if (collected > best_value) {
      best_value = collected;
      best_routes = routes;
    }
  }

  // Nothing left to collect: take the cheapest legal way home and record.
  // From a value node the exit leg equals the entry leg, so the budget check
  // that admitted the node also covers leaving through the nearer endpoint.
  void go_home_and_record(int cur) {
    std::vector<int> closed = partial;
    if (inst.net.is_value[cur]) {
      const int a = inst.net.end_a[cur], b = inst.net.end_b[cur];
      const double da = dist(inst.net.coords[a], inst.net.coords[inst.depot]);
      const double db = dist(inst.net.coords[b], inst.net.coords[inst.depot]);
      closed.push_back(da <= db ? a : b);
    }
    closed.push_back(inst.depot);
    routes.push_back(std::move(closed));
    record();
    routes.pop_back();
  }

  void search(int drone, int cur, double elapsed) {
    if (aborted) return;
    if (++expansions > budget) {
      aborted = true;
      return;
    }
    if (collected + remaining <= best_value) return;

    const bool at_route_start = cur == inst.depot && partial.size() == 1;
    if (at_route_start) {
      // Stopping here grounds the remaining drones. Flying an empty route and
      // continuing with the next drone reaches an identical state, so only
      // the full stop is explored.
      record();
    } else if (remaining <= 0.0 && !norevisit) {
      go_home_and_record(cur);
      return;
    }

    struct Cand {
      int node;
      double key;
    };
    std::vector<Cand> values, zeros;
    bool depot_ok = false;
    for (int i = 0; i < inst.net.node_count(); ++i) {
      if (!allowed(cur, elapsed, i)) continue;
      if (i == inst.depot) {
        depot_ok = true;
      } else if (inst.net.is_value[i]) {
        values.push_back({i, -inst.net.value[i] / dist(inst.net.coords[cur], inst.net.coords[i])});
      } else {
        zeros.push_back({i, dist(inst.net.coords[cur], inst.net.coords[i])});
      }
    }
    auto by_key = [](const Cand& a, const Cand& b) { return a.key < b.key; };
    std::stable_sort(values.begin(), values.end(), by_key);
    std::stable_sort(zeros.begin(), zeros.end(), by_key);

    auto move_to = [&](int node) {
      const double t = dist(inst.net.coords[cur], inst.net.coords[node]);
      const bool collects = inst.net.is_value[node] && !visited[node];
      if (collects) {
        visited[node] = 1;
        collected += inst.net.value[node];
        remaining -= inst.net.value[node];
      }
      if (norevisit) onpath[node] = 1;
      partial.push_back(node);
      search(drone, node, elapsed + t);
      partial.pop_back();
      if (norevisit) onpath[node] = 0;
      if (collects) {
        visited[node] = 0;
        collected -= inst.net.value[node];
        remaining += inst.net.value[node];
      }
    };

    for (const Cand& c : values) {
      move_to(c.node);
      if (aborted) return;
    }
    if (depot_ok && !at_route_start) {
      partial.push_back(inst.depot);
      routes.push_back(partial);
      std::vector<int> open = std::move(partial);
      std::vector<uint8_t> open_flags;
      if (norevisit) {
        open_flags = std::move(onpath);
        onpath.assign(inst.net.node_count(), 0);
      }
      partial = {inst.depot};
      if (drone + 1 > inst.K || remaining <= 0.0)
        record();
      else
        search(drone + 1, inst.depot, 0.0);
      partial = std::move(open);
      partial.pop_back();
      routes.pop_back();
      if (norevisit) onpath = std::move(open_flags);
      if (aborted) return;
    }
    for (const Cand& c : zeros) {
      move_to(c.node);
      if (aborted) return;
    }
  }
};

Solution run_dfs(const ProblemInstance& inst, bool norevisit, long node_budget,
                 const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  DfsSearch s(inst, norevisit, node_budget);
  if (inst.net.value_count() > 0) s.search(1, inst.depot, 0.0);
  Solution sol;
  sol.routes = s.best_routes;
  sol.value = s.best_value;
  sol.solver = name;
  sol.seconds = seconds_since(t0);
  sol.optimal = !s.aborted;
  return sol;
}

void brute(const EnvState& s, long budget, long& expansions, bool& aborted, Solution& best) {
  if (aborted) return;
  if (++expansions > budget) {
    aborted = true;
    return;
  }
  if (s.done) {
    if (s.collected > best.value) {
      best.value = s.collected;
      best.routes = s.routes;
    }
    return;
  }
  const ActionMask m = feasible_actions(s);
  for (int i = 0; i < static_cast<int>(m.ok.size()); ++i) {
    if (!m.ok[i]) continue;
    EnvState next = s;
    step(next, i);
    brute(next, budget, expansions, aborted, best);
    if (aborted) return;
  }
}

}  // namespace

Solution solve_exact_dfs(const ProblemInstance& inst, long node_budget) {
  return run_dfs(inst, false, node_budget, "exact");
}

Solution solve_exact_norevisit(const ProblemInstance& inst, long node_budget) {
  return run_dfs(inst, true, node_budget, "exact-norevisit");
}

Solution solve_exact_bruteforce(const ProblemInstance& inst, long node_budget) {
  const auto t0 = std::chrono::steady_clock::now();
  Solution best;
  best.solver = "bruteforce";
  long expansions = 0;
  bool aborted = false;
  const EnvState s = reset(inst);
  if (!s.done) brute(s, node_budget, expansions, aborted, best);
  best.seconds = seconds_since(t0);
  best.optimal = !aborted;
  return best;
}

Solution solve_greedy(const ProblemInstance& inst) {
  const auto t0 = std::chrono::steady_clock::now();
  const TransformedNetwork& net = inst.net;
  EnvState s = reset(inst);
  while (!s.done) {
    const ActionMask m = feasible_actions(s);
    int pick = -1;
    double best_ratio = -1.0;
    for (int i = 0; i < net.node_count(); ++i) {
      if (!m.ok[i] || !net.is_value[i]) continue;
      const double ratio = net.value[i] / (2.0 * dist(net.coords[s.current], net.coords[i]));
      if (ratio > best_ratio) {
        best_ratio = ratio;
        pick = i;
      }
    }
    if (pick < 0) {
      // No value node in reach: relocate to the nearest zero-value node that
      // puts at least one unvisited value node back in reach.
      double best_t = 0.0;
      for (int z = 0; z < net.node_count(); ++z) {
        if (!m.ok[z] || net.is_value[z] || z == inst.depot) continue;
        const double tz = dist(net.coords[s.current], net.coords[z]);
        if (pick >= 0 && tz >= best_t) continue;
        const double elapsed2 = s.elapsed + tz;
        bool opens = false;
        for (int p = net.original_count; p < net.node_count() && !opens; ++p) {
          if (s.visited[p] || (net.end_a[p] != z && net.end_b[p] != z)) continue;
          const double tp = dist(net.coords[z], net.coords[p]);
          opens = !(elapsed2 + 2.0 * tp + inst.return_leg[p] > inst.budget());
        }
        if (opens) {
          pick = z;
          best_t = tz;
        }
      }
    }
    if (pick < 0) {
      // Head home. The depot may not be adjacent (value nodes only touch
      // their endpoints), so take the feasible move with the cheapest
      // remaining trip to the depot.
      double best_home = 0.0;
      for (int i = 0; i < net.node_count(); ++i) {
        if (!m.ok[i]) continue;
        const double home = i == inst.depot
                                ? dist(net.coords[s.current], net.coords[i])
                                : dist(net.coords[s.current], net.coords[i]) + inst.return_leg[i];
        if (pick < 0 || home < best_home) {
          pick = i;
          best_home = home;
        }
      }
    }
    step(s, pick);
  }
  Solution sol;
  sol.routes = s.routes;
  sol.value = s.collected;
  sol.solver = "greedy";
  sol.seconds = seconds_since(t0);
  sol.optimal = false;
  return sol;
}

double gap(double reference, double other) {
  if (!(reference > 0.0)) throw std::invalid_argument("gap: undefined for non-positive reference");
  return (reference - other) / reference;
}

}  // namespace droneroute
