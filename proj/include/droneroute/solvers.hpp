#pragma once

#include <string>
#include <vector>

#include "droneroute/env.hpp"

namespace droneroute {

struct Solution {
  std::vector<std::vector<int>> routes;
  double value = 0.0;
  std::string solver;
  double seconds = 0.0;
  bool optimal = false;
};

// Branch-and-bound DFS over unmasked action sequences; zero-value nodes may
// be revisited. Bounded by node_budget expansions; when exhausted the best
// solution found so far is returned with optimal = false.
Solution solve_exact_dfs(const ProblemInstance& inst, long node_budget = 50000000);

// Same search restricted to at most one visit per node within a single route
// (ordering-constraint semantics, matching the MILP baseline).
Solution solve_exact_norevisit(const ProblemInstance& inst, long node_budget = 50000000);

// Unpruned enumeration straight through the environment API. Exists as an
// independent check on solve_exact_dfs; exponentially slower, tiny inputs only.
Solution solve_exact_bruteforce(const ProblemInstance& inst, long node_budget = 50000000);

// Ratio-greedy: best value per round-trip time, detouring through the
// zero-value node that re-opens value nodes when none are directly reachable.
Solution solve_greedy(const ProblemInstance& inst);

// (reference - other) / reference.
double gap(double reference, double other);

}  // namespace droneroute
