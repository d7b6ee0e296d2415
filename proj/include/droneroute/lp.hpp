#pragma once

#include <string>
#include <vector>

#include "droneroute/instance.hpp"

namespace droneroute {

struct LpTerm {
  double coeff = 1.0;
  std::string var;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> lhs;
  char rel = '<';  // '<' means <=, '>' means >=, '=' equality
  double rhs = 0.0;
};

struct LpBound {
  std::string var;
  double lo = 0.0;
  double hi = 0.0;
};

struct LpModel {
  bool maximize = true;
  std::string objective_name = "obj";
  std::vector<LpTerm> objective;
  std::vector<LpConstraint> constraints;
  std::vector<LpBound> bounds;
  std::vector<std::string> binaries;
  std::vector<std::string> generals;
};

// Mixed-integer flow model over the transformed network: route variables
// x_k_i_j per drone and directed arc, order variables u_k_i per drone and
// node. Objective: value collected on departure from value nodes. Each value
// node is left at most once fleet-wide; flow conserves at every node; every
// drone leaves and enters the depot exactly once; per-drone duration is
// capped by both Q and p_max; ordering constraints on non-depot arcs cut
// cycles, so routes visit each node at most once.
LpModel build_lp(const ProblemInstance& inst);

std::string render_lp(const LpModel& model);

LpModel parse_lp(const std::string& text);

inline std::string emit_lp(const ProblemInstance& inst) { return render_lp(build_lp(inst)); }

}  // namespace droneroute
