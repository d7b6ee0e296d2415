#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droneroute/transformed.hpp"

namespace droneroute {

// A routing problem: flight network plus depot and fleet parameters.
// return_leg caches the shortest way home used by feasibility checks:
// for an original node the direct depot distance, for a value node the
// smaller depot distance of its two endpoints.
struct ProblemInstance {
  TransformedNetwork net;
  int depot = 0;
  int K = 1;
  double p_max = 0.0;
  double Q = 0.0;
  uint64_t seed = 0;
  std::string provenance;  // JSON text describing how the instance was made

  std::vector<double> return_leg;

  void rebuild_cache();
  double budget() const { return p_max < Q ? p_max : Q; }
  double total_value() const;
};

// Packages an already-transformed network; instgen's make_instance is the
// road-network entry point.
ProblemInstance pack_instance(TransformedNetwork net, int depot, int K, double p_max, double Q,
                              uint64_t seed);

void validate_instance(const ProblemInstance& inst);

}  // namespace droneroute
