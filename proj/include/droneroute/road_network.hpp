#pragma once

#include <vector>

#include "droneroute/geometry.hpp"

namespace droneroute {

struct RoadLink {
  int i = 0;
  int j = 0;
  double length = 0.0;  // road length; at least the straight-line distance
  double value = 0.0;   // assessment value collected by flying the link
};

struct RoadNetwork {
  std::vector<Point> nodes;
  std::vector<RoadLink> links;
};

bool road_connected(const RoadNetwork& net);

// Checks index ranges, no self-loops, positive lengths at least the chord,
// non-negative values, distinct node coordinates. Connectivity is only
// enforced when the network has links: an all-isolated-nodes input is a legal
// degenerate case, a partially wired one is not.
void validate_road_network(const RoadNetwork& net, bool require_connected = true);

}  // namespace droneroute
