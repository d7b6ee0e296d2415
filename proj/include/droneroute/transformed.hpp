#pragma once

#include <cstdint>
#include <vector>

#include "droneroute/geometry.hpp"
#include "droneroute/road_network.hpp"

namespace droneroute {

// Flight graph built from a road network: every link is replaced by a value
// node holding the link's assessment value, placed so both half-legs measure
// half the road length. Original nodes form a complete subgraph (free flight);
// a value node connects only to its link's two endpoints.
struct TransformedNetwork {
  int original_count = 0;
  std::vector<Point> coords;      // originals first, value nodes after
  std::vector<double> value;      // zero for originals
  std::vector<uint8_t> is_value;  // 1 for value nodes
  // Per value node: the two original endpoints; -1 for originals.
  std::vector<int> end_a;
  std::vector<int> end_b;

  int node_count() const { return static_cast<int>(coords.size()); }
  int value_count() const { return node_count() - original_count; }

  bool adjacent(int i, int j) const {
    if (i == j) return false;
    const bool vi = is_value[i] != 0, vj = is_value[j] != 0;
    if (!vi && !vj) return true;
    if (vi && vj) return false;
    const int p = vi ? i : j;
    const int o = vi ? j : i;
    return end_a[p] == o || end_b[p] == o;
  }

  double travel_time(int i, int j) const;  // Euclidean; throws if not adjacent

  // Undirected adjacency pairs (i < j), lexicographic.
  std::vector<std::pair<int, int>> edges() const;
};

// Side selection for value-node placement is drawn from seed; on an exact
// coordinate collision (duplicate links) the other side is tried.
TransformedNetwork transform_network(const RoadNetwork& road, uint64_t seed,
                                     bool require_connected = true);

// Structural invariants: value nodes have exactly two original endpoints,
// equidistant within 1e-9; all coordinates distinct; value on originals zero.
void validate_transformed(const TransformedNetwork& net);

}  // namespace droneroute
