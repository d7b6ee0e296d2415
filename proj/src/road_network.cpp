#include "droneroute/road_network.hpp"

#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace droneroute {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

bool road_connected(const RoadNetwork& net) {
  if (net.nodes.empty()) return true;
  UnionFind uf(static_cast<int>(net.nodes.size()));
  int components = static_cast<int>(net.nodes.size());
  for (const RoadLink& l : net.links)
    if (uf.unite(l.i, l.j)) --components;
  return components == 1;
}

void validate_road_network(const RoadNetwork& net, bool require_connected) {
  const int n = static_cast<int>(net.nodes.size());
  if (n == 0) throw std::invalid_argument("road network: no nodes");
  std::map<std::pair<double, double>, int> seen;
  for (int i = 0; i < n; ++i) {
    auto [it, fresh] = seen.emplace(std::make_pair(net.nodes[i].x, net.nodes[i].y), i);
    if (!fresh)
      throw std::invalid_argument("road network: nodes " + std::to_string(it->second) + " and " +
                                  std::to_string(i) + " share coordinates");
  }
  for (size_t k = 0; k < net.links.size(); ++k) {
    const RoadLink& l = net.links[k];
    const std::string tag = "road network: link " + std::to_string(k);
    if (l.i < 0 || l.i >= n || l.j < 0 || l.j >= n)
      throw std::invalid_argument(tag + ": endpoint out of range");
    if (l.i == l.j) throw std::invalid_argument(tag + ": self-loop");
    if (!(l.length > 0.0)) throw std::invalid_argument(tag + ": non-positive length");
    if (l.length < dist(net.nodes[l.i], net.nodes[l.j]))
      throw std::invalid_argument(tag + ": length shorter than endpoint distance");
    if (l.value < 0.0) throw std::invalid_argument(tag + ": negative value");
  }
  if (require_connected && !net.links.empty() && !road_connected(net))
    throw std::invalid_argument("road network: disconnected");
}

}  // namespace droneroute
