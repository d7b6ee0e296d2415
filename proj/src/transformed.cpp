#include "droneroute/transformed.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "droneroute/rng.hpp"

namespace droneroute {

double TransformedNetwork::travel_time(int i, int j) const {
  if (i < 0 || i >= node_count() || j < 0 || j >= node_count())
    throw std::out_of_range("travel_time: node index out of range");
  if (!adjacent(i, j)) throw std::invalid_argument("travel_time: no edge");
  return dist(coords[i], coords[j]);
}

std::vector<std::pair<int, int>> TransformedNetwork::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < original_count; ++i)
    for (int j = i + 1; j < original_count; ++j) out.emplace_back(i, j);
  for (int p = original_count; p < node_count(); ++p) {
    out.emplace_back(std::min(end_a[p], p), std::max(end_a[p], p));
    out.emplace_back(std::min(end_b[p], p), std::max(end_b[p], p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TransformedNetwork transform_network(const RoadNetwork& road, uint64_t seed,
                                     bool require_connected) {
  validate_road_network(road, require_connected);
  TransformedNetwork net;
  net.original_count = static_cast<int>(road.nodes.size());
  net.coords = road.nodes;
  net.value.assign(road.nodes.size(), 0.0);
  net.is_value.assign(road.nodes.size(), 0);
  net.end_a.assign(road.nodes.size(), -1);
  net.end_b.assign(road.nodes.size(), -1);

  std::map<std::pair<double, double>, int> taken;
  for (int i = 0; i < net.original_count; ++i)
    taken.emplace(std::make_pair(net.coords[i].x, net.coords[i].y), i);

  Rng rng(mix_seed(seed, 0x706c6163ULL));
  for (size_t k = 0; k < road.links.size(); ++k) {
    const RoadLink& l = road.links[k];
    const Side first = rng.coin() ? Side::plus : Side::minus;
    Point p = split_point(road.nodes[l.i], road.nodes[l.j], l.length, first);
    if (taken.count({p.x, p.y})) {
      // Duplicate link or a node sitting exactly on the split point: the
      // mirrored placement keeps coordinates distinct.
      p = split_point(road.nodes[l.i], road.nodes[l.j], l.length,
                      first == Side::plus ? Side::minus : Side::plus);
      if (taken.count({p.x, p.y}))
        throw std::invalid_argument("transform_network: link " + std::to_string(k) +
                                    ": both split placements collide");
    }
    taken.emplace(std::make_pair(p.x, p.y), net.node_count());
    net.coords.push_back(p);
    net.value.push_back(l.value);
    net.is_value.push_back(1);
    net.end_a.push_back(l.i);
    net.end_b.push_back(l.j);
  }
  validate_transformed(net);
  return net;
}

void validate_transformed(const TransformedNetwork& net) {
  const int n = net.node_count();
  if (net.original_count <= 0) throw std::invalid_argument("transformed network: no original nodes");
  if (net.original_count > n) throw std::invalid_argument("transformed network: bad original count");
  if (static_cast<int>(net.value.size()) != n || static_cast<int>(net.is_value.size()) != n ||
      static_cast<int>(net.end_a.size()) != n || static_cast<int>(net.end_b.size()) != n)
    throw std::invalid_argument("transformed network: field sizes disagree");
  std::map<std::pair<double, double>, int> seen;
  for (int i = 0; i < n; ++i) {
    const std::string tag = "transformed network: node " + std::to_string(i);
    auto [it, fresh] = seen.emplace(std::make_pair(net.coords[i].x, net.coords[i].y), i);
    if (!fresh)
      throw std::invalid_argument(tag + ": shares coordinates with node " +
                                  std::to_string(it->second));
    const bool artificial = i >= net.original_count;
    if ((net.is_value[i] != 0) != artificial)
      throw std::invalid_argument(tag + ": value flag does not match position");
    if (!artificial) {
      if (net.value[i] != 0.0) throw std::invalid_argument(tag + ": original node carries value");
      if (net.end_a[i] != -1 || net.end_b[i] != -1)
        throw std::invalid_argument(tag + ": original node has endpoints");
      continue;
    }
    if (net.value[i] < 0.0) throw std::invalid_argument(tag + ": negative value");
    const int a = net.end_a[i], b = net.end_b[i];
    if (a < 0 || a >= net.original_count || b < 0 || b >= net.original_count || a == b)
      throw std::invalid_argument(tag + ": endpoints invalid");
    const double ta = dist(net.coords[i], net.coords[a]);
    const double tb = dist(net.coords[i], net.coords[b]);
    if (std::abs(ta - tb) > 1e-9)
      throw std::invalid_argument(tag + ": half-legs differ beyond tolerance");
  }
}

}  // namespace droneroute
