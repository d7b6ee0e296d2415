#include "droneroute/instgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace droneroute {

void GenSpec::validate() const {
  if (n < 4) throw std::invalid_argument("gen spec: need at least 4 nodes");
  if (a < n - 1) throw std::invalid_argument("gen spec: link target below spanning-tree size");
  if (delta < 0.0 || delta >= 0.5)
    throw std::invalid_argument("gen spec: perturbation must lie in [0, 0.5) of the spacing");
  if (scale_lo < 1.0) throw std::invalid_argument("gen spec: length scale below 1 breaks L >= chord");
  if (scale_hi < scale_lo) throw std::invalid_argument("gen spec: length scale range inverted");
  if (value_lo > value_hi) throw std::invalid_argument("gen spec: value range inverted");
  if (value_lo < 0.0) throw std::invalid_argument("gen spec: negative values");
  if (!(value_divisor > 0.0)) throw std::invalid_argument("gen spec: non-positive value divisor");
}

nlohmann::json gen_spec_to_json(const GenSpec& spec) {
  return {{"n", spec.n},
          {"a", spec.a},
          {"boundary_weight", spec.boundary_weight},
          {"delta", spec.delta},
          {"value_lo", spec.value_lo},
          {"value_hi", spec.value_hi},
          {"value_divisor", spec.value_divisor},
          {"scale_lo", spec.scale_lo},
          {"scale_hi", spec.scale_hi},
          {"seed", spec.seed}};
}

GenSpec gen_spec_from_json(const nlohmann::json& j) {
  GenSpec spec;
  spec.n = j.value("n", spec.n);
  spec.a = j.value("a", spec.a);
  spec.boundary_weight = j.value("boundary_weight", spec.boundary_weight);
  spec.delta = j.value("delta", spec.delta);
  spec.value_lo = j.value("value_lo", spec.value_lo);
  spec.value_hi = j.value("value_hi", spec.value_hi);
  spec.value_divisor = j.value("value_divisor", spec.value_divisor);
  spec.scale_lo = j.value("scale_lo", spec.scale_lo);
  spec.scale_hi = j.value("scale_hi", spec.scale_hi);
  spec.seed = j.value("seed", spec.seed);
  spec.validate();
  return spec;
}

RoadNetwork generate_grid(int n) {
  if (n < 4) throw std::invalid_argument("generate_grid: need at least 4 nodes");
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + m - 1) / m;
  const double spacing = 1.0 / (m - 1);
  RoadNetwork net;
  auto placed = [&](int r, int c) { return r * m + c < n; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < m && placed(r, c); ++c)
      net.nodes.push_back({c * spacing, r * spacing});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < m && placed(r, c); ++c) {
      const int id = r * m + c;
      if (c + 1 < m && placed(r, c + 1))
        net.links.push_back({id, id + 1, spacing, 0.0});
      if (r + 1 < rows && placed(r + 1, c))
        net.links.push_back({id, id + m, spacing, 0.0});
    }
  }
  return net;
}

RoadNetwork prune_links(RoadNetwork net, int target_a, double boundary_weight, Rng& rng) {
  const int n = static_cast<int>(net.nodes.size());
  if (target_a < n - 1) throw std::invalid_argument("prune_links: target below spanning-tree size");
  if (target_a > static_cast<int>(net.links.size()))
    throw std::invalid_argument("prune_links: target above current link count");

  double xmin = net.nodes[0].x, xmax = xmin, ymin = net.nodes[0].y, ymax = ymin;
  for (const Point& p : net.nodes) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  auto on_boundary = [&](int i) {
    const Point& p = net.nodes[i];
    return p.x == xmin || p.x == xmax || p.y == ymin || p.y == ymax;
  };

  std::vector<RoadLink> links = std::move(net.links);
  std::vector<uint8_t> removed(links.size(), 0);
  // A link whose removal was rejected stays a bridge for the rest of the
  // process (removals only lose cycles), so it never needs resampling.
  std::vector<uint8_t> locked(links.size(), 0);
  int remaining = static_cast<int>(links.size());

  auto connected_without = [&](size_t skip) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    int components = n;
    for (size_t k = 0; k < links.size(); ++k) {
      if (removed[k] || k == skip) continue;
      const int a = find(links[k].i), b = find(links[k].j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    return components == 1;
  };

  while (remaining > target_a) {
    double total = 0.0;
    for (size_t k = 0; k < links.size(); ++k) {
      if (removed[k] || locked[k]) continue;
      total += 1.0 + boundary_weight * ((on_boundary(links[k].i) || on_boundary(links[k].j)) ? 1.0 : 0.0);
    }
    if (total <= 0.0) throw std::logic_error("prune_links: no removable link found");
    double r = rng.uniform() * total;
    size_t pick = links.size();
    for (size_t k = 0; k < links.size(); ++k) {
      if (removed[k] || locked[k]) continue;
      r -= 1.0 + boundary_weight * ((on_boundary(links[k].i) || on_boundary(links[k].j)) ? 1.0 : 0.0);
      if (r <= 0.0) {
        pick = k;
        break;
      }
    }
    if (pick == links.size()) {
      for (size_t k = links.size(); k-- > 0;)
        if (!removed[k] && !locked[k]) {
          pick = k;
          break;
        }
    }
    if (connected_without(pick)) {
      removed[pick] = 1;
      --remaining;
    } else {
      locked[pick] = 1;
    }
  }

  net.links.clear();
  for (size_t k = 0; k < links.size(); ++k)
    if (!removed[k]) net.links.push_back(links[k]);
  return net;
}

RoadNetwork perturb_nodes(RoadNetwork net, double delta, Rng& rng) {
  if (delta < 0.0 || delta >= 0.5)
    throw std::invalid_argument("perturb_nodes: delta must lie in [0, 0.5)");
  const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(net.nodes.size()))));
  const double spacing = 1.0 / std::max(1, m - 1);
  std::set<std::pair<double, double>> placed;
  for (Point& p : net.nodes) {
    const Point base = p;
    bool ok = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double dx = rng.uniform(-delta * spacing, delta * spacing);
      const double dy = rng.uniform(-delta * spacing, delta * spacing);
      Point cand{std::clamp(base.x + dx, 0.0, 1.0), std::clamp(base.y + dy, 0.0, 1.0)};
      if (placed.insert({cand.x, cand.y}).second) {
        p = cand;
        ok = true;
        break;
      }
    }
    if (!ok) throw std::runtime_error("perturb_nodes: perturbation infeasible");
  }
  return net;
}

RoadNetwork assign_attributes(RoadNetwork net, const GenSpec& spec, Rng& rng) {
  for (RoadLink& l : net.links) {
    const double chord = dist(net.nodes[l.i], net.nodes[l.j]);
    l.length = chord * rng.uniform(spec.scale_lo, spec.scale_hi);
    l.value = rng.uniform(spec.value_lo, spec.value_hi) / spec.value_divisor;
  }
  return net;
}

RoadNetwork generate_road_network(const GenSpec& spec) {
  spec.validate();
  RoadNetwork net = generate_grid(spec.n);
  if (spec.a > static_cast<int>(net.links.size()))
    throw std::invalid_argument("gen spec: link target above lattice candidate count");
  Rng prune_rng(mix_seed(spec.seed, 1));
  net = prune_links(std::move(net), spec.a, spec.boundary_weight, prune_rng);
  Rng perturb_rng(mix_seed(spec.seed, 2));
  net = perturb_nodes(std::move(net), spec.delta, perturb_rng);
  Rng attr_rng(mix_seed(spec.seed, 3));
  net = assign_attributes(std::move(net), spec, attr_rng);
  validate_road_network(net, true);
  return net;
}

ProblemInstance make_instance(const RoadNetwork& road, int depot, int K, double p_max, double Q,
                              uint64_t seed) {
  TransformedNetwork net = transform_network(road, mix_seed(seed, 4));
  ProblemInstance inst = pack_instance(std::move(net), depot, K, p_max, Q, seed);
  inst.provenance = nlohmann::json{{"source", "road_network"}}.dump();
  return inst;
}

ProblemInstance generate_instance(const GenSpec& spec, int K, double p_max, double Q) {
  RoadNetwork road = generate_road_network(spec);
  Rng depot_rng(mix_seed(spec.seed, 5));
  const int depot = depot_rng.index(static_cast<int>(road.nodes.size()));
  ProblemInstance inst = make_instance(road, depot, K, p_max, Q, spec.seed);
  inst.provenance = nlohmann::json{
      {"source", "generated"},
      {"spec",
       {{"n", spec.n},
        {"a", spec.a},
        {"boundary_weight", spec.boundary_weight},
        {"delta", spec.delta},
        {"value_lo", spec.value_lo},
        {"value_hi", spec.value_hi},
        {"value_divisor", spec.value_divisor},
        {"scale_lo", spec.scale_lo},
        {"scale_hi", spec.scale_hi},
        {"seed", spec.seed}}}}.dump();
  return inst;
}

std::array<ProblemInstance, 8> augment_8fold(const ProblemInstance& inst) {
  auto apply = [](const ProblemInstance& src, int variant) {
    ProblemInstance out = src;
    for (Point& p : out.net.coords) {
      const double x = p.x, y = p.y;
      switch (variant) {
        case 0: break;
        case 1: p = {1.0 - x, y}; break;
        case 2: p = {x, 1.0 - y}; break;
        case 3: p = {1.0 - x, 1.0 - y}; break;
        case 4: p = {y, x}; break;
        case 5: p = {1.0 - y, x}; break;
        case 6: p = {y, 1.0 - x}; break;
        default: p = {1.0 - y, 1.0 - x}; break;
      }
    }
    out.rebuild_cache();
    return out;
  };
  std::array<ProblemInstance, 8> out{inst,           apply(inst, 1), apply(inst, 2),
                                     apply(inst, 3), apply(inst, 4), apply(inst, 5),
                                     apply(inst, 6), apply(inst, 7)};
  return out;
}

}  // namespace droneroute
