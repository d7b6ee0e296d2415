#pragma once

#include <array>
#include <cstdint>

#include <json.hpp>

#include "droneroute/instance.hpp"
#include "droneroute/rng.hpp"
#include "droneroute/road_network.hpp"

namespace droneroute {

// Synthetic network recipe: lattice of n nodes pruned to `a` links, node
// coordinates jittered by up to `delta` of the lattice spacing, link lengths
// stretched from the chord by [scale_lo, scale_hi], values drawn from
// [value_lo, value_hi] and divided by value_divisor.
struct GenSpec {
  int n = 30;
  int a = 36;
  double boundary_weight = 2.0;
  double delta = 0.4;
  double value_lo = 1.0;
  double value_hi = 10.0;
  double value_divisor = 10.0;
  double scale_lo = 1.0;
  double scale_hi = 2.0;
  uint64_t seed = 0;

  void validate() const;
};

nlohmann::json gen_spec_to_json(const GenSpec& spec);
GenSpec gen_spec_from_json(const nlohmann::json& j);

RoadNetwork generate_grid(int n);

RoadNetwork prune_links(RoadNetwork net, int target_a, double boundary_weight, Rng& rng);

RoadNetwork perturb_nodes(RoadNetwork net, double delta, Rng& rng);

RoadNetwork assign_attributes(RoadNetwork net, const GenSpec& spec, Rng& rng);

// The full pipeline, seeded from spec.seed.
RoadNetwork generate_road_network(const GenSpec& spec);

// Transforms the road network and packages fleet parameters; provenance
// records the source description.
ProblemInstance make_instance(const RoadNetwork& road, int depot, int K, double p_max, double Q,
                              uint64_t seed);

// Synthetic instance: network from spec, depot drawn uniformly among original
// nodes, provenance embeds the spec.
ProblemInstance generate_instance(const GenSpec& spec, int K, double p_max, double Q);

// The eight unit-square isometries, first entry is the input. Adjacency,
// values, depot and parameters are untouched; only coordinates move.
std::array<ProblemInstance, 8> augment_8fold(const ProblemInstance& inst);

}  // namespace droneroute
