#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droneroute/instance.hpp"
#include "droneroute/road_network.hpp"
#include "droneroute/solvers.hpp"

namespace droneroute {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::string road_network_json(const RoadNetwork& net);
RoadNetwork parse_road_network(const std::string& text);

std::string instance_json(const ProblemInstance& inst);
ProblemInstance parse_instance(const std::string& text);

// {"routes", "value", "feasible", "violations"}; evaluation is recomputed,
// never trusted from the caller.
std::string route_set_json(const ProblemInstance& inst,
                           const std::vector<std::vector<int>>& routes);
std::string solution_json(const ProblemInstance& inst, const Solution& sol);
std::vector<std::vector<int>> parse_route_set(const std::string& text);

std::string routes_geojson(const ProblemInstance& inst,
                           const std::vector<std::vector<int>>& routes);

std::string embeddings_tsv(const class Mat& rows);

// TNTP ingestion. Node and link files are whitespace-separated tables with
// `<...>` metadata lines, `~` comment lines, optional header row and optional
// trailing `;` per row. Column indices and semantics come from the mapping.
struct TntpValueSpec {
  std::string mode = "uniform";  // uniform | column | constant
  double lo = 1.0;
  double hi = 10.0;
  double divisor = 10.0;
  int column = -1;      // for mode column
  double constant = 0;  // for mode constant
};

struct TntpMapping {
  int node_id_col = 0;
  int node_x_col = 1;
  int node_y_col = 2;
  int link_from_col = 0;
  int link_to_col = 1;
  int link_length_col = 3;
  std::string crs = "planar";  // planar | wgs84 (lon/lat degrees)
  double length_scale = 1.0;   // converts length units into coordinate units
  bool merge_reverse = false;  // drop (j,i) when (i,j) was already read
  bool clamp_short_links = true;
  TntpValueSpec value;
};

TntpMapping parse_tntp_mapping(const std::string& json_text);

RoadNetwork import_tntp(const std::string& node_text, const std::string& link_text,
                        const TntpMapping& mapping, uint64_t seed);

}  // namespace droneroute
