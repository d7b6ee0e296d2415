#include "droneroute/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "droneroute/env.hpp"
#include "droneroute/linalg.hpp"
#include "droneroute/rng.hpp"

namespace droneroute {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string road_network_json(const RoadNetwork& net) {
  json nodes = json::array();
  for (const Point& p : net.nodes) nodes.push_back({p.x, p.y});
  json links = json::array();
  for (const RoadLink& l : net.links)
    links.push_back({{"i", l.i}, {"j", l.j}, {"length", l.length}, {"value", l.value}});
  return json{{"format", "droneroute-road-network-1"}, {"nodes", nodes}, {"links", links}}.dump(2) +
         "\n";
}

RoadNetwork parse_road_network(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "droneroute-road-network-1")
    throw std::invalid_argument("road network file: unknown format tag");
  RoadNetwork net;
  for (const json& p : j.at("nodes")) net.nodes.push_back({p.at(0), p.at(1)});
  for (const json& l : j.at("links"))
    net.links.push_back({l.at("i"), l.at("j"), l.at("length"), l.at("value")});
  validate_road_network(net, true);
  return net;
}

std::string instance_json(const ProblemInstance& inst) {
  const TransformedNetwork& net = inst.net;
  json coords = json::array();
  for (const Point& p : net.coords) coords.push_back({p.x, p.y});
  json edges = json::array();
  for (const auto& [a, b] : net.edges()) edges.push_back({a, b});
  json j{{"format", "droneroute-instance-1"},
         {"network",
          {{"original_count", net.original_count},
           {"coords", coords},
           {"value", net.value},
           {"edges", edges}}},
         {"depot", inst.depot},
         {"K", inst.K},
         {"p_max", inst.p_max},
         {"Q", inst.Q},
         {"seed", inst.seed},
         {"provenance", inst.provenance.empty() ? json::object() : json::parse(inst.provenance)}};
  return j.dump(2) + "\n";
}

ProblemInstance parse_instance(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "droneroute-instance-1")
    throw std::invalid_argument("instance file: unknown format tag");
  const json& nj = j.at("network");
  TransformedNetwork net;
  net.original_count = nj.at("original_count");
  for (const json& p : nj.at("coords")) net.coords.push_back({p.at(0), p.at(1)});
  net.value = nj.at("value").get<std::vector<double>>();
  const int n = net.node_count();
  if (net.original_count < 0 || net.original_count > n)
    throw std::invalid_argument("instance file: bad original_count");
  net.is_value.assign(n, 0);
  net.end_a.assign(n, -1);
  net.end_b.assign(n, -1);
  for (int i = net.original_count; i < n; ++i) net.is_value[i] = 1;
  std::vector<std::pair<int, int>> given;
  for (const json& e : nj.at("edges")) {
    const int a = e.at(0), b = e.at(1);
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
      throw std::invalid_argument("instance file: bad edge entry");
    given.emplace_back(std::min(a, b), std::max(a, b));
    for (const int v : {a, b}) {
      const int o = v == a ? b : a;
      if (v < net.original_count) continue;
      if (o >= net.original_count)
        throw std::invalid_argument("instance file: edge joins two value nodes");
      if (net.end_a[v] == -1)
        net.end_a[v] = o;
      else if (net.end_b[v] == -1)
        net.end_b[v] = o;
      else
        throw std::invalid_argument("instance file: value node with more than two edges");
    }
  }
  for (int v = net.original_count; v < n; ++v) {
    if (net.end_a[v] == -1 || net.end_b[v] == -1)
      throw std::invalid_argument("instance file: value node missing an endpoint");
    if (net.end_a[v] > net.end_b[v]) std::swap(net.end_a[v], net.end_b[v]);
  }
  std::sort(given.begin(), given.end());
  if (net.edges() != given)
    throw std::invalid_argument("instance file: edge list does not describe a transformed network");
  ProblemInstance inst = pack_instance(std::move(net), j.at("depot"), j.at("K"), j.at("p_max"),
                                       j.at("Q"), j.at("seed"));
  inst.provenance = j.contains("provenance") ? j.at("provenance").dump() : "";
  return inst;
}

std::string route_set_json(const ProblemInstance& inst,
                           const std::vector<std::vector<int>>& routes) {
  const RouteSetReport rep = evaluate_route_set(inst, routes);
  return json{{"routes", routes},
              {"value", rep.value},
              {"feasible", rep.feasible},
              {"violations", rep.violations}}
             .dump(2) +
         "\n";
}

std::string solution_json(const ProblemInstance& inst, const Solution& sol) {
  const RouteSetReport rep = evaluate_route_set(inst, sol.routes);
  return json{{"routes", sol.routes},
              {"value", rep.value},
              {"feasible", rep.feasible},
              {"violations", rep.violations},
              {"solver", sol.solver},
              {"seconds", sol.seconds},
              {"optimal", sol.optimal}}
             .dump(2) +
         "\n";
}

std::vector<std::vector<int>> parse_route_set(const std::string& text) {
  const json j = json::parse(text);
  return j.at("routes").get<std::vector<std::vector<int>>>();
}

std::string routes_geojson(const ProblemInstance& inst,
                           const std::vector<std::vector<int>>& routes) {
  const TransformedNetwork& net = inst.net;
  std::vector<uint8_t> seen(net.node_count(), 0);
  json features = json::array();
  for (size_t r = 0; r < routes.size(); ++r) {
    json line = json::array();
    double duration = 0.0;
    double collected = 0.0;
    for (size_t i = 0; i < routes[r].size(); ++i) {
      const int node = routes[r][i];
      line.push_back({net.coords[node].x, net.coords[node].y});
      if (i > 0) {
        duration += dist(net.coords[routes[r][i - 1]], net.coords[node]);
        if (net.is_value[node] && !seen[node]) {
          seen[node] = 1;
          collected += net.value[node];
        }
      }
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
                        {"properties",
                         {{"drone", static_cast<int>(r) + 1},
                          {"duration", duration},
                          {"value_collected", collected}}}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) + "\n";
}

std::string embeddings_tsv(const Mat& rows) {
  std::string out;
  char buf[40];
  for (int r = 0; r < rows.rows(); ++r) {
    for (int c = 0; c < rows.cols(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), rows(r, c));
      if (c) out += '\t';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

namespace {

struct TntpRow {
  std::vector<std::string> cells;
  int line = 0;
};

bool parse_num(const std::string& s, double& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(const std::string& s, long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<TntpRow> tntp_rows(const std::string& text) {
  std::vector<TntpRow> rows;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const size_t semi = s.find(';'); semi != std::string::npos) s.resize(semi);
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    if (s[b] == '~' || s[b] == '<') continue;
    TntpRow row;
    row.line = line;
    std::istringstream cells(s);
    std::string cell;
    while (cells >> cell) row.cells.push_back(cell);
    if (row.cells.empty()) continue;
    double probe;
    if (!parse_num(row.cells[0], probe)) continue;  // header row
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::string& cell_at(const TntpRow& row, int col, const char* what) {
  if (col < 0 || col >= static_cast<int>(row.cells.size()))
    throw std::invalid_argument(std::string("tntp: missing ") + what + " column at line " +
                                std::to_string(row.line));
  return row.cells[col];
}

}  // namespace

TntpMapping parse_tntp_mapping(const std::string& json_text) {
  const json j = json::parse(json_text);
  TntpMapping m;
  if (j.contains("node_columns")) {
    const json& nc = j.at("node_columns");
    m.node_id_col = nc.value("id", m.node_id_col);
    m.node_x_col = nc.value("x", m.node_x_col);
    m.node_y_col = nc.value("y", m.node_y_col);
  }
  if (j.contains("link_columns")) {
    const json& lc = j.at("link_columns");
    m.link_from_col = lc.value("from", m.link_from_col);
    m.link_to_col = lc.value("to", m.link_to_col);
    m.link_length_col = lc.value("length", m.link_length_col);
  }
  m.crs = j.value("crs", m.crs);
  if (m.crs != "planar" && m.crs != "wgs84")
    throw std::invalid_argument("tntp mapping: crs must be planar or wgs84");
  m.length_scale = j.value("length_scale", m.length_scale);
  if (!(m.length_scale > 0.0)) throw std::invalid_argument("tntp mapping: non-positive length_scale");
  m.merge_reverse = j.value("merge_reverse", m.merge_reverse);
  m.clamp_short_links = j.value("clamp_short_links", m.clamp_short_links);
  if (j.contains("value")) {
    const json& v = j.at("value");
    m.value.mode = v.value("mode", m.value.mode);
    m.value.lo = v.value("lo", m.value.lo);
    m.value.hi = v.value("hi", m.value.hi);
    m.value.divisor = v.value("divisor", m.value.divisor);
    m.value.column = v.value("column", m.value.column);
    m.value.constant = v.value("constant", m.value.constant);
  }
  if (m.value.mode != "uniform" && m.value.mode != "column" && m.value.mode != "constant")
    throw std::invalid_argument("tntp mapping: value mode must be uniform, column or constant");
  if (m.value.mode == "column" && m.value.column < 0)
    throw std::invalid_argument("tntp mapping: value mode column needs a column index");
  if (!(m.value.divisor > 0.0)) throw std::invalid_argument("tntp mapping: non-positive divisor");
  return m;
}

RoadNetwork import_tntp(const std::string& node_text, const std::string& link_text,
                        const TntpMapping& mapping, uint64_t seed) {
  const std::vector<TntpRow> node_rows = tntp_rows(node_text);
  if (node_rows.empty()) throw std::invalid_argument("tntp: node file has no data rows");
  std::map<long, Point> by_id;
  for (const TntpRow& row : node_rows) {
    long id;
    if (!parse_int(cell_at(row, mapping.node_id_col, "node id"), id))
      throw std::invalid_argument("tntp: bad node id at line " + std::to_string(row.line));
    double x, y;
    if (!parse_num(cell_at(row, mapping.node_x_col, "x"), x) ||
        !parse_num(cell_at(row, mapping.node_y_col, "y"), y))
      throw std::invalid_argument("tntp: bad coordinate at line " + std::to_string(row.line));
    if (!by_id.emplace(id, Point{x, y}).second)
      throw std::invalid_argument("tntp: duplicate node id " + std::to_string(id) + " at line " +
                                  std::to_string(row.line));
  }
  std::map<long, int> index;
  std::vector<Point> raw;
  for (const auto& [id, p] : by_id) {
    index.emplace(id, static_cast<int>(raw.size()));
    raw.push_back(p);
  }

  const std::vector<TntpRow> link_rows = tntp_rows(link_text);
  if (link_rows.empty()) throw std::invalid_argument("tntp: link file has no data rows");
  struct RawLink {
    int i, j;
    double length;
    const TntpRow* row;
  };
  std::vector<RawLink> links;
  std::set<std::pair<int, int>> seen_dir;
  for (const TntpRow& row : link_rows) {
    long from, to;
    if (!parse_int(cell_at(row, mapping.link_from_col, "from"), from) ||
        !parse_int(cell_at(row, mapping.link_to_col, "to"), to))
      throw std::invalid_argument("tntp: bad link endpoint at line " + std::to_string(row.line));
    const auto fi = index.find(from), ti = index.find(to);
    if (fi == index.end() || ti == index.end())
      throw std::invalid_argument("tntp: link references unknown node at line " +
                                  std::to_string(row.line));
    if (from == to)
      throw std::invalid_argument("tntp: self-loop at line " + std::to_string(row.line));
    double len;
    if (!parse_num(cell_at(row, mapping.link_length_col, "length"), len) || !(len > 0.0))
      throw std::invalid_argument("tntp: bad link length at line " + std::to_string(row.line));
    if (mapping.merge_reverse && seen_dir.count({ti->second, fi->second})) continue;
    seen_dir.insert({fi->second, ti->second});
    links.push_back({fi->second, ti->second, len, &row});
  }

  const NormalizeInfo norm =
      normalize_coords_info(mapping.crs == "wgs84" ? project_lonlat(raw) : raw);

  RoadNetwork net;
  net.nodes = norm.points;
  Rng value_rng(mix_seed(seed, 0x76616c75ULL));
  for (const RawLink& l : links) {
    double length = l.length * mapping.length_scale * norm.scale;
    const double chord = dist(net.nodes[l.i], net.nodes[l.j]);
    if (length < chord) {
      if (!mapping.clamp_short_links)
        throw std::invalid_argument("tntp: link shorter than node distance at line " +
                                    std::to_string(l.row->line));
      length = chord * (1.0 + 1e-9);
    }
    double value;
    if (mapping.value.mode == "uniform")
      value = value_rng.uniform(mapping.value.lo, mapping.value.hi) / mapping.value.divisor;
    else if (mapping.value.mode == "constant")
      value = mapping.value.constant;
    else {
      double v;
      if (!parse_num(cell_at(*l.row, mapping.value.column, "value"), v))
        throw std::invalid_argument("tntp: bad value column at line " +
                                    std::to_string(l.row->line));
      value = v / mapping.value.divisor;
    }
    net.links.push_back({l.i, l.j, length, value});
  }
  validate_road_network(net, true);
  return net;
}

}  // namespace droneroute
