#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "droneroute/env.hpp"
#include "droneroute/instgen.hpp"
#include "droneroute/io.hpp"
#include "droneroute/lp.hpp"
#include "droneroute/policy.hpp"
#include "droneroute/solvers.hpp"
#include "droneroute/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace droneroute;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitWarnings = 3;

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

void write_manifest(const std::string& out_dir, const std::string& command, uint64_t seed,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
  const json m{{"command", command}, {"seed", seed},       {"config", config},
               {"inputs", inputs},   {"outputs", outputs}, {"build", "droneroute/1"},
               {"seconds", seconds}};
  write_file(out_dir + "/manifest.json", m.dump(2) + "\n");
}

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct GenArgs {
  std::string spec_path;
  std::string network_path;
  int depot = 0;
  int K = 2;
  double p_max = 2.0;
  double Q = 10.0;
  int count = 1;
  uint64_t seed = 0;
  std::string out_dir = "out";
};

int cmd_gen(const GenArgs& a) {
  const double t0 = wall_seconds();
  fs::create_directories(a.out_dir);
  std::vector<std::string> outputs;
  json config;
  std::vector<std::string> inputs;
  if (!a.spec_path.empty()) {
    const json spec_json = json::parse(read_file(a.spec_path));
    GenSpec gen = gen_spec_from_json(spec_json.at("gen"));
    const int K = spec_json.value("K", a.K);
    const double p_max = spec_json.value("p_max", a.p_max);
    const double Q = spec_json.value("Q", a.Q);
    inputs.push_back(a.spec_path);
    config = {{"gen", gen_spec_to_json(gen)}, {"K", K}, {"p_max", p_max}, {"Q", Q}};
    for (int i = 0; i < a.count; ++i) {
      GenSpec g = gen;
      g.seed = a.seed + static_cast<uint64_t>(i);
      const ProblemInstance inst = generate_instance(g, K, p_max, Q);
      char name[32];
      std::snprintf(name, sizeof(name), "inst_%04d.json", i);
      const std::string path = a.out_dir + "/" + name;
      write_file(path, instance_json(inst));
      outputs.push_back(path);
    }
  } else {
    const RoadNetwork road = parse_road_network(read_file(a.network_path));
    inputs.push_back(a.network_path);
    config = {{"depot", a.depot}, {"K", a.K}, {"p_max", a.p_max}, {"Q", a.Q}};
    for (int i = 0; i < a.count; ++i) {
      const ProblemInstance inst =
          make_instance(road, a.depot, a.K, a.p_max, a.Q, a.seed + static_cast<uint64_t>(i));
      char name[32];
      std::snprintf(name, sizeof(name), "inst_%04d.json", i);
      const std::string path = a.out_dir + "/" + name;
      write_file(path, instance_json(inst));
      outputs.push_back(path);
    }
  }
  write_manifest(a.out_dir, "gen", a.seed, config, inputs, outputs, wall_seconds() - t0);
  std::cout << outputs.size() << " instance(s) written to " << a.out_dir << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::vector<std::string> instance_paths;
  std::vector<std::string> solvers;
  std::string checkpoint;
  bool augment = false;
  long budget = 50000000;
  int threads = 1;
  std::string out_dir = "out";
};

Solution run_solver(const std::string& name, const ProblemInstance& inst, long budget,
                    const PolicyParams* params, bool augment) {
  if (name == "exact") return solve_exact_dfs(inst, budget);
  if (name == "exact-norevisit") return solve_exact_norevisit(inst, budget);
  if (name == "greedy") return solve_greedy(inst);
  if (name == "policy")
    return evaluate(*params, {inst}, augment, params->cfg.max_starts).solutions.at(0);
  throw std::invalid_argument("unknown solver " + name);
}

int cmd_solve(const SolveArgs& a) {
  const double t0 = wall_seconds();
  std::optional<PolicyParams> params;
  const bool wants_policy =
      std::find(a.solvers.begin(), a.solvers.end(), "policy") != a.solvers.end();
  if (wants_policy) {
    if (a.checkpoint.empty())
      throw std::invalid_argument("solver policy requires --checkpoint");
    params = load_checkpoint(a.checkpoint);
  }
  if (a.augment && !wants_policy)
    throw std::invalid_argument("--augment applies to the policy solver only");
  for (const std::string& s : a.solvers)
    if (s != "exact" && s != "exact-norevisit" && s != "greedy" && s != "policy")
      throw std::invalid_argument("unknown solver " + s);

  fs::create_directories(a.out_dir);
  std::vector<ProblemInstance> instances;
  for (const std::string& p : a.instance_paths) instances.push_back(parse_instance(read_file(p)));

  // solutions[i][s]
  std::vector<std::vector<Solution>> solutions(instances.size(),
                                               std::vector<Solution>(a.solvers.size()));
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= instances.size() || failed.load()) return;
      try {
        for (size_t s = 0; s < a.solvers.size(); ++s)
          solutions[i][s] =
              run_solver(a.solvers[s], instances[i], a.budget, params ? &*params : nullptr,
                         a.augment);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mu);
        failed = true;
        failure = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(a.threads, static_cast<int>(instances.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failed) throw std::runtime_error(failure);

  bool warn_budget = false;
  std::vector<std::string> outputs;
  json summary_instances = json::array();
  std::vector<double> mean_value(a.solvers.size(), 0.0), mean_seconds(a.solvers.size(), 0.0);
  for (size_t i = 0; i < instances.size(); ++i) {
    json values = json::object(), seconds = json::object();
    for (size_t s = 0; s < a.solvers.size(); ++s) {
      const Solution& sol = solutions[i][s];
      const std::string path =
          a.out_dir + "/" + file_stem(a.instance_paths[i]) + "." + a.solvers[s] + ".json";
      write_file(path, solution_json(instances[i], sol));
      outputs.push_back(path);
      values[a.solvers[s]] = sol.value;
      seconds[a.solvers[s]] = sol.seconds;
      mean_value[s] += sol.value;
      mean_seconds[s] += sol.seconds;
      if ((a.solvers[s] == "exact" || a.solvers[s] == "exact-norevisit") && !sol.optimal)
        warn_budget = true;
    }
    summary_instances.push_back(
        {{"file", a.instance_paths[i]}, {"values", values}, {"seconds", seconds}});
  }
  for (size_t s = 0; s < a.solvers.size(); ++s) {
    mean_value[s] /= static_cast<double>(instances.size());
    mean_seconds[s] /= static_cast<double>(instances.size());
  }

  json gaps = json::object();
  for (size_t s = 1; s < a.solvers.size(); ++s) {
    double gsum = 0.0;
    int counted = 0;
    for (size_t i = 0; i < instances.size(); ++i) {
      const double ref = solutions[i][0].value;
      if (ref > 0.0) {
        gsum += gap(ref, solutions[i][s].value);
        ++counted;
      }
    }
    if (counted > 0) gaps[a.solvers[s]] = gsum / counted;
  }

  json mv = json::object(), ms = json::object();
  for (size_t s = 0; s < a.solvers.size(); ++s) {
    mv[a.solvers[s]] = mean_value[s];
    ms[a.solvers[s]] = mean_seconds[s];
  }
  const json summary{{"solvers", a.solvers},
                     {"instances", summary_instances},
                     {"mean_value", mv},
                     {"mean_seconds", ms},
                     {"mean_gap_vs_" + a.solvers[0], gaps},
                     {"budget_exhausted", warn_budget}};
  write_file(a.out_dir + "/summary.json", summary.dump(2) + "\n");
  outputs.push_back(a.out_dir + "/summary.json");
  write_manifest(a.out_dir, "solve", 0,
                 json{{"solvers", a.solvers}, {"budget", a.budget}, {"augment", a.augment}},
                 a.instance_paths, outputs, wall_seconds() - t0);

  std::cout << "solver";
  for (size_t s = 0; s < a.solvers.size(); ++s) std::cout << "  " << a.solvers[s];
  std::cout << "\nmean value";
  for (size_t s = 0; s < a.solvers.size(); ++s) std::cout << "  " << mean_value[s];
  std::cout << "\nmean seconds";
  for (size_t s = 0; s < a.solvers.size(); ++s) std::cout << "  " << mean_seconds[s];
  std::cout << "\n";
  for (auto& [name, g] : gaps.items())
    std::cout << "mean gap of " << name << " vs " << a.solvers[0] << ": " << g.get<double>()
              << "\n";
  if (warn_budget) {
    std::cerr << "warning: search budget exhausted on at least one instance; optimality not "
                 "proven\n";
    return kExitWarnings;
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string resume;
};

int cmd_train(const TrainArgs& a) {
  const double t0 = wall_seconds();
  const TrainSetup setup = parse_train_setup(read_file(a.config_path));
  const TrainResult result = train_loop(setup, a.out_dir, a.resume);
  write_manifest(a.out_dir, "train", setup.config.seed, json::parse(train_setup_json(setup)),
                 {a.config_path}, {result.final_checkpoint}, wall_seconds() - t0);
  std::cout << "final checkpoint: " << result.final_checkpoint << "\n";
  for (const EpochEval& e : result.evals)
    std::cout << "epoch " << e.epoch << " held-out mean value " << e.mean_value << "\n";
  return kExitOk;
}

struct ExportArgs {
  std::string what;
  std::string instance_path;
  std::string routes_path;
  std::string checkpoint;
  int layer = -1;
  std::string out_path;
};

int cmd_export(const ExportArgs& a) {
  const ProblemInstance inst = parse_instance(read_file(a.instance_path));
  if (a.what == "lp") {
    write_file(a.out_path, emit_lp(inst));
  } else if (a.what == "geojson") {
    if (a.routes_path.empty()) throw std::invalid_argument("geojson export requires --routes");
    const auto routes = parse_route_set(read_file(a.routes_path));
    write_file(a.out_path, routes_geojson(inst, routes));
  } else if (a.what == "embeddings") {
    if (a.checkpoint.empty()) throw std::invalid_argument("embeddings export requires --checkpoint");
    const PolicyParams params = load_checkpoint(a.checkpoint);
    const std::vector<Mat> layers = encode_layers(params, inst);
    const int layer = a.layer < 0 ? static_cast<int>(layers.size()) - 1 : a.layer;
    if (layer >= static_cast<int>(layers.size()))
      throw std::invalid_argument("layer index exceeds encoder depth " +
                                  std::to_string(layers.size() - 1));
    write_file(a.out_path, embeddings_tsv(layers[layer]));
  } else {
    throw std::invalid_argument("unknown export target " + a.what);
  }
  std::cout << a.out_path << "\n";
  return kExitOk;
}

struct ImportArgs {
  std::string nodes_path;
  std::string links_path;
  std::string mapping_path;
  uint64_t seed = 0;
  std::string out_path = "network.json";
};

int cmd_import(const ImportArgs& a) {
  TntpMapping mapping;
  if (!a.mapping_path.empty()) mapping = parse_tntp_mapping(read_file(a.mapping_path));
  const RoadNetwork net =
      import_tntp(read_file(a.nodes_path), read_file(a.links_path), mapping, a.seed);
  write_file(a.out_path, road_network_json(net));
  std::cout << net.nodes.size() << " nodes, " << net.links.size() << " links -> " << a.out_path
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"post-disaster drone assessment routing toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate problem instances");
  auto* spec_opt = gen_cmd->add_option("--spec", gen.spec_path, "generator spec JSON");
  auto* net_opt =
      gen_cmd->add_option("--network", gen.network_path, "road network JSON to instantiate");
  gen_cmd->add_option("--depot", gen.depot, "depot node (with --network)");
  gen_cmd->add_option("--drones", gen.K, "fleet size (with --network)");
  gen_cmd->add_option("--p-max", gen.p_max, "assessment duration cap (with --network)");
  gen_cmd->add_option("--battery", gen.Q, "battery flight-time cap (with --network)");
  gen_cmd->add_option("--count", gen.count, "number of instances")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "base seed; instance i uses seed+i");
  gen_cmd->add_option("--out", gen.out_dir, "output directory");
  spec_opt->excludes(net_opt);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run solvers over instances");
  solve_cmd->add_option("--instances", solve.instance_paths, "instance files")->required();
  solve_cmd
      ->add_option("--solver", solve.solvers,
                   "exact | exact-norevisit | greedy | policy (repeatable; first is the gap "
                   "reference)")
      ->required();
  solve_cmd->add_option("--checkpoint", solve.checkpoint, "policy checkpoint");
  solve_cmd->add_flag("--augment", solve.augment, "8-fold augmentation (policy only)");
  solve_cmd->add_option("--budget", solve.budget, "exact-search node budget");
  solve_cmd->add_option("--threads", solve.threads, "instance-level parallelism");
  solve_cmd->add_option("--out", solve.out_dir, "output directory");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train the policy");
  train_cmd->add_option("--config", train.config_path, "train setup JSON")->required();
  train_cmd->add_option("--out", train.out_dir, "output directory");
  train_cmd->add_option("--resume", train.resume, "checkpoint to resume from");

  ExportArgs exp;
  CLI::App* export_cmd = app.add_subcommand("export", "export artifacts");
  export_cmd->add_option("--what", exp.what, "lp | geojson | embeddings")->required();
  export_cmd->add_option("--instance", exp.instance_path, "instance file")->required();
  export_cmd->add_option("--routes", exp.routes_path, "route-set JSON (geojson)");
  export_cmd->add_option("--checkpoint", exp.checkpoint, "policy checkpoint (embeddings)");
  export_cmd->add_option("--layer", exp.layer, "encoder layer (embeddings; default last)");
  export_cmd->add_option("--out", exp.out_path, "output file")->required();

  ImportArgs imp;
  CLI::App* import_cmd = app.add_subcommand("import", "import a TNTP network");
  import_cmd->add_option("--nodes", imp.nodes_path, "TNTP node file")->required();
  import_cmd->add_option("--links", imp.links_path, "TNTP link file")->required();
  import_cmd->add_option("--mapping", imp.mapping_path, "column mapping JSON");
  import_cmd->add_option("--seed", imp.seed, "value-draw seed");
  import_cmd->add_option("--out", imp.out_path, "output network file");

  try {
    app.parse(argc, argv);
    if (gen_cmd->parsed()) {
      if (gen.spec_path.empty() && gen.network_path.empty())
        throw CLI::RequiredError("--spec or --network");
      return cmd_gen(gen);
    }
    if (solve_cmd->parsed()) return cmd_solve(solve);
    if (train_cmd->parsed()) return cmd_train(train);
    if (export_cmd->parsed()) return cmd_export(exp);
    if (import_cmd->parsed()) return cmd_import(imp);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
