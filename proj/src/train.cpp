#include "droneroute/train.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace droneroute {

using nlohmann::json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

NormVariant parse_norm_variant(const std::string& name) {
  if (name == "ema-zscore") return NormVariant::EmaZscore;
  if (name == "batch-zscore") return NormVariant::BatchZscore;
  if (name == "ema-mean-div") return NormVariant::EmaMeanDiv;
  if (name == "none") return NormVariant::None;
  throw std::invalid_argument("unknown normalization variant " + name);
}

std::string norm_variant_name(NormVariant v) {
  switch (v) {
    case NormVariant::EmaZscore: return "ema-zscore";
    case NormVariant::BatchZscore: return "batch-zscore";
    case NormVariant::EmaMeanDiv: return "ema-mean-div";
    case NormVariant::None: return "none";
  }
  return "";
}

PcStats& RewardStats::slot(int pc) {
  if (pc < 0) throw std::invalid_argument("negative parameter-combination index");
  if (pc >= static_cast<int>(per_pc.size())) per_pc.resize(pc + 1);
  return per_pc[pc];
}

std::vector<double> normalize_rewards(const std::vector<double>& rewards, int pc,
                                      RewardStats& stats, NormVariant variant) {
  if (rewards.empty()) throw std::invalid_argument("normalize_rewards: empty batch");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;

  std::vector<double> out(rewards.size());
  switch (variant) {
    case NormVariant::None:
      return rewards;
    case NormVariant::BatchZscore: {
      const double denom = std::sqrt(var) + stats.eps;
      for (size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
      return out;
    }
    case NormVariant::EmaZscore: {
      PcStats& st = stats.slot(pc);
      if (!st.init) {
        st.mean = mean;
        st.var = var;
        st.init = true;
      } else {
        st.mean = (1.0 - stats.gamma) * st.mean + stats.gamma * mean;
        st.var = (1.0 - stats.gamma) * st.var + stats.gamma * var;
      }
      const double denom = std::sqrt(st.var) + stats.eps;
      for (size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - st.mean) / denom;
      return out;
    }
    case NormVariant::EmaMeanDiv: {
      PcStats& st = stats.slot(pc);
      if (!st.init) {
        st.mean = mean;
        st.init = true;
      } else {
        st.mean = (1.0 - stats.gamma) * st.mean + stats.gamma * mean;
      }
      for (size_t i = 0; i < rewards.size(); ++i) out[i] = rewards[i] / (st.mean + stats.eps);
      return out;
    }
  }
  return out;
}

void TrainSetup::validate() const {
  config.validate();
  gen.validate();
  if (combos.empty()) throw std::invalid_argument("train setup: no parameter combinations");
  for (const PcCombo& c : combos) {
    if (c.K < 1) throw std::invalid_argument("train setup: combination with K < 1");
    if (!(c.p_max > 0.0) || c.p_max > c.Q)
      throw std::invalid_argument("train setup: combination needs 0 < p_max <= Q");
  }
  if (eval_instances < 1) throw std::invalid_argument("train setup: eval_instances < 1");
}

TrainSetup parse_train_setup(const std::string& json_text) {
  const json j = json::parse(json_text);
  TrainSetup s;
  if (j.contains("config")) s.config = config_from_json(j.at("config"));
  if (j.contains("gen")) s.gen = gen_spec_from_json(j.at("gen"));
  for (const json& c : j.value("combos", json::array()))
    s.combos.push_back({c.at("K"), c.at("p_max"), c.at("Q")});
  s.variant = parse_norm_variant(j.value("variant", "ema-zscore"));
  s.eval_instances = j.value("eval_instances", s.eval_instances);
  s.validate();
  return s;
}

std::string train_setup_json(const TrainSetup& setup) {
  json combos = json::array();
  for (const PcCombo& c : setup.combos)
    combos.push_back({{"K", c.K}, {"p_max", c.p_max}, {"Q", c.Q}});
  return json{{"config", config_to_json(setup.config)},
              {"gen", gen_spec_to_json(setup.gen)},
              {"combos", combos},
              {"variant", norm_variant_name(setup.variant)},
              {"eval_instances", setup.eval_instances}}
             .dump(2) +
         "\n";
}

StepMetrics pomo_step(const std::vector<ProblemInstance>& batch, const PolicyParams& params,
                      int pc, RewardStats& stats, NormVariant variant, int max_starts,
                      uint64_t step_seed, ParamGrads& grads) {
  if (batch.empty()) throw std::invalid_argument("pomo_step: empty batch");
  const double t0 = now_seconds();
  grads.zero();

  std::vector<std::vector<Trajectory>> trajs(batch.size());
  std::vector<double> rewards;
  for (size_t i = 0; i < batch.size(); ++i) {
    std::vector<int> starts;
    if (batch[i].net.value_count() > 0) starts = secondary_starts(batch[i], max_starts);
    if (starts.empty()) starts = {-1};
    Rng rng(mix_seed(step_seed, i));
    trajs[i] = rollout(params, batch[i], DecodeMode::Sample, starts, rng);
    for (const Trajectory& t : trajs[i]) rewards.push_back(t.reward);
  }
  const std::vector<double> normed = normalize_rewards(rewards, pc, stats, variant);
  const double total = static_cast<double>(rewards.size());

  StepMetrics metrics;
  metrics.trajectories = static_cast<long>(rewards.size());
  metrics.raw_mean = mean_of(rewards);
  metrics.norm_mean = mean_of(normed);

  size_t off = 0;
  double baseline_sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const size_t count = trajs[i].size();
    double b = 0.0;
    for (size_t e = 0; e < count; ++e) b += normed[off + e];
    b /= static_cast<double>(count);
    baseline_sum += b;

    std::vector<double> weights(count);
    double adv_sum = 0.0;
    bool any = false;
    for (size_t e = 0; e < count; ++e) {
      const double adv = normed[off + e] - b;
      adv_sum += adv;
      weights[e] = -adv / total;
      any = any || weights[e] != 0.0;
    }
    metrics.adv_abs_sum += std::abs(adv_sum);
    if (any) replay_logprob_gradient(params, batch[i], trajs[i], weights, grads);
    off += count;
  }
  metrics.baseline = baseline_sum / static_cast<double>(batch.size());
  metrics.seconds = now_seconds() - t0;
  return metrics;
}

Adam::Adam(const PolicyParams& params) {
  m.reserve(params.tensors.size());
  v.reserve(params.tensors.size());
  for (const Mat& t : params.tensors) {
    m.emplace_back(t.rows(), t.cols());
    v.emplace_back(t.rows(), t.cols());
  }
}

void Adam::update(PolicyParams& params, const ParamGrads& grads, double lr) {
  const Config& cfg = params.cfg;
  ++t;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    double* th = params.tensors[i].data();
    const double* g = grads.g[i].data();
    double* mi = m[i].data();
    double* vi = v[i].data();
    for (size_t k = 0; k < params.tensors[i].size(); ++k) {
      const double gk = g[k] + cfg.weight_decay * th[k];
      mi[k] = cfg.adam_beta1 * mi[k] + (1.0 - cfg.adam_beta1) * gk;
      vi[k] = cfg.adam_beta2 * vi[k] + (1.0 - cfg.adam_beta2) * gk * gk;
      th[k] -= lr * (mi[k] / bc1) / (std::sqrt(vi[k] / bc2) + cfg.adam_eps);
    }
  }
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const uint64_t v = std::bit_cast<uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(s[off + i])) << (8 * i);
  return v;
}

double get_f64(const std::string& s, size_t off) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(s[off + i])) << (8 * i);
  return std::bit_cast<double>(v);
}

constexpr uint32_t kStateVersion = 1;

void save_train_state(const std::string& path, const Adam& adam, const RewardStats& stats,
                      int epoch) {
  json per_pc = json::array();
  for (const PcStats& st : stats.per_pc)
    per_pc.push_back({{"mean", st.mean}, {"var", st.var}, {"init", st.init}});
  const std::string header = json{{"epoch", epoch},
                                  {"adam_t", adam.t},
                                  {"stats", {{"gamma", stats.gamma}, {"eps", stats.eps}, {"per_pc", per_pc}}}}
                                 .dump();
  std::string out = "DRST";
  put_u32(out, kStateVersion);
  put_u32(out, static_cast<uint32_t>(header.size()));
  out += header;
  for (const std::vector<Mat>* block : {&adam.m, &adam.v})
    for (const Mat& t : *block)
      for (size_t k = 0; k < t.size(); ++k) put_f64(out, t.data()[k]);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

int load_train_state(const std::string& path, Adam& adam, RewardStats& stats) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("resume: cannot open optimizer state " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (data.size() < 12 || data.compare(0, 4, "DRST") != 0)
    throw std::runtime_error("optimizer state: bad magic");
  if (get_u32(data, 4) != kStateVersion)
    throw std::runtime_error("optimizer state: unsupported version");
  const uint32_t hlen = get_u32(data, 8);
  const json header = json::parse(data.substr(12, hlen));
  adam.t = header.at("adam_t");
  stats.gamma = header.at("stats").at("gamma");
  stats.eps = header.at("stats").at("eps");
  stats.per_pc.clear();
  for (const json& st : header.at("stats").at("per_pc"))
    stats.per_pc.push_back({st.at("mean"), st.at("var"), st.at("init")});
  size_t off = 12 + hlen;
  for (std::vector<Mat>* block : {&adam.m, &adam.v})
    for (Mat& t : *block) {
      if (data.size() < off + t.size() * 8)
        throw std::runtime_error("optimizer state: truncated payload");
      for (size_t k = 0; k < t.size(); ++k, off += 8) t.data()[k] = get_f64(data, off);
    }
  if (off != data.size()) throw std::runtime_error("optimizer state: trailing bytes");
  return header.at("epoch");
}

std::string epoch_checkpoint_path(const std::string& out_dir, int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d.ckpt", epoch);
  return out_dir + "/" + buf;
}

}  // namespace

TrainResult train_loop(const TrainSetup& setup, const std::string& out_dir,
                       const std::string& resume_checkpoint) {
  setup.validate();
  const Config& cfg = setup.config;
  std::filesystem::create_directories(out_dir);

  PolicyParams params;
  RewardStats stats;
  stats.gamma = cfg.reward_gamma;
  stats.eps = cfg.reward_eps;
  int start_epoch = 1;

  if (resume_checkpoint.empty()) {
    params = init_params(cfg, cfg.seed);
    round_params_fp32(params);
  } else {
    params = load_checkpoint(resume_checkpoint);
    // Resuming may extend the schedule, so the target epoch count is free to
    // change; everything else must match the run being continued.
    json saved = config_to_json(params.cfg), wanted = config_to_json(cfg);
    saved.erase("epochs");
    wanted.erase("epochs");
    if (saved != wanted)
      throw std::invalid_argument("resume: checkpoint config does not match the train config");
    params.cfg.epochs = cfg.epochs;
  }
  Adam adam(params);
  if (!resume_checkpoint.empty())
    start_epoch = load_train_state(resume_checkpoint + ".state", adam, stats) + 1;

  std::vector<ProblemInstance> eval_insts;
  for (int i = 0; i < setup.eval_instances; ++i) {
    GenSpec g = setup.gen;
    g.seed = mix_seed(cfg.seed, 0x6576616cULL, static_cast<uint64_t>(i));
    const PcCombo& c = setup.combos[i % setup.combos.size()];
    eval_insts.push_back(generate_instance(g, c.K, c.p_max, c.Q));
  }

  const auto mode = resume_checkpoint.empty() ? std::ios::trunc : std::ios::app;
  std::ofstream metrics_out(out_dir + "/metrics.ndjson", mode);
  std::ofstream evals_out(out_dir + "/evals.ndjson", mode);
  if (!metrics_out || !evals_out)
    throw std::runtime_error("cannot write logs under " + out_dir);

  TrainResult result;
  ParamGrads grads(params);
  for (int epoch = start_epoch; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr * (epoch >= cfg.lr_decay_epoch ? cfg.lr_decay_factor : 1.0);
    for (int step = 1; step <= cfg.steps_per_epoch; ++step) {
      const long global = static_cast<long>(epoch - 1) * cfg.steps_per_epoch + (step - 1);
      const int pc = static_cast<int>(global % static_cast<long>(setup.combos.size()));
      const PcCombo& combo = setup.combos[pc];
      std::vector<ProblemInstance> batch;
      batch.reserve(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i) {
        GenSpec g = setup.gen;
        g.seed = mix_seed(cfg.seed, static_cast<uint64_t>(epoch), static_cast<uint64_t>(step),
                          static_cast<uint64_t>(i));
        batch.push_back(generate_instance(g, combo.K, combo.p_max, combo.Q));
      }
      const uint64_t step_seed =
          mix_seed(mix_seed(cfg.seed, 0x726f6c6cULL), static_cast<uint64_t>(epoch),
                   static_cast<uint64_t>(step));
      const StepMetrics sm = pomo_step(batch, params, pc, stats, setup.variant, cfg.max_starts,
                                       step_seed, grads);
      result.max_adv_abs_sum = std::max(result.max_adv_abs_sum, sm.adv_abs_sum);
      adam.update(params, grads, lr);
      metrics_out << json{{"epoch", epoch},
                          {"step", step},
                          {"pc", pc},
                          {"raw_mean", sm.raw_mean},
                          {"norm_mean", sm.norm_mean},
                          {"baseline", sm.baseline},
                          {"lr", lr},
                          {"seconds", sm.seconds}}
                         .dump()
                  << "\n";
    }
    round_params_fp32(params);
    const std::string ckpt = epoch_checkpoint_path(out_dir, epoch);
    save_checkpoint(params, ckpt);
    save_train_state(ckpt + ".state", adam, stats, epoch);
    const EvalResult ev = evaluate(params, eval_insts, false, cfg.max_starts);
    evals_out << json{{"epoch", epoch}, {"mean_value", ev.mean_value}}.dump() << "\n";
    metrics_out.flush();
    evals_out.flush();
    result.evals.push_back({epoch, ev.mean_value});
    result.final_checkpoint = ckpt;
  }
  if (result.final_checkpoint.empty()) result.final_checkpoint = resume_checkpoint;
  return result;
}

EvalResult evaluate(const PolicyParams& params, const std::vector<ProblemInstance>& instances,
                    bool augment, int max_starts) {
  EvalResult res;
  for (const ProblemInstance& inst : instances) {
    const double t0 = now_seconds();
    std::vector<ProblemInstance> variants;
    if (augment) {
      auto all = augment_8fold(inst);
      variants.assign(std::make_move_iterator(all.begin()), std::make_move_iterator(all.end()));
    } else {
      variants.push_back(inst);
    }

    Solution best;
    best.solver = augment ? "policy-aug8" : "policy";
    bool have = false;
    for (const ProblemInstance& var : variants) {
      std::vector<int> starts;
      if (var.net.value_count() > 0) starts = secondary_starts(var, max_starts);
      if (starts.empty()) starts = {-1};
      Rng rng(0);
      const std::vector<Trajectory> trajs = rollout(params, var, DecodeMode::Greedy, starts, rng);
      const Trajectory* top = &trajs[0];
      for (const Trajectory& t : trajs)
        if (t.reward > top->reward) top = &t;
      const RouteSetReport rep = evaluate_route_set(inst, top->routes);
      if (!rep.feasible) continue;
      if (!have || rep.value > best.value) {
        best.routes = top->routes;
        best.value = rep.value;
        have = true;
      }
    }
    best.seconds = now_seconds() - t0;
    res.solutions.push_back(std::move(best));
    res.mean_value += res.solutions.back().value;
    res.mean_seconds += res.solutions.back().seconds;
  }
  if (!instances.empty()) {
    res.mean_value /= static_cast<double>(instances.size());
    res.mean_seconds /= static_cast<double>(instances.size());
  }
  return res;
}

}  // namespace droneroute
