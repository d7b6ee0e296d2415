#include "droneroute/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "droneroute/tape.hpp"

namespace droneroute {

namespace {

using nlohmann::json;

constexpr double kNormEps = 1e-5;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void build_layout(PolicyParams& p) {
  const int d = p.cfg.embed_dim;
  const int f = p.cfg.ffn_dim;
  auto addt = [&p](std::string name, int r, int c) {
    p.names.push_back(std::move(name));
    p.tensors.emplace_back(r, c);
  };
  addt("node_w", 3, d);
  addt("node_b", 1, d);
  addt("depot_w", 5, d);
  addt("depot_b", 1, d);
  for (int l = 0; l < p.cfg.layers; ++l) {
    const std::string pre = "enc" + std::to_string(l) + "_";
    addt(pre + "att_wq", d, d);
    addt(pre + "att_wk", d, d);
    addt(pre + "att_wv", d, d);
    addt(pre + "att_wo", d, d);
    addt(pre + "norm1_g", 1, d);
    addt(pre + "norm1_b", 1, d);
    addt(pre + "ffn_w1", d, f);
    addt(pre + "ffn_b1", 1, f);
    addt(pre + "ffn_w2", f, d);
    addt(pre + "ffn_b2", 1, d);
    addt(pre + "norm2_g", 1, d);
    addt(pre + "norm2_b", 1, d);
  }
  addt("ctx_w", d + 2, d);
  addt("ctx_b", 1, d);
  addt("glimpse_wq", d, d);
  addt("glimpse_wk", d, d);
  addt("glimpse_wv", d, d);
  addt("glimpse_wo", d, d);
  addt("final_wq", d, d);
  addt("final_wk", d, d);
}

// The fast helpers below mirror the arithmetic of the corresponding tape ops
// operation for operation, so a replayed episode reproduces rollout
// log-probabilities bit for bit.

void norm_affine_inplace(Mat& x, const Mat& g, const Mat& b) {
  const double m = x.rows();
  for (int c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (int r = 0; r < x.rows(); ++r) mean += x(r, c);
    mean /= m;
    double var = 0.0;
    for (int r = 0; r < x.rows(); ++r) {
      const double d = x(r, c) - mean;
      var += d * d;
    }
    var /= m;
    const double s = std::sqrt(var + kNormEps);
    for (int r = 0; r < x.rows(); ++r) x(r, c) = (x(r, c) - mean) / s * g(0, c) + b(0, c);
  }
}

// excluded may be null (attend to everything); nonzero entries get weight 0.
void softmax_row_inplace(double* row, const uint8_t* excluded, int n) {
  double hi = kNegInf;
  for (int c = 0; c < n; ++c)
    if (!(excluded && excluded[c]) && row[c] > hi) hi = row[c];
  double z = 0.0;
  for (int c = 0; c < n; ++c) {
    const double e = (excluded && excluded[c]) ? 0.0 : std::exp(row[c] - hi);
    row[c] = e;
    z += e;
  }
  for (int c = 0; c < n; ++c) row[c] /= z;
}

void log_softmax_row_inplace(double* row, const uint8_t* excluded, int n) {
  double hi = kNegInf;
  for (int c = 0; c < n; ++c)
    if (!(excluded && excluded[c]) && row[c] > hi) hi = row[c];
  double z = 0.0;
  for (int c = 0; c < n; ++c)
    if (!(excluded && excluded[c])) z += std::exp(row[c] - hi);
  const double lse = hi + std::log(z);
  for (int c = 0; c < n; ++c) row[c] = (excluded && excluded[c]) ? kNegInf : row[c] - lse;
}

Mat self_attention(const PolicyParams& p, const Mat& x, const std::string& pre) {
  const int d = p.cfg.embed_dim;
  const int heads = p.cfg.heads;
  const int dh = d / heads;
  const Mat q = matmul(x, p.tensor(pre + "att_wq"));
  const Mat k = matmul(x, p.tensor(pre + "att_wk"));
  const Mat v = matmul(x, p.tensor(pre + "att_wv"));
  Mat cat(x.rows(), d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int hh = 0; hh < heads; ++hh) {
    const int off = hh * dh;
    Mat sc(x.rows(), x.rows());
    block_dot_nt(sc, q, off, k, off, dh, scale);
    for (int r = 0; r < sc.rows(); ++r) softmax_row_inplace(sc.row(r), nullptr, sc.cols());
    block_weighted_rows(cat, off, sc, v, off, dh);
  }
  return matmul(cat, p.tensor(pre + "att_wo"));
}

Mat input_features_nodes(const ProblemInstance& inst) {
  const TransformedNetwork& net = inst.net;
  Mat f(net.node_count(), 3);
  for (int i = 0; i < net.node_count(); ++i) {
    f(i, 0) = net.coords[i].x;
    f(i, 1) = net.coords[i].y;
    f(i, 2) = net.value[i];
  }
  return f;
}

Mat input_features_depot(const ProblemInstance& inst) {
  Mat f(1, 5);
  f(0, 0) = inst.net.coords[inst.depot].x;
  f(0, 1) = inst.net.coords[inst.depot].y;
  f(0, 2) = static_cast<double>(inst.K);
  f(0, 3) = inst.p_max;
  f(0, 4) = inst.Q;
  return f;
}

int context_row(const EnvState& s) {
  return s.current == s.inst->depot ? 0 : s.current + 1;
}

// Batched decoder pass: one row per pending episode/step. Returns the full
// log-probability matrix; masks use environment polarity (1 = selectable).
Mat decode_logprob_rows(const PolicyParams& p, const DecoderCache& cache, const Mat& ctx,
                        const std::vector<const uint8_t*>& masks) {
  const int d = p.cfg.embed_dim;
  const int heads = p.cfg.heads;
  const int dh = d / heads;
  const int rows = ctx.rows();
  const int n = cache.keys_g.rows();
  std::vector<uint8_t> excluded(static_cast<size_t>(rows) * n);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < n; ++j) excluded[static_cast<size_t>(r) * n + j] = masks[r][j] ? 0 : 1;

  Mat q = matmul(ctx, p.tensor("ctx_w"));
  add_rowvec_inplace(q, p.tensor("ctx_b"));
  const Mat qg = matmul(q, p.tensor("glimpse_wq"));
  Mat cat(rows, d);
  const double scale_h = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int hh = 0; hh < heads; ++hh) {
    const int off = hh * dh;
    Mat sc(rows, n);
    block_dot_nt(sc, qg, off, cache.keys_g, off, dh, scale_h);
    for (int r = 0; r < rows; ++r)
      softmax_row_inplace(sc.row(r), excluded.data() + static_cast<size_t>(r) * n, n);
    block_weighted_rows(cat, off, sc, cache.vals_g, off, dh);
  }
  const Mat g = matmul(cat, p.tensor("glimpse_wo"));
  const Mat q2 = matmul(g, p.tensor("final_wq"));
  Mat u(rows, n);
  block_dot_nt(u, q2, 0, cache.keys_s, 0, d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < n; ++j) u(r, j) = std::tanh(u(r, j)) * p.cfg.logit_clip;
  for (int r = 0; r < rows; ++r)
    log_softmax_row_inplace(u.row(r), excluded.data() + static_cast<size_t>(r) * n, n);
  return u;
}

int pick_greedy(const double* logprob, int n) {
  int best = -1;
  double hi = kNegInf;
  for (int j = 0; j < n; ++j)
    if (logprob[j] > hi) {
      hi = logprob[j];
      best = j;
    }
  return best;
}

int pick_sample(const double* logprob, const uint8_t* ok, int n, Rng& rng) {
  const double r = rng.uniform();
  double cum = 0.0;
  int last_ok = -1;
  for (int j = 0; j < n; ++j) {
    if (!ok[j]) continue;
    last_ok = j;
    cum += std::exp(logprob[j]);
    if (r < cum) return j;
  }
  return last_ok;  // cumulative rounded below 1
}

}  // namespace

int PolicyParams::find(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

Mat& PolicyParams::tensor(const std::string& name) {
  const int i = find(name);
  if (i < 0) throw std::invalid_argument("unknown parameter tensor " + name);
  return tensors[i];
}

const Mat& PolicyParams::tensor(const std::string& name) const {
  const int i = find(name);
  if (i < 0) throw std::invalid_argument("unknown parameter tensor " + name);
  return tensors[i];
}

size_t PolicyParams::param_count() const {
  size_t total = 0;
  for (const Mat& t : tensors) total += t.size();
  return total;
}

PolicyParams init_params(const Config& cfg, uint64_t seed) {
  cfg.validate();
  PolicyParams p;
  p.cfg = cfg;
  build_layout(p);
  Rng rng(mix_seed(seed, 0x696e6974ULL));
  for (size_t i = 0; i < p.tensors.size(); ++i) {
    Mat& t = p.tensors[i];
    const bool is_norm = p.names[i].find("norm") != std::string::npos;
    if (is_norm) {
      t.fill(p.names[i].back() == 'g' ? 1.0 : 0.0);
      continue;
    }
    const double fan_in = t.rows() > 1 ? t.rows() : t.cols();
    const double bound = 1.0 / std::sqrt(fan_in);
    for (size_t k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform(-bound, bound);
  }
  return p;
}

ParamGrads::ParamGrads(const PolicyParams& params) {
  g.reserve(params.tensors.size());
  for (const Mat& t : params.tensors) g.emplace_back(t.rows(), t.cols());
}

void ParamGrads::zero() {
  for (Mat& m : g) m.zero();
}

void ParamGrads::scale_all(double s) {
  for (Mat& m : g)
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] *= s;
}

std::vector<Mat> encode_layers(const PolicyParams& params, const ProblemInstance& inst) {
  const int d = params.cfg.embed_dim;
  const int n = inst.net.node_count();
  const Mat nf = input_features_nodes(inst);
  const Mat df = input_features_depot(inst);
  Mat row0 = matmul(df, params.tensor("depot_w"));
  add_rowvec_inplace(row0, params.tensor("depot_b"));
  Mat rest = matmul(nf, params.tensor("node_w"));
  add_rowvec_inplace(rest, params.tensor("node_b"));
  Mat h(n + 1, d);
  for (int c = 0; c < d; ++c) h(0, c) = row0(0, c);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) h(i + 1, c) = rest(i, c);

  std::vector<Mat> out;
  out.push_back(h);
  for (int l = 0; l < params.cfg.layers; ++l) {
    const std::string pre = "enc" + std::to_string(l) + "_";
    Mat att = self_attention(params, h, pre);
    Mat res = h;
    add_inplace(res, att);
    norm_affine_inplace(res, params.tensor(pre + "norm1_g"), params.tensor(pre + "norm1_b"));
    Mat f1 = matmul(res, params.tensor(pre + "ffn_w1"));
    add_rowvec_inplace(f1, params.tensor(pre + "ffn_b1"));
    for (size_t i = 0; i < f1.size(); ++i)
      f1.data()[i] = f1.data()[i] > 0.0 ? f1.data()[i] : 0.0;
    Mat f2 = matmul(f1, params.tensor(pre + "ffn_w2"));
    add_rowvec_inplace(f2, params.tensor(pre + "ffn_b2"));
    add_inplace(res, f2);
    norm_affine_inplace(res, params.tensor(pre + "norm2_g"), params.tensor(pre + "norm2_b"));
    h = res;
    out.push_back(h);
  }
  return out;
}

Mat encode(const PolicyParams& params, const ProblemInstance& inst) {
  return encode_layers(params, inst).back();
}

DecoderCache make_decoder_cache(const PolicyParams& params, Mat h) {
  const int n = h.rows() - 1;
  Mat actions(n, h.cols());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < h.cols(); ++c) actions(i, c) = h(i + 1, c);
  DecoderCache cache;
  cache.h = std::move(h);
  cache.keys_g = matmul(actions, params.tensor("glimpse_wk"));
  cache.vals_g = matmul(actions, params.tensor("glimpse_wv"));
  cache.keys_s = matmul(actions, params.tensor("final_wk"));
  return cache;
}

ActionDistribution decode_step(const PolicyParams& params, const DecoderCache& cache,
                               const EnvState& state, const ActionMask& mask) {
  const int d = params.cfg.embed_dim;
  const int n = cache.keys_g.rows();
  if (mask.count == 0) throw std::logic_error("decode_step: empty mask");
  Mat ctx(1, d + 2);
  const int row = context_row(state);
  for (int c = 0; c < d; ++c) ctx(0, c) = cache.h(row, c);
  ctx(0, d) = state.elapsed;
  ctx(0, d + 1) = static_cast<double>(state.drone);
  const Mat lp = decode_logprob_rows(params, cache, ctx, {mask.ok.data()});
  ActionDistribution dist;
  dist.mask = mask.ok;
  dist.logprobs.assign(lp.row(0), lp.row(0) + n);
  dist.probs.resize(n);
  for (int j = 0; j < n; ++j) dist.probs[j] = mask.ok[j] ? std::exp(dist.logprobs[j]) : 0.0;
  return dist;
}

std::vector<Trajectory> rollout(const PolicyParams& params, const ProblemInstance& inst,
                                DecodeMode mode, const std::vector<int>& starts, Rng& rng) {
  if (starts.empty()) throw std::invalid_argument("rollout: no starts given");
  const int d = params.cfg.embed_dim;
  const int n = inst.net.node_count();
  DecoderCache cache = make_decoder_cache(params, encode(params, inst));

  const int episodes = static_cast<int>(starts.size());
  std::vector<EnvState> states;
  states.reserve(episodes);
  std::vector<Trajectory> trajs(episodes);
  for (int e = 0; e < episodes; ++e) {
    states.push_back(reset(inst, starts[e]));
    trajs[e].start = starts[e];
  }

  std::vector<int> pending;
  std::vector<std::vector<uint8_t>> pending_masks;
  while (true) {
    pending.clear();
    pending_masks.clear();
    for (int e = 0; e < episodes; ++e) {
      while (!states[e].done) {
        ActionMask m = feasible_actions(states[e]);
        if (m.count != 1) {
          pending.push_back(e);
          pending_masks.push_back(std::move(m.ok));
          break;
        }
        int act = 0;
        while (!m.ok[act]) ++act;
        step(states[e], act);
        trajs[e].actions.push_back(act);
      }
    }
    if (pending.empty()) break;

    Mat ctx(static_cast<int>(pending.size()), d + 2);
    std::vector<const uint8_t*> maskptrs(pending.size());
    for (size_t r = 0; r < pending.size(); ++r) {
      const EnvState& s = states[pending[r]];
      const int row = context_row(s);
      for (int c = 0; c < d; ++c) ctx(static_cast<int>(r), c) = cache.h(row, c);
      ctx(static_cast<int>(r), d) = s.elapsed;
      ctx(static_cast<int>(r), d + 1) = static_cast<double>(s.drone);
      maskptrs[r] = pending_masks[r].data();
    }
    const Mat lp = decode_logprob_rows(params, cache, ctx, maskptrs);
    for (size_t r = 0; r < pending.size(); ++r) {
      const int e = pending[r];
      const int act = mode == DecodeMode::Greedy
                          ? pick_greedy(lp.row(static_cast<int>(r)), n)
                          : pick_sample(lp.row(static_cast<int>(r)), pending_masks[r].data(), n, rng);
      trajs[e].logprob += lp(static_cast<int>(r), act);
      step(states[e], act);
      trajs[e].actions.push_back(act);
    }
  }

  for (int e = 0; e < episodes; ++e) {
    trajs[e].routes = states[e].routes;
    trajs[e].reward = states[e].collected;
  }
  return trajs;
}

namespace {

struct ReplayEpisode {
  std::vector<int> prev_rows;
  std::vector<double> elapsed;
  std::vector<double> drone;
  std::vector<uint8_t> excluded;  // steps x n, row-major
  std::vector<int> actions;
};

ReplayEpisode replay_episode_steps(const ProblemInstance& inst, const Trajectory& traj) {
  const int n = inst.net.node_count();
  ReplayEpisode ep;
  EnvState s = reset(inst, traj.start);
  for (int act : traj.actions) {
    if (s.done) throw std::runtime_error("trajectory not replayable: extra action after terminal");
    const ActionMask m = feasible_actions(s);
    if (act < 0 || act >= n || !m.ok[act])
      throw std::runtime_error("trajectory not replayable: infeasible action");
    if (m.count > 1) {
      ep.prev_rows.push_back(context_row(s));
      ep.elapsed.push_back(s.elapsed);
      ep.drone.push_back(static_cast<double>(s.drone));
      for (int j = 0; j < n; ++j) ep.excluded.push_back(m.ok[j] ? 0 : 1);
      ep.actions.push_back(act);
    }
    step(s, act);
  }
  return ep;
}

double replay_core(const PolicyParams& p, const ProblemInstance& inst,
                   const std::vector<Trajectory>& trajectories, const std::vector<double>& weights,
                   ParamGrads* grads) {
  if (trajectories.size() != weights.size())
    throw std::invalid_argument("replay: weights/trajectories length mismatch");
  const int d = p.cfg.embed_dim;
  const int heads = p.cfg.heads;
  const int dh = d / heads;
  const int n = inst.net.node_count();

  Tape tape;
  std::vector<int> leaf(p.tensors.size());
  for (size_t i = 0; i < p.tensors.size(); ++i)
    leaf[i] = tape.leaf(p.tensors[i], grads ? &grads->g[i] : nullptr);
  auto id = [&](const std::string& name) { return leaf[p.find(name)]; };

  // Encoder, mirroring encode_layers.
  const int row0 =
      tape.add_rowvec(tape.matmul(tape.constant(input_features_depot(inst)), id("depot_w")),
                      id("depot_b"));
  const int rest =
      tape.add_rowvec(tape.matmul(tape.constant(input_features_nodes(inst)), id("node_w")),
                      id("node_b"));
  int h = tape.concat_rows({row0, rest});
  for (int l = 0; l < p.cfg.layers; ++l) {
    const std::string pre = "enc" + std::to_string(l) + "_";
    const int q = tape.matmul(h, id(pre + "att_wq"));
    const int k = tape.matmul(h, id(pre + "att_wk"));
    const int v = tape.matmul(h, id(pre + "att_wv"));
    const auto qh = tape.split_cols(q, heads);
    const auto kh = tape.split_cols(k, heads);
    const auto vh = tape.split_cols(v, heads);
    std::vector<int> outs;
    for (int hh = 0; hh < heads; ++hh) {
      const int sc =
          tape.scale(tape.matmul(qh[hh], tape.transpose(kh[hh])), 1.0 / std::sqrt(double(dh)));
      const int at = tape.softmax_rows(sc, {});
      outs.push_back(tape.matmul(at, vh[hh]));
    }
    const int att = tape.matmul(tape.concat_cols(outs), id(pre + "att_wo"));
    const int res = tape.add(h, att);
    const int n1 = tape.add_rowvec(
        tape.mul_rowvec(tape.instance_norm(res, kNormEps), id(pre + "norm1_g")),
        id(pre + "norm1_b"));
    const int f1 = tape.relu(tape.add_rowvec(tape.matmul(n1, id(pre + "ffn_w1")), id(pre + "ffn_b1")));
    const int f2 = tape.add_rowvec(tape.matmul(f1, id(pre + "ffn_w2")), id(pre + "ffn_b2"));
    const int res2 = tape.add(n1, f2);
    h = tape.add_rowvec(tape.mul_rowvec(tape.instance_norm(res2, kNormEps), id(pre + "norm2_g")),
                        id(pre + "norm2_b"));
  }

  std::vector<int> action_rows(n);
  for (int i = 0; i < n; ++i) action_rows[i] = i + 1;
  const int h_act = tape.gather_rows(h, action_rows);
  const int kg = tape.matmul(h_act, id("glimpse_wk"));
  const int vg = tape.matmul(h_act, id("glimpse_wv"));
  const int ks = tape.matmul(h_act, id("final_wk"));
  const auto kgh = tape.split_cols(kg, heads);
  const auto vgh = tape.split_cols(vg, heads);
  std::vector<int> kght(heads);
  for (int hh = 0; hh < heads; ++hh) kght[hh] = tape.transpose(kgh[hh]);
  const int kst = tape.transpose(ks);

  int total = -1;
  double value = 0.0;
  for (size_t e = 0; e < trajectories.size(); ++e) {
    const ReplayEpisode ep = replay_episode_steps(inst, trajectories[e]);
    const int S = static_cast<int>(ep.actions.size());
    if (S == 0) continue;
    Mat extras(S, 2);
    for (int t = 0; t < S; ++t) {
      extras(t, 0) = ep.elapsed[t];
      extras(t, 1) = ep.drone[t];
    }
    const int ctx =
        tape.concat_cols({tape.gather_rows(h, ep.prev_rows), tape.constant(std::move(extras))});
    const int q = tape.add_rowvec(tape.matmul(ctx, id("ctx_w")), id("ctx_b"));
    const int qg = tape.matmul(q, id("glimpse_wq"));
    const auto qgh = tape.split_cols(qg, heads);
    std::vector<int> outs;
    for (int hh = 0; hh < heads; ++hh) {
      const int sc = tape.scale(tape.matmul(qgh[hh], kght[hh]), 1.0 / std::sqrt(double(dh)));
      const int at = tape.softmax_rows(sc, ep.excluded);
      outs.push_back(tape.matmul(at, vgh[hh]));
    }
    const int g = tape.matmul(tape.concat_cols(outs), id("glimpse_wo"));
    const int q2 = tape.matmul(g, id("final_wq"));
    const int u = tape.scale(tape.matmul(q2, kst), 1.0 / std::sqrt(double(d)));
    const int logits = tape.scale(tape.tanh_act(u), p.cfg.logit_clip);
    const int ls = tape.log_softmax_rows(logits, ep.excluded);
    std::vector<int> rows(S);
    for (int t = 0; t < S; ++t) rows[t] = t;
    const int picks = tape.pick(ls, rows, ep.actions);
    Mat w(1, S);
    w.fill(weights[e]);
    const int term = tape.matmul(tape.constant(std::move(w)), picks);
    total = total < 0 ? term : tape.add(total, term);
  }
  if (total < 0) return 0.0;
  value = tape.value(total)(0, 0);
  if (grads) tape.backward(total);
  return value;
}

}  // namespace

double replay_logprob(const PolicyParams& params, const ProblemInstance& inst,
                      const std::vector<Trajectory>& trajectories,
                      const std::vector<double>& weights) {
  return replay_core(params, inst, trajectories, weights, nullptr);
}

double replay_logprob_gradient(const PolicyParams& params, const ProblemInstance& inst,
                               const std::vector<Trajectory>& trajectories,
                               const std::vector<double>& weights, ParamGrads& grads) {
  return replay_core(params, inst, trajectories, weights, &grads);
}

double logprob_gradient(const PolicyParams& params, const ProblemInstance& inst,
                        const Trajectory& trajectory, ParamGrads& grads) {
  return replay_logprob_gradient(params, inst, {trajectory}, {1.0}, grads);
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(s[off + i])) << (8 * i);
  return v;
}

constexpr uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path) {
  json tensors = json::array();
  for (size_t i = 0; i < params.tensors.size(); ++i)
    tensors.push_back({{"name", params.names[i]},
                       {"rows", params.tensors[i].rows()},
                       {"cols", params.tensors[i].cols()}});
  const std::string header =
      json{{"config", config_to_json(params.cfg)}, {"tensors", tensors}}.dump();
  std::string out = "DRCK";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(header.size()));
  out += header;
  for (const Mat& t : params.tensors)
    for (size_t k = 0; k < t.size(); ++k)
      put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(t.data()[k])));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (data.size() < 12 || data.compare(0, 4, "DRCK") != 0)
    throw std::runtime_error("checkpoint: bad magic");
  if (get_u32(data, 4) != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  const uint32_t hlen = get_u32(data, 8);
  if (data.size() < 12 + static_cast<size_t>(hlen)) throw std::runtime_error("checkpoint: truncated header");
  const json header = json::parse(data.substr(12, hlen));

  PolicyParams p;
  p.cfg = config_from_json(header.at("config"));
  build_layout(p);
  const json& tensors = header.at("tensors");
  if (tensors.size() != p.tensors.size())
    throw std::runtime_error("checkpoint: tensor list does not match the architecture");
  size_t off = 12 + hlen;
  for (size_t i = 0; i < p.tensors.size(); ++i) {
    const json& tj = tensors.at(i);
    if (tj.at("name") != p.names[i] || tj.at("rows") != p.tensors[i].rows() ||
        tj.at("cols") != p.tensors[i].cols())
      throw std::runtime_error("checkpoint: tensor shape mismatch at " + p.names[i]);
    if (data.size() < off + p.tensors[i].size() * 4)
      throw std::runtime_error("checkpoint: truncated payload");
    for (size_t k = 0; k < p.tensors[i].size(); ++k, off += 4)
      p.tensors[i].data()[k] = static_cast<double>(std::bit_cast<float>(get_u32(data, off)));
  }
  if (off != data.size()) throw std::runtime_error("checkpoint: trailing bytes");
  return p;
}

void round_params_fp32(PolicyParams& params) {
  for (Mat& t : params.tensors)
    for (size_t k = 0; k < t.size(); ++k)
      t.data()[k] = static_cast<double>(static_cast<float>(t.data()[k]));
}

}  // namespace droneroute
