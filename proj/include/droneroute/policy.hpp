#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droneroute/config.hpp"
#include "droneroute/env.hpp"
#include "droneroute/instance.hpp"
#include "droneroute/linalg.hpp"
#include "droneroute/rng.hpp"

namespace droneroute {

// Attention encoder-decoder parameters as an ordered named-tensor registry.
// Order is the serialization, initialization and gradient-accumulation order.
struct PolicyParams {
  Config cfg;
  std::vector<std::string> names;
  std::vector<Mat> tensors;

  int find(const std::string& name) const;
  Mat& tensor(const std::string& name);
  const Mat& tensor(const std::string& name) const;
  size_t param_count() const;
};

PolicyParams init_params(const Config& cfg, uint64_t seed);

// Gradient buffer aligned with PolicyParams.tensors.
struct ParamGrads {
  std::vector<Mat> g;

  explicit ParamGrads(const PolicyParams& params);
  void zero();
  void scale_all(double s);
};

// Encoder outputs after each stage: index 0 = post-projection inputs,
// index l = final embeddings. Every matrix is (node_count+1) x embed_dim with
// the depot parameter row first and network node i at row i+1.
std::vector<Mat> encode_layers(const PolicyParams& params, const ProblemInstance& inst);
Mat encode(const PolicyParams& params, const ProblemInstance& inst);

// Per-instance decoding state: final embeddings plus attention keys/values
// precomputed over the action rows (rows 1..n).
struct DecoderCache {
  Mat h;
  Mat keys_g;
  Mat vals_g;
  Mat keys_s;
};

DecoderCache make_decoder_cache(const PolicyParams& params, Mat h);

struct ActionDistribution {
  std::vector<double> probs;     // exactly 0 on masked entries
  std::vector<double> logprobs;  // -inf on masked entries
  std::vector<uint8_t> mask;     // the source mask (1 = selectable)
};

ActionDistribution decode_step(const PolicyParams& params, const DecoderCache& cache,
                               const EnvState& state, const ActionMask& mask);

struct Trajectory {
  int start = -1;  // forced first node, -1 for a free episode
  std::vector<int> actions;
  std::vector<std::vector<int>> routes;
  double reward = 0.0;   // total value collected
  double logprob = 0.0;  // sum over steps with more than one feasible action
};

enum class DecodeMode { Greedy, Sample };

// One episode per entry of `starts` (-1 entries roll out unforced). Episodes
// run in lockstep so every decoder step is one batched pass; the rng is
// consumed in active-episode order, which makes sampling reproducible.
std::vector<Trajectory> rollout(const PolicyParams& params, const ProblemInstance& inst,
                                DecodeMode mode, const std::vector<int>& starts, Rng& rng);

// Recomputes sum_e weights[e] * logprob(trajectory e) by replaying the forced
// actions through the environment and the network.
double replay_logprob(const PolicyParams& params, const ProblemInstance& inst,
                      const std::vector<Trajectory>& trajectories,
                      const std::vector<double>& weights);

// Same value, plus its exact reverse-mode gradient added into `grads`.
double replay_logprob_gradient(const PolicyParams& params, const ProblemInstance& inst,
                               const std::vector<Trajectory>& trajectories,
                               const std::vector<double>& weights, ParamGrads& grads);

double logprob_gradient(const PolicyParams& params, const ProblemInstance& inst,
                        const Trajectory& trajectory, ParamGrads& grads);

// Binary checkpoint: "DRCK", u32 version, u32 header length, JSON header
// (config + ordered tensor shapes), then float32 little-endian payloads.
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

// Truncates every parameter to float32 precision in place.
void round_params_fp32(PolicyParams& params);

}  // namespace droneroute
