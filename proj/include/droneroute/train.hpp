#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "droneroute/config.hpp"
#include "droneroute/instgen.hpp"
#include "droneroute/policy.hpp"
#include "droneroute/solvers.hpp"

namespace droneroute {

enum class NormVariant { EmaZscore, BatchZscore, EmaMeanDiv, None };

NormVariant parse_norm_variant(const std::string& name);
std::string norm_variant_name(NormVariant v);

// Fleet parameter combination: batches are homogeneous in (K, p_max, Q).
struct PcCombo {
  int K = 1;
  double p_max = 1.0;
  double Q = 1.0;
};

struct PcStats {
  double mean = 0.0;
  double var = 0.0;
  bool init = false;
};

// Exponentially smoothed reward statistics, one slot per parameter
// combination. The first batch of a combination seeds its statistics
// verbatim; later batches blend with factor gamma.
struct RewardStats {
  double gamma = 0.25;
  double eps = 1e-8;
  std::vector<PcStats> per_pc;

  PcStats& slot(int pc);
};

std::vector<double> normalize_rewards(const std::vector<double>& rewards, int pc,
                                      RewardStats& stats, NormVariant variant);

struct TrainSetup {
  Config config;
  GenSpec gen;
  std::vector<PcCombo> combos;
  NormVariant variant = NormVariant::EmaZscore;
  int eval_instances = 8;

  void validate() const;
};

TrainSetup parse_train_setup(const std::string& json_text);
std::string train_setup_json(const TrainSetup& setup);

struct StepMetrics {
  double raw_mean = 0.0;
  double norm_mean = 0.0;
  double baseline = 0.0;
  double adv_abs_sum = 0.0;  // sum over instances of |sum of advantages|
  long trajectories = 0;
  double seconds = 0.0;
};

// One training step: per instance, sampled multi-start rollouts with the
// instance's mean normalized reward as shared baseline; fills `grads` with
// the descent gradient of -(1/|Pi|) sum (R - b) log p.
StepMetrics pomo_step(const std::vector<ProblemInstance>& batch, const PolicyParams& params,
                      int pc, RewardStats& stats, NormVariant variant, int max_starts,
                      uint64_t step_seed, ParamGrads& grads);

// Adam with decoupled-from-nothing classic L2 coupling: g += wd * theta.
struct Adam {
  long t = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;

  explicit Adam(const PolicyParams& params);
  void update(PolicyParams& params, const ParamGrads& grads, double lr);
};

struct EpochEval {
  int epoch = 0;
  double mean_value = 0.0;
};

struct TrainResult {
  std::vector<EpochEval> evals;
  std::string final_checkpoint;
  double max_adv_abs_sum = 0.0;  // worst per-instance advantage-sum drift seen
};

// Runs the full loop: per step pick the combination cyclically, generate a
// fresh batch, pomo_step, Adam update; per epoch round parameters to float32,
// checkpoint (plus optimizer-state sidecar) and record a held-out greedy
// evaluation. Resume restarts after the checkpointed epoch and reproduces the
// non-resumed run bit for bit.
TrainResult train_loop(const TrainSetup& setup, const std::string& out_dir,
                       const std::string& resume_checkpoint = "");

struct EvalResult {
  std::vector<Solution> solutions;
  double mean_value = 0.0;
  double mean_seconds = 0.0;
};

// Greedy multi-start inference; with augment, the best feasible solution
// across the eight coordinate variants (evaluated on the original instance).
EvalResult evaluate(const PolicyParams& params, const std::vector<ProblemInstance>& instances,
                    bool augment, int max_starts);

}  // namespace droneroute
