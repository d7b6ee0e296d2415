#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace droneroute {

// Model and optimizer settings shared by the policy, training and CLI layers.
struct Config {
  int embed_dim = 128;
  int layers = 6;
  int heads = 8;
  int ffn_dim = 512;
  double logit_clip = 10.0;

  double lr = 1e-4;
  double weight_decay = 1e-6;
  int lr_decay_epoch = 190;   // 1-based epoch at which lr is scaled once
  double lr_decay_factor = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  int epochs = 200;
  int steps_per_epoch = 156;
  int batch_size = 64;
  int max_starts = 24;  // cap on multi-start rollouts per instance

  double reward_gamma = 0.25;  // EMA factor for running reward statistics
  double reward_eps = 1e-8;

  uint64_t seed = 0;

  void validate() const;
};

nlohmann::json config_to_json(const Config& cfg);
Config config_from_json(const nlohmann::json& j);

}  // namespace droneroute
