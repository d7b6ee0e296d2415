#include "droneroute/config.hpp"

#include <stdexcept>

namespace droneroute {

void Config::validate() const {
  auto reject = [](const char* msg) { throw std::invalid_argument(std::string("config: ") + msg); };
  if (embed_dim < 1) reject("embed_dim must be positive");
  if (layers < 1) reject("layers must be positive");
  if (heads < 1 || embed_dim % heads != 0) reject("heads must divide embed_dim");
  if (ffn_dim < 1) reject("ffn_dim must be positive");
  if (!(logit_clip > 0.0)) reject("logit_clip must be positive");
  if (!(lr > 0.0)) reject("lr must be positive");
  if (weight_decay < 0.0) reject("weight_decay must be non-negative");
  if (lr_decay_epoch < 1) reject("lr_decay_epoch must be positive");
  if (!(lr_decay_factor > 0.0)) reject("lr_decay_factor must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) reject("adam_beta1 out of [0,1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) reject("adam_beta2 out of [0,1)");
  if (!(adam_eps > 0.0)) reject("adam_eps must be positive");
  if (epochs < 1) reject("epochs must be positive");
  if (steps_per_epoch < 1) reject("steps_per_epoch must be positive");
  if (batch_size < 1) reject("batch_size must be positive");
  if (max_starts < 1) reject("max_starts must be positive");
  if (!(reward_gamma > 0.0 && reward_gamma <= 1.0)) reject("reward_gamma out of (0,1]");
  if (!(reward_eps > 0.0)) reject("reward_eps must be positive");
}

nlohmann::json config_to_json(const Config& cfg) {
  return {{"embed_dim", cfg.embed_dim},
          {"layers", cfg.layers},
          {"heads", cfg.heads},
          {"ffn_dim", cfg.ffn_dim},
          {"logit_clip", cfg.logit_clip},
          {"lr", cfg.lr},
          {"weight_decay", cfg.weight_decay},
          {"lr_decay_epoch", cfg.lr_decay_epoch},
          {"lr_decay_factor", cfg.lr_decay_factor},
          {"adam_beta1", cfg.adam_beta1},
          {"adam_beta2", cfg.adam_beta2},
          {"adam_eps", cfg.adam_eps},
          {"epochs", cfg.epochs},
          {"steps_per_epoch", cfg.steps_per_epoch},
          {"batch_size", cfg.batch_size},
          {"max_starts", cfg.max_starts},
          {"reward_gamma", cfg.reward_gamma},
          {"reward_eps", cfg.reward_eps},
          {"seed", cfg.seed}};
}

Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
  cfg.layers = j.value("layers", cfg.layers);
  cfg.heads = j.value("heads", cfg.heads);
  cfg.ffn_dim = j.value("ffn_dim", cfg.ffn_dim);
  cfg.logit_clip = j.value("logit_clip", cfg.logit_clip);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  cfg.lr_decay_epoch = j.value("lr_decay_epoch", cfg.lr_decay_epoch);
  cfg.lr_decay_factor = j.value("lr_decay_factor", cfg.lr_decay_factor);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.steps_per_epoch = j.value("steps_per_epoch", cfg.steps_per_epoch);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.max_starts = j.value("max_starts", cfg.max_starts);
  cfg.reward_gamma = j.value("reward_gamma", cfg.reward_gamma);
  cfg.reward_eps = j.value("reward_eps", cfg.reward_eps);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace droneroute
