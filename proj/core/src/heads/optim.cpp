#include "noveltyrank/heads/optim.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace noveltyrank::heads {

TrainConfig TrainConfig::classification_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::ranking_defaults() {
  TrainConfig cfg;
  cfg.learning_rate = 1e-5;
  cfg.batch_size = 64;
  cfg.epochs = 5;
  cfg.weight_decay = 0.1;
  cfg.warmup_ratio = 0.1;
  cfg.grad_accumulation = 2;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  if (epochs == 0) throw ValidationError("epochs must be positive");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be non-negative");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw ValidationError("warmup ratio must be in [0, 1)");
  if (grad_accumulation == 0) throw ValidationError("gradient accumulation must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("Adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("Adam epsilon must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
       {"epochs", c.epochs},               {"weight_decay", c.weight_decay},
       {"warmup_ratio", c.warmup_ratio},   {"grad_accumulation", c.grad_accumulation},
       {"adam_beta1", c.adam_beta1},       {"adam_beta2", c.adam_beta2},
       {"adam_epsilon", c.adam_epsilon},   {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("batch_size").get_to(c.batch_size);
  j.at("epochs").get_to(c.epochs);
  j.at("weight_decay").get_to(c.weight_decay);
  j.at("warmup_ratio").get_to(c.warmup_ratio);
  j.at("grad_accumulation").get_to(c.grad_accumulation);
  j.at("adam_beta1").get_to(c.adam_beta1);
  j.at("adam_beta2").get_to(c.adam_beta2);
  j.at("adam_epsilon").get_to(c.adam_epsilon);
  j.at("seed").get_to(c.seed);
}

double lr_at(const TrainConfig& cfg, std::uint64_t step, std::uint64_t total_steps) {
  if (total_steps == 0) throw ValidationError("lr schedule needs total_steps > 0");
  if (step > total_steps) throw ValidationError("lr schedule step beyond total_steps");
  const auto warmup = static_cast<std::uint64_t>(std::llround(cfg.warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup) return static_cast<double>(step) / static_cast<double>(warmup);
  if (total_steps == warmup) return 0.0;
  return static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

}  // namespace noveltyrank::heads
