#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "noveltyrank/error.hpp"
#include "noveltyrank/heads/mlp.hpp"

namespace noveltyrank::heads {

/// Training hyperparameters. The factory defaults are the published
/// settings for the classification and pairwise-ranking heads.
struct TrainConfig {
  double learning_rate = 2e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 5;
  double weight_decay = 0.01;
  double warmup_ratio = 0.1;
  std::size_t grad_accumulation = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 42;

  static TrainConfig classification_defaults();
  static TrainConfig ranking_defaults();

  /// Throws ValidationError on out-of-range values.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

/// Learning-rate multiplier: linear 0->1 over round(warmup_ratio*total)
/// steps, then linear 1->0 at `total_steps`.
double lr_at(const TrainConfig& cfg, std::uint64_t step, std::uint64_t total_steps);

/// AdamW first/second moments, one flat tensor per parameter tensor.
template <typename T>
struct OptimizerState {
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::uint64_t step = 0;

  bool empty() const { return first_moment.empty(); }

  static OptimizerState for_head(const BasicMlp<T>& head) {
    OptimizerState s;
    head.for_each_tensor([&](std::span<const T> t) {
      s.first_moment.emplace_back(t.size(), T(0));
      s.second_moment.emplace_back(t.size(), T(0));
    });
    return s;
  }
};

/// One decoupled-weight-decay Adam update of a flat tensor; `step` is the
/// 1-based step number used for bias correction.
template <typename T>
void adamw_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t step,
                  const TrainConfig& cfg, double lr_multiplier) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ValidationError("AdamW tensor shape mismatch");
  }
  const double lr = cfg.learning_rate * lr_multiplier;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
    const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    double theta = static_cast<double>(params[i]);
    theta -= lr * cfg.weight_decay * theta;
    theta -= lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.adam_epsilon);
    params[i] = static_cast<T>(theta);
  }
}

/// Applies one AdamW step to every parameter tensor of `head`; increments
/// `state.step` exactly once.
template <typename T>
void adamw_step(BasicMlp<T>& head, const HeadGradients<T>& grads, OptimizerState<T>& state, const TrainConfig& cfg,
                double lr_multiplier) {
  if (!(lr_multiplier >= 0.0 && lr_multiplier <= 1.0)) throw ValidationError("lr multiplier must be in [0, 1]");
  if (state.empty()) state = OptimizerState<T>::for_head(head);
  if (grads.size() != head.layers().size() || state.first_moment.size() != 2 * head.layers().size()) {
    throw ValidationError("gradient/optimizer state does not match head layout");
  }
  ++state.step;
  for (std::size_t l = 0; l < head.layers().size(); ++l) {
    auto& layer = head.layers()[l];
    const auto& g = grads[l];
    if (g.weights.rows() != layer.weights.rows() || g.weights.cols() != layer.weights.cols() ||
        g.bias.size() != layer.bias.size()) {
      throw ValidationError("gradient shape mismatch at layer " + std::to_string(l));
    }
    adamw_update<T>({layer.weights.data(), static_cast<std::size_t>(layer.weights.size())},
                    {g.weights.data(), static_cast<std::size_t>(g.weights.size())}, state.first_moment[2 * l],
                    state.second_moment[2 * l], state.step, cfg, lr_multiplier);
    adamw_update<T>({layer.bias.data(), static_cast<std::size_t>(layer.bias.size())},
                    {g.bias.data(), static_cast<std::size_t>(g.bias.size())}, state.first_moment[2 * l + 1],
                    state.second_moment[2 * l + 1], state.step, cfg, lr_multiplier);
  }
}

}  // namespace noveltyrank::heads
