#include "noveltyrank/heads/train.hpp"

#include <algorithm>
#include <numeric>

#include "noveltyrank/error.hpp"
#include "noveltyrank/rng.hpp"

namespace noveltyrank::heads {

namespace {

constexpr std::uint64_t kShuffleSalt = 1;
constexpr std::uint64_t kDropoutSalt = 2;

std::span<const float> values(const fusion::FeatureVector* fv) { return fv->values; }

// Shared driver: `accumulate(index, scale, grads, rng)` runs forward/backward
// for one example with its gradient contribution pre-multiplied by `scale`
// and returns the example loss.
template <typename Accumulate>
TrainHistory run_training(MlpHead& head, std::size_t n, const TrainConfig& cfg, OptimizerState<float>& state,
                          Accumulate&& accumulate) {
  cfg.validate();
  if (n == 0) throw ValidationError("training dataset is empty");

  const std::size_t micro_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::uint64_t total_steps = planned_optimizer_steps(n, cfg);

  Rng shuffle_rng(Rng::derive_seed(cfg.seed, kShuffleSalt));
  Rng dropout_rng(Rng::derive_seed(cfg.seed, kDropoutSalt));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  if (state.empty()) state = OptimizerState<float>::for_head(head);
  head.set_mode(HeadMode::train);
  TrainHistory history;
  std::uint64_t global_step = 0;
  auto grads = head.zero_gradients();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t group_start = 0; group_start < micro_per_epoch; group_start += cfg.grad_accumulation) {
      const std::size_t group_size = std::min(cfg.grad_accumulation, micro_per_epoch - group_start);
      for (std::size_t mb = group_start; mb < group_start + group_size; ++mb) {
        const std::size_t begin = mb * cfg.batch_size;
        const std::size_t end = std::min(n, begin + cfg.batch_size);
        // Mean over the micro-batch, then mean over the accumulation group.
        const double scale = 1.0 / (static_cast<double>(end - begin) * static_cast<double>(group_size));
        for (std::size_t i = begin; i < end; ++i) loss_sum += accumulate(order[i], scale, grads, dropout_rng);
      }
      adamw_step(head, grads, state, cfg, lr_at(cfg, global_step, total_steps));
      ++global_step;
      for (auto& g : grads) {
        g.weights.setZero();
        g.bias.setZero();
      }
    }
    history.epoch_loss.push_back(loss_sum / static_cast<double>(n));
  }
  history.optimizer_steps = global_step;
  head.set_mode(HeadMode::infer);
  return history;
}

void require_infer(const MlpHead& head) {
  if (head.mode() != HeadMode::infer) throw ValidationError("prediction requires a head in infer mode");
}

}  // namespace

std::uint64_t planned_optimizer_steps(std::size_t n, const TrainConfig& cfg) {
  const std::uint64_t micro = (n + cfg.batch_size - 1) / cfg.batch_size;
  return cfg.epochs * ((micro + cfg.grad_accumulation - 1) / cfg.grad_accumulation);
}

TrainHistory train_classifier(MlpHead& head, std::span<const LabeledExample> data, const TrainConfig& cfg,
                              const fusion::FusionRecipe& recipe, OptimizerState<float>& state) {
  if (head.output_size() != 2) throw ValidationError("classifier head must have 2 outputs");
  for (const auto& ex : data) {
    fusion::check_recipe(*ex.features, recipe);
    if (ex.label != 0 && ex.label != 1) throw ValidationError("label must be 0 or 1");
  }
  return run_training(head, data.size(), cfg, state,
                      [&](std::size_t idx, double scale, HeadGradients<float>& grads, Rng& rng) {
                        const LabeledExample& ex = data[idx];
                        const auto cache = head.forward(values(ex.features), &rng);
                        const std::array<double, 2> logits = {cache.output[0], cache.output[1]};
                        const auto l = classification_loss(logits, ex.label);
                        Vector<float> g(2);
                        g << static_cast<float>(l.grad_logits[0] * scale), static_cast<float>(l.grad_logits[1] * scale);
                        head.backward(cache, g, grads);
                        return l.loss;
                      });
}

TrainHistory train_ranker(MlpHead& head, std::span<const PairExample> data, const TrainConfig& cfg,
                          const fusion::FusionRecipe& recipe, OptimizerState<float>& state) {
  if (head.output_size() != 1) throw ValidationError("ranking head must have 1 output");
  for (const auto& ex : data) {
    fusion::check_recipe(*ex.a, recipe);
    fusion::check_recipe(*ex.b, recipe);
  }
  return run_training(head, data.size(), cfg, state,
                      [&](std::size_t idx, double scale, HeadGradients<float>& grads, Rng& rng) {
                        const PairExample& ex = data[idx];
                        const auto cache_a = head.forward(values(ex.a), &rng);
                        const auto cache_b = head.forward(values(ex.b), &rng);
                        const auto l = ranknet_loss(cache_a.output[0], cache_b.output[0], ex.gold);
                        Vector<float> ga(1);
                        Vector<float> gb(1);
                        ga << static_cast<float>(l.grad_sa * scale);
                        gb << static_cast<float>(l.grad_sb * scale);
                        head.backward(cache_a, ga, grads);
                        head.backward(cache_b, gb, grads);
                        return l.loss;
                      });
}

ClassPrediction predict_class(const MlpHead& head, std::span<const float> features) {
  require_infer(head);
  if (head.output_size() != 2) throw ValidationError("classifier head must have 2 outputs");
  const auto out = head.forward(features).output;
  const std::array<double, 2> logits = {out[0], out[1]};
  const auto p = softmax2(logits);
  return {logits[1] > logits[0] ? 1 : 0, p};
}

float predict_score(const MlpHead& head, std::span<const float> features) {
  require_infer(head);
  if (head.output_size() != 1) throw ValidationError("ranking head must have 1 output");
  return head.forward(features).output[0];
}

}  // namespace noveltyrank::heads
