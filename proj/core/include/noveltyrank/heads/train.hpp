#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/losses.hpp"
#include "noveltyrank/heads/mlp.hpp"
#include "noveltyrank/heads/optim.hpp"
#include "noveltyrank/pairgen.hpp"
#include "noveltyrank/rng.hpp"

namespace noveltyrank::heads {

struct LabeledExample {
  const fusion::FeatureVector* features;
  int label;
};

/// Both members are scored by the same head (shared weights).
struct PairExample {
  const fusion::FeatureVector* a;
  const fusion::FeatureVector* b;
  pairgen::Slot gold;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::uint64_t optimizer_steps = 0;
};

inline constexpr std::uint64_t kInitSalt = 3;

/// Glorot-initialized heads; weights derive from `seed` alone.
inline MlpHead init_classifier(std::size_t input_dim, std::uint64_t seed) {
  return MlpHead::glorot(classifier_layers(input_dim), kClassifierDropout, Rng::derive_seed(seed, kInitSalt));
}
inline MlpHead init_ranker(std::size_t input_dim, std::uint64_t seed) {
  return MlpHead::glorot(ranker_layers(input_dim), kRankerDropout, Rng::derive_seed(seed, kInitSalt));
}

/// Optimizer steps for `n` examples: epochs * ceil(ceil(n / batch) / grad_accumulation).
std::uint64_t planned_optimizer_steps(std::size_t n, const TrainConfig& cfg);

/// Cross-entropy training of a 2-logit head. Shuffling and dropout draw
/// from streams derived from cfg.seed, so equal seeds give bit-identical
/// weights. Throws ValidationError on an empty dataset and
/// RecipeMismatchError when a feature vector was built with another recipe.
TrainHistory train_classifier(MlpHead& head, std::span<const LabeledExample> data, const TrainConfig& cfg,
                              const fusion::FusionRecipe& recipe, OptimizerState<float>& state);

/// RankNet training of a 1-output scoring head over comparison pairs.
TrainHistory train_ranker(MlpHead& head, std::span<const PairExample> data, const TrainConfig& cfg,
                          const fusion::FusionRecipe& recipe, OptimizerState<float>& state);

struct ClassPrediction {
  int label;
  std::array<double, 2> probabilities;
};

/// Argmax label and softmax probabilities; requires infer mode.
ClassPrediction predict_class(const MlpHead& head, std::span<const float> features);

/// Scalar novelty score; requires infer mode.
float predict_score(const MlpHead& head, std::span<const float> features);

}  // namespace noveltyrank::heads
