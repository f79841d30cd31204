#include <benchmark/benchmark.h>

#include <vector>

#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/train.hpp"
#include "noveltyrank/rng.hpp"

using namespace noveltyrank;

namespace {

const fusion::FusionRecipe& recipe() {
  static const auto r = fusion::FusionRecipe::default_recipe();
  return r;
}

std::vector<fusion::FeatureVector> features(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<fusion::FeatureVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].paper_id = "p" + std::to_string(i);
    out[i].recipe_hash = recipe().hash();
    out[i].values.resize(recipe().expected_dim());
    for (float& v : out[i].values) v = static_cast<float>(rng.normal());
  }
  return out;
}

void BM_ClassifierForward(benchmark::State& state) {
  auto head = heads::init_classifier(recipe().expected_dim(), 1);
  head.set_mode(heads::HeadMode::infer);
  const auto x = features(1, 2).front();
  for (auto _ : state) benchmark::DoNotOptimize(heads::predict_class(head, x.values));
}
BENCHMARK(BM_ClassifierForward)->Unit(benchmark::kMicrosecond);

void BM_RankerForward(benchmark::State& state) {
  auto head = heads::init_ranker(recipe().expected_dim(), 1);
  head.set_mode(heads::HeadMode::infer);
  const auto x = features(1, 3).front();
  for (auto _ : state) benchmark::DoNotOptimize(heads::predict_score(head, x.values));
}
BENCHMARK(BM_RankerForward)->Unit(benchmark::kMicrosecond);

void BM_RankerEpoch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pos = features(n, 4), neg = features(n, 5);
  std::vector<heads::PairExample> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({&pos[i], &neg[i], i % 2 ? pairgen::Slot::A : pairgen::Slot::B});
  }
  auto cfg = heads::TrainConfig::ranking_defaults();
  cfg.epochs = 1;
  for (auto _ : state) {
    auto head = heads::init_ranker(recipe().expected_dim(), 6);
    heads::OptimizerState<float> opt;
    benchmark::DoNotOptimize(heads::train_ranker(head, pairs, cfg, recipe(), opt).optimizer_steps);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankerEpoch)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
