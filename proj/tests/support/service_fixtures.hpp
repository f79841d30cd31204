#pragma once

#include <map>
#include <memory>
#include <string>

#include "fixtures.hpp"
#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/checkpoint.hpp"
#include "noveltyrank/heads/train.hpp"
#include "noveltyrank/pairgen.hpp"
#include "noveltyrank/service.hpp"
#include "noveltyrank/synth.hpp"

namespace testsupport {

/// Small synthetic world with one trained ranking head and one classifier.
struct ServiceWorld {
  noveltyrank::synth::SynthBundle bundle;
  noveltyrank::fusion::FusionRecipe recipe;
  noveltyrank::heads::Checkpoint rank;
  noveltyrank::heads::Checkpoint classify;
};

inline ServiceWorld make_service_world(std::size_t papers = 160, std::uint64_t seed = 31) {
  using namespace noveltyrank;
  synth::SynthConfig cfg;
  cfg.papers = papers;
  cfg.dim = 8;
  cfg.seed = seed;
  auto bundle = synth::generate(cfg);
  const auto recipe = fusion::FusionRecipe::default_recipe(8);
  const auto index = simindex::PriorIndex::build(bundle.corpus, bundle.proximity);
  std::map<std::string, simindex::SimilarityFeatures> sims;
  for (const auto& id : bundle.corpus.ordering()) {
    sims.emplace(id, simindex::similarity_features(index.query(id), bundle.proximity));
  }
  const auto features =
      fusion::batch_assemble(bundle.corpus, {&bundle.classification, &bundle.proximity, nullptr}, sims, recipe);
  const auto dim = recipe.expected_dim();

  auto rank_cfg = heads::TrainConfig::ranking_defaults();
  rank_cfg.learning_rate = 1e-3;
  rank_cfg.epochs = 2;
  rank_cfg.seed = seed;
  std::vector<heads::PairExample> pairs;
  const auto set = pairgen::sample_training_pairs(bundle.corpus, 5, seed);
  for (const auto& p : set.pairs) pairs.push_back({&features.at(p.a_id), &features.at(p.b_id), p.gold});
  heads::Checkpoint rank{heads::Task::rank, heads::init_ranker(dim, seed), recipe, seed, rank_cfg,
                         heads::OptimizerState<float>{}};
  heads::train_ranker(rank.head, pairs, rank_cfg, recipe, *rank.optimizer);

  auto cls_cfg = heads::TrainConfig::classification_defaults();
  cls_cfg.learning_rate = 1e-2;
  cls_cfg.epochs = 1;
  cls_cfg.seed = seed;
  std::vector<heads::LabeledExample> labeled;
  for (const auto& [id, fv] : features) labeled.push_back({&fv, bundle.corpus.at(id).label});
  heads::Checkpoint classify{heads::Task::classify, heads::init_classifier(dim, seed), recipe, seed, cls_cfg, std::nullopt};
  heads::OptimizerState<float> state;
  heads::train_classifier(classify.head, labeled, cls_cfg, recipe, state);
  return {std::move(bundle), recipe, std::move(rank), std::move(classify)};
}

inline std::shared_ptr<const noveltyrank::service::ModelSnapshot> snapshot_of(const ServiceWorld& w, bool with_rank = true,
                                                                               bool with_classify = true,
                                                                               std::string version = "test-v1") {
  noveltyrank::service::SnapshotParts parts{w.bundle.corpus, w.bundle.classification, w.bundle.proximity,
                                            std::nullopt,     std::nullopt,            std::move(version)};
  if (with_rank) parts.rank_head = w.rank;
  if (with_classify) parts.classify_head = w.classify;
  return noveltyrank::service::make_snapshot(std::move(parts));
}

}  // namespace testsupport
