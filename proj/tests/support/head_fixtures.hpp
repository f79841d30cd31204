#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/losses.hpp"
#include "noveltyrank/heads/mlp.hpp"
#include "noveltyrank/heads/train.hpp"
#include "noveltyrank/rng.hpp"

namespace testsupport {

using noveltyrank::Rng;
using noveltyrank::heads::BasicMlp;
using noveltyrank::heads::HeadGradients;
using noveltyrank::heads::Vector;

enum class GradTask { classify, rank };

/// Random head no larger than [8,6,4,2] (or [8,6,4,1] for rank), weights
/// and biases drawn in [-1, 1].
inline BasicMlp<double> random_small_head(Rng& rng, GradTask task) {
  std::vector<std::size_t> sizes;
  const std::size_t depth = 2 + rng.below(3);
  const std::size_t caps[] = {8, 6, 4};
  for (std::size_t l = 0; l + 1 < depth; ++l) sizes.push_back(1 + rng.below(caps[l]));
  sizes.push_back(task == GradTask::classify ? 2 : 1);
  BasicMlp<double> head(sizes, 0.0);
  head.for_each_tensor([&](std::span<double> t) {
    for (double& v : t) v = 2.0 * rng.uniform() - 1.0;
  });
  return head;
}

inline std::vector<double> random_input(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
  return x;
}

struct GradProblem {
  GradTask task;
  std::vector<double> xa;
  std::vector<double> xb;
  int label = 0;
  noveltyrank::pairgen::Slot gold = noveltyrank::pairgen::Slot::A;
};

inline double problem_loss(const BasicMlp<double>& head, const GradProblem& p) {
  if (p.task == GradTask::classify) {
    const auto out = head.forward(p.xa).output;
    return noveltyrank::heads::classification_loss(std::span<const double, 2>(out.data(), 2), p.label).loss;
  }
  const double sa = head.forward(p.xa).output[0];
  const double sb = head.forward(p.xb).output[0];
  return noveltyrank::heads::ranknet_loss(sa, sb, p.gold).loss;
}

inline HeadGradients<double> problem_gradients(const BasicMlp<double>& head, const GradProblem& p) {
  auto grads = head.zero_gradients();
  if (p.task == GradTask::classify) {
    const auto cache = head.forward(p.xa);
    const auto l = noveltyrank::heads::classification_loss(std::span<const double, 2>(cache.output.data(), 2), p.label);
    Vector<double> g(2);
    g << l.grad_logits[0], l.grad_logits[1];
    head.backward(cache, g, grads);
    return grads;
  }
  const auto ca = head.forward(p.xa);
  const auto cb = head.forward(p.xb);
  const auto l = noveltyrank::heads::ranknet_loss(ca.output[0], cb.output[0], p.gold);
  Vector<double> ga(1), gb(1);
  ga << l.grad_sa;
  gb << l.grad_sb;
  head.backward(ca, ga, grads);
  head.backward(cb, gb, grads);
  return grads;
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter. Pairs where both magnitudes are below
/// `floor` are compared on an absolute scale.
inline double max_gradient_error(BasicMlp<double> head, const GradProblem& p, double h = 1e-5, double floor = 1e-5) {
  const auto grads = problem_gradients(head, p);
  std::vector<double> analytic;
  for (const auto& g : grads) {
    analytic.insert(analytic.end(), g.weights.data(), g.weights.data() + g.weights.size());
    analytic.insert(analytic.end(), g.bias.data(), g.bias.data() + g.bias.size());
  }
  std::vector<double*> params;
  head.for_each_tensor([&](std::span<double> t) {
    for (double& v : t) params.push_back(&v);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = problem_loss(head, p);
    *params[i] = saved - h;
    const double down = problem_loss(head, p);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

/// Draws a head and an input whose ReLU pre-activations all sit at least
/// `margin` away from zero, so central differences never straddle a kink.
inline std::pair<BasicMlp<double>, GradProblem> random_grad_case(Rng& rng, GradTask task, double margin = 1e-3) {
  for (;;) {
    auto head = random_small_head(rng, task);
    GradProblem p{task, random_input(rng, head.input_size()), random_input(rng, head.input_size())};
    p.label = rng.coin() ? 1 : 0;
    p.gold = rng.coin() ? noveltyrank::pairgen::Slot::A : noveltyrank::pairgen::Slot::B;
    bool ok = true;
    for (const auto* x : {&p.xa, &p.xb}) {
      for (const auto& pre : head.forward(*x).hidden_pre) {
        if (pre.cwiseAbs().minCoeff() < margin) ok = false;
      }
    }
    if (ok) return {std::move(head), std::move(p)};
  }
}

struct ClassifyFixture {
  noveltyrank::fusion::FusionRecipe recipe{{{noveltyrank::fusion::FeaturePart::classification_embedding, 2}}};
  std::vector<noveltyrank::fusion::FeatureVector> features;
  std::vector<int> labels;

  std::vector<noveltyrank::heads::LabeledExample> examples() const {
    std::vector<noveltyrank::heads::LabeledExample> out;
    for (std::size_t i = 0; i < features.size(); ++i) out.push_back({&features[i], labels[i]});
    return out;
  }
};

/// 200 points in [-1,1]^2 labeled by x0 + x1 > 0, with a 0.2 margin band left empty.
inline ClassifyFixture separable_classify(std::uint64_t seed, std::size_t n = 200) {
  ClassifyFixture f;
  Rng rng(seed);
  while (f.features.size() < n) {
    const float x0 = static_cast<float>(2.0 * rng.uniform() - 1.0);
    const float x1 = static_cast<float>(2.0 * rng.uniform() - 1.0);
    if (std::abs(x0 + x1) < 0.2f) continue;
    f.features.push_back({"c" + std::to_string(f.features.size()), {x0, x1}, f.recipe.hash()});
    f.labels.push_back(x0 + x1 > 0 ? 1 : 0);
  }
  return f;
}

inline noveltyrank::heads::TrainConfig learn_classify_config() {
  auto cfg = noveltyrank::heads::TrainConfig::classification_defaults();
  cfg.learning_rate = 1e-2;
  return cfg;
}

struct RankFixture {
  static constexpr std::size_t kDim = 4;
  noveltyrank::fusion::FusionRecipe recipe{{{noveltyrank::fusion::FeaturePart::classification_embedding, kDim}}};
  std::vector<noveltyrank::fusion::FeatureVector> train_pos, train_neg, test_pos, test_neg;
  std::vector<noveltyrank::pairgen::Slot> train_gold;

  std::vector<noveltyrank::heads::PairExample> train_pairs() const {
    std::vector<noveltyrank::heads::PairExample> out;
    for (std::size_t i = 0; i < train_pos.size(); ++i) {
      if (train_gold[i] == noveltyrank::pairgen::Slot::A) {
        out.push_back({&train_pos[i], &train_neg[i], noveltyrank::pairgen::Slot::A});
      } else {
        out.push_back({&train_neg[i], &train_pos[i], noveltyrank::pairgen::Slot::B});
      }
    }
    return out;
  }
};

/// Pairs whose positive member has a strictly larger first coordinate than
/// its negative; remaining coordinates are noise.
inline RankFixture monotone_rank(std::uint64_t seed, std::size_t train = 600, std::size_t test = 300) {
  RankFixture f;
  Rng rng(seed);
  auto make = [&](bool positive, const std::string& id) {
    std::vector<float> v(RankFixture::kDim);
    for (float& x : v) x = static_cast<float>(2.0 * rng.uniform() - 1.0);
    v[0] = static_cast<float>(positive ? 0.1 + 0.9 * rng.uniform() : -0.1 - 0.9 * rng.uniform());
    return noveltyrank::fusion::FeatureVector{id, v, f.recipe.hash()};
  };
  for (std::size_t i = 0; i < train; ++i) {
    f.train_pos.push_back(make(true, "tp" + std::to_string(i)));
    f.train_neg.push_back(make(false, "tn" + std::to_string(i)));
    f.train_gold.push_back(rng.coin() ? noveltyrank::pairgen::Slot::A : noveltyrank::pairgen::Slot::B);
  }
  for (std::size_t i = 0; i < test; ++i) {
    f.test_pos.push_back(make(true, "hp" + std::to_string(i)));
    f.test_neg.push_back(make(false, "hn" + std::to_string(i)));
  }
  return f;
}

inline noveltyrank::heads::TrainConfig learn_rank_config() {
  auto cfg = noveltyrank::heads::TrainConfig::ranking_defaults();
  cfg.learning_rate = 1e-3;
  return cfg;
}

inline double train_accuracy(const noveltyrank::heads::MlpHead& head, const ClassifyFixture& f) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < f.features.size(); ++i) {
    ok += noveltyrank::heads::predict_class(head, f.features[i].values).label == f.labels[i];
  }
  return static_cast<double>(ok) / static_cast<double>(f.features.size());
}

inline double heldout_agreement(const noveltyrank::heads::MlpHead& head, const RankFixture& f) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < f.test_pos.size(); ++i) {
    ok += noveltyrank::heads::predict_score(head, f.test_pos[i].values) >
          noveltyrank::heads::predict_score(head, f.test_neg[i].values);
  }
  return static_cast<double>(ok) / static_cast<double>(f.test_pos.size());
}

}  // namespace testsupport
