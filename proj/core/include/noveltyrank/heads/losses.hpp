#pragma once

#include <array>
#include <span>

#include "noveltyrank/pairgen.hpp"

namespace noveltyrank::heads {

double sigmoid(double x);
/// log(1 + e^x) without overflow.
double softplus(double x);

struct ClassificationLoss {
  double loss;
  std::array<double, 2> grad_logits;
};

/// -log softmax(logits)[label], max-subtracted; grad = softmax - onehot.
ClassificationLoss classification_loss(std::span<const double, 2> logits, int label);

struct RankNetLoss {
  double loss;
  double grad_sa;
  double grad_sb;
};

/// Binary cross-entropy on sigma(s_a - s_b) with target 1 when gold is A.
RankNetLoss ranknet_loss(double s_a, double s_b, pairgen::Slot gold);

std::array<double, 2> softmax2(std::span<const double, 2> logits);

}  // namespace noveltyrank::heads
