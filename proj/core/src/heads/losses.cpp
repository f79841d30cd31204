#include "noveltyrank/heads/losses.hpp"

#include <algorithm>
#include <cmath>

#include "noveltyrank/error.hpp"

namespace noveltyrank::heads {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

std::array<double, 2> softmax2(std::span<const double, 2> logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

ClassificationLoss classification_loss(std::span<const double, 2> logits, int label) {
  if (label != 0 && label != 1) throw ValidationError("classification label must be 0 or 1");
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1])) throw ValidationError("non-finite logits");
  const double m = std::max(logits[0], logits[1]);
  const double log_z = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  const auto p = softmax2(logits);
  ClassificationLoss out{log_z - logits[static_cast<std::size_t>(label)], {p[0], p[1]}};
  out.grad_logits[static_cast<std::size_t>(label)] -= 1.0;
  return out;
}

RankNetLoss ranknet_loss(double s_a, double s_b, pairgen::Slot gold) {
  if (!std::isfinite(s_a) || !std::isfinite(s_b)) throw ValidationError("non-finite comparison scores");
  const double d = s_a - s_b;
  const bool a_wins = gold == pairgen::Slot::A;
  // -log sigma(d) = softplus(-d); -log(1 - sigma(d)) = softplus(d)
  const double loss = a_wins ? softplus(-d) : softplus(d);
  const double g = sigmoid(d) - (a_wins ? 1.0 : 0.0);
  return {loss, g, -g};
}

}  // namespace noveltyrank::heads
