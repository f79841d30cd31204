#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/date.hpp"
#include "noveltyrank/embeddings.hpp"

namespace noveltyrank::synth {

/// Separable synthetic corpus. Each domain has its own center in both
/// channels; the classification vector is pushed +separation (label 1) or
/// -separation (label 0) along one shared unit direction.
struct SynthConfig {
  std::size_t papers = 600;
  std::size_t dim = 64;
  double positive_rate = 0.25;
  double other_rate = 0.05;
  Date start{2024, 1, 1};
  Date end{2025, 6, 30};
  double separation = 3.0;
  double noise = 1.0;
  /// Fraction of proximity vectors that are power-of-two rescalings of an
  /// earlier paper's vector, producing exact cosine ties.
  double duplicate_rate = 0.0;
  std::uint64_t seed = 2025;
};

struct SynthBundle {
  corpus::Corpus corpus;
  embeddings::EmbeddingStore classification;
  embeddings::EmbeddingStore proximity;
};

SynthBundle generate(const SynthConfig& config);

/// `<dir>/corpus.jsonl` plus `<dir>/embeddings/{classification,proximity}.*`.
void write_bundle(const SynthBundle& bundle, const std::string& dir);

}  // namespace noveltyrank::synth
