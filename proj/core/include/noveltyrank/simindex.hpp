#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/date.hpp"
#include "noveltyrank/embeddings.hpp"

namespace noveltyrank::simindex {

inline constexpr std::size_t kDefaultTopK = 10;

struct Neighbor {
  std::string id;
  double cosine = 0.0;
  bool operator==(const Neighbor&) const = default;
};

/// Sorted by cosine descending, ties by id ascending. Every neighbor was
/// published strictly before the query.
struct NeighborList {
  std::string query_id;
  std::vector<Neighbor> entries;
  std::size_t k_requested = 0;
  bool operator==(const NeighborList&) const = default;
};

/// Exact cosine search restricted to strictly-earlier publication dates.
///
/// Raw vectors are copied in (published, id) order together with their
/// inverse L2 norms; cosines are accumulated in double. The index is
/// immutable after build and safe for concurrent queries.
class PriorIndex {
 public:
  static PriorIndex build(const corpus::Corpus& corpus, const embeddings::EmbeddingStore& store);

  NeighborList query(std::string_view query_id, std::size_t k = kDefaultTopK) const;

  /// Same search for a vector that may not be in the index (e.g. a request
  /// payload). `query_id` only labels the result.
  NeighborList query_vector(std::span<const float> vector, Date published, std::size_t k,
                            std::string query_id = {}) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool contains(std::string_view id) const { return position_.contains(std::string(id)); }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<int> dates_;
  std::vector<float> vectors_;
  std::vector<double> inv_norms_;
  std::unordered_map<std::string, std::size_t> position_;
};

/// avg_sim <= max_sim; empty neighbor lists yield zeros and a zero aggregate.
struct SimilarityFeatures {
  double max_sim = 0.0;
  double avg_sim = 0.0;
  std::vector<std::string> neighbor_ids;
  std::vector<double> neighbor_cosines;
  std::vector<double> aggregated_embedding;
  std::size_t neighbor_count() const { return neighbor_ids.size(); }
};

/// `store` supplies the vectors averaged into the aggregate (proximity by default).
SimilarityFeatures similarity_features(const NeighborList& neighbors, const embeddings::EmbeddingStore& store);

/// Deterministic textual summary of a paper's prior neighbors.
std::string render_similarity_report(const corpus::PaperRecord& paper, const NeighborList& neighbors,
                                     const corpus::Corpus& corpus);

}  // namespace noveltyrank::simindex
