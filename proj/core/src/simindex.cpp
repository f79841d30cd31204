#include "noveltyrank/simindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "noveltyrank/error.hpp"

namespace noveltyrank::simindex {

namespace {

double inverse_norm(std::span<const float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  return 1.0 / std::sqrt(sq);
}

std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

PriorIndex PriorIndex::build(const corpus::Corpus& corpus, const embeddings::EmbeddingStore& store) {
  if (store.channel() != embeddings::Channel::proximity) {
    throw ValidationError("prior index must be built over the proximity channel");
  }
  PriorIndex index;
  index.dim_ = store.dim();
  index.ids_.reserve(corpus.size());
  index.dates_.reserve(corpus.size());
  index.vectors_.reserve(corpus.size() * store.dim());
  index.inv_norms_.reserve(corpus.size());
  for (const corpus::PaperRecord* r : corpus.ordered_records()) {
    const float* v = store.find(r->id);
    if (v == nullptr) throw NotFoundError("no proximity embedding for corpus id '" + r->id + "'");
    std::span<const float> vec(v, store.dim());
    index.position_.emplace(r->id, index.ids_.size());
    index.ids_.push_back(r->id);
    index.dates_.push_back(r->published.serial());
    index.vectors_.insert(index.vectors_.end(), vec.begin(), vec.end());
    index.inv_norms_.push_back(inverse_norm(vec));
  }
  return index;
}

NeighborList PriorIndex::query(std::string_view query_id, std::size_t k) const {
  auto it = position_.find(std::string(query_id));
  if (it == position_.end()) throw NotFoundError("unknown query id '" + std::string(query_id) + "'");
  const std::size_t pos = it->second;
  std::span<const float> vec(vectors_.data() + pos * dim_, dim_);
  return query_vector(vec, Date(std::chrono::sys_days{std::chrono::days{dates_[pos]}}), k, std::string(query_id));
}

NeighborList PriorIndex::query_vector(std::span<const float> vector, Date published, std::size_t k,
                                      std::string query_id) const {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (vector.size() != dim_) {
    throw ValidationError("query vector has length " + std::to_string(vector.size()) + ", index dim is " +
                          std::to_string(dim_));
  }
  const double q_inv = inverse_norm(vector);
  if (!std::isfinite(q_inv)) throw ValidationError("query vector is zero or non-finite");

  // Rows are date-sorted, so the strictly-prior candidates form a prefix.
  const std::size_t prior =
      static_cast<std::size_t>(std::lower_bound(dates_.begin(), dates_.end(), published.serial()) - dates_.begin());

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(prior);
  for (std::size_t i = 0; i < prior; ++i) {
    const float* row = vectors_.data() + i * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += static_cast<double>(row[j]) * vector[j];
    scored.emplace_back(dot * inv_norms_[i] * q_inv, i);
  }
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return ids_[a.second] < ids_[b.second];
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

  NeighborList out{std::move(query_id), {}, k};
  out.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.entries.push_back({ids_[scored[i].second], std::clamp(scored[i].first, -1.0, 1.0)});
  }
  return out;
}

SimilarityFeatures similarity_features(const NeighborList& neighbors, const embeddings::EmbeddingStore& store) {
  SimilarityFeatures f;
  f.aggregated_embedding.assign(store.dim(), 0.0);
  if (neighbors.entries.empty()) return f;

  double sum = 0.0;
  f.max_sim = neighbors.entries.front().cosine;
  for (const auto& n : neighbors.entries) {
    const float* v = store.find(n.id);
    if (v == nullptr) {
      throw NotFoundError("neighbor '" + n.id + "' of '" + neighbors.query_id + "' has no " +
                          std::string(embeddings::to_string(store.channel())) + " embedding");
    }
    for (std::size_t j = 0; j < store.dim(); ++j) f.aggregated_embedding[j] += v[j];
    f.max_sim = std::max(f.max_sim, n.cosine);
    sum += n.cosine;
    f.neighbor_ids.push_back(n.id);
    f.neighbor_cosines.push_back(n.cosine);
  }
  const double count = static_cast<double>(neighbors.entries.size());
  for (auto& x : f.aggregated_embedding) x /= count;
  // The mean of values bounded by max can exceed it by one ulp after rounding.
  f.avg_sim = std::min(sum / count, f.max_sim);
  return f;
}

std::string render_similarity_report(const corpus::PaperRecord& paper, const NeighborList& neighbors,
                                     const corpus::Corpus& corpus) {
  std::string out;
  out += "Similarity report for \"" + paper.title + "\" (" + paper.id + ", published " +
         paper.published.to_string() + ")\n";
  if (neighbors.entries.empty()) {
    out += "No prior work retrieved.\n";
    out += "Max similarity: " + format4(0.0) + "\n";
    out += "Average similarity: " + format4(0.0) + "\n";
    return out;
  }

  std::vector<Neighbor> sorted = neighbors.entries;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  });

  out += "Top " + std::to_string(sorted.size()) + " prior papers by cosine similarity:\n";
  double max_sim = sorted.front().cosine;
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Neighbor& n = sorted[i];
    const corpus::PaperRecord* r = corpus.find(n.id);
    const std::string title = r ? r->title : std::string("(unknown title)");
    const std::string date = r ? r->published.to_string() : std::string("unknown date");
    out += std::to_string(i + 1) + ". " + title + " [" + n.id + ", " + date + "] cosine=" + format4(n.cosine) + "\n";
    sum += n.cosine;
  }
  out += "Max similarity: " + format4(max_sim) + "\n";
  out += "Average similarity: " + format4(std::min(sum / static_cast<double>(sorted.size()), max_sim)) + "\n";
  return out;
}

}  // namespace noveltyrank::simindex
