#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/embeddings.hpp"
#include "noveltyrank/simindex.hpp"
#include "noveltyrank/synth.hpp"

namespace testsupport {

inline std::string source_path(const std::string& rel) { return std::string(NOVELTYRANK_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("noveltyrank-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline noveltyrank::corpus::PaperRecord record(std::string id, noveltyrank::Date published, int label,
                                               noveltyrank::corpus::Domain domain = noveltyrank::corpus::Domain::ML) {
  noveltyrank::corpus::PaperRecord r;
  r.title = "Title of " + id;
  r.abstract = "Abstract of " + id + ".";
  r.id = std::move(id);
  r.domain = domain;
  r.published = published;
  r.label = label;
  r.categories = {"cs.LG"};
  return r;
}

/// Random corpus with many same-day papers and exact cosine ties.
inline noveltyrank::synth::SynthBundle knn_corpus(std::size_t papers, std::size_t dim, std::uint64_t seed) {
  noveltyrank::synth::SynthConfig cfg;
  cfg.papers = papers;
  cfg.dim = dim;
  cfg.seed = seed;
  cfg.start = noveltyrank::Date(2024, 1, 1);
  cfg.end = noveltyrank::Date(2024, 4, 30);
  cfg.duplicate_rate = 0.15;
  return noveltyrank::synth::generate(cfg);
}

struct OracleNeighbor {
  std::string id;
  double cosine;
};

/// Exhaustive scan: cosine computed directly as dot / (|a| |b|) over every
/// paper published strictly before the query, sorted by (-cosine, id).
inline std::vector<OracleNeighbor> brute_prior_topk(const noveltyrank::corpus::Corpus& corpus,
                                                    const noveltyrank::embeddings::EmbeddingStore& store,
                                                    const std::string& query_id, std::size_t k) {
  const auto& q = corpus.at(query_id);
  const auto qv = store.vector(query_id);
  std::vector<OracleNeighbor> all;
  for (const auto& id : corpus.ordering()) {
    const auto& r = corpus.at(id);
    if (!(r.published < q.published)) continue;
    const auto v = store.vector(id);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      dot += double(qv[j]) * v[j];
      na += double(qv[j]) * qv[j];
      nb += double(v[j]) * v[j];
    }
    all.push_back({id, dot / (std::sqrt(na) * std::sqrt(nb))});
  }
  std::sort(all.begin(), all.end(), [](const OracleNeighbor& a, const OracleNeighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

/// Compares index output with the oracle: identical ids in identical order,
/// cosines within `tol`. Returns an empty string on success.
inline std::string compare_with_oracle(const noveltyrank::simindex::NeighborList& got,
                                       const std::vector<OracleNeighbor>& want, double tol = 1e-9) {
  if (got.entries.size() != want.size()) {
    return got.query_id + ": size " + std::to_string(got.entries.size()) + " vs oracle " + std::to_string(want.size());
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (got.entries[i].id != want[i].id) {
      return got.query_id + ": rank " + std::to_string(i) + " got " + got.entries[i].id + " want " + want[i].id;
    }
    if (std::abs(got.entries[i].cosine - want[i].cosine) > tol) {
      return got.query_id + ": cosine mismatch at rank " + std::to_string(i);
    }
  }
  return {};
}

}  // namespace testsupport
