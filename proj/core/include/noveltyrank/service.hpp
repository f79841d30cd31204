#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/embeddings.hpp"
#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/checkpoint.hpp"
#include "noveltyrank/simindex.hpp"

namespace noveltyrank::service {

/// Everything a request can read. Immutable once published to a service.
struct ModelSnapshot {
  corpus::Corpus corpus;
  std::optional<embeddings::EmbeddingStore> classification;
  embeddings::EmbeddingStore proximity;
  simindex::PriorIndex index;
  fusion::FusionRecipe recipe;
  std::optional<heads::Checkpoint> classify_head;
  std::optional<heads::Checkpoint> rank_head;
  std::string version;
  /// Rows produced by `metrics::to_json(domain_breakdown(...))`, if available.
  nlohmann::json domain_report = nlohmann::json::array();
};

struct SnapshotParts {
  corpus::Corpus corpus;
  std::optional<embeddings::EmbeddingStore> classification;
  embeddings::EmbeddingStore proximity;
  std::optional<heads::Checkpoint> classify_head;
  std::optional<heads::Checkpoint> rank_head;
  std::string version;
  nlohmann::json domain_report = nlohmann::json::array();
};

/// Builds the index and checks that both heads share one recipe whose
/// embedding parts match the stores. Throws RecipeMismatchError or
/// ValidationError.
std::shared_ptr<const ModelSnapshot> make_snapshot(SnapshotParts parts);

struct SnapshotPaths {
  std::string corpus;
  std::string embeddings_dir;
  std::string classify_checkpoint;
  std::string rank_checkpoint;
  std::string domain_report;  // JSONL rows, optional
  std::string version;        // derived from checkpoint bytes when empty
};

std::shared_ptr<const ModelSnapshot> load_snapshot(const SnapshotPaths& paths);

/// Turns title + abstract into embeddings for requests that carry no vectors.
struct EmbedResult {
  std::vector<float> classification;
  std::vector<float> proximity;
};
using Embedder = std::function<EmbedResult(const std::string& title, const std::string& abstract)>;

/// POST {title, abstract} -> {classification: [...], proximity: [...]}.
Embedder http_embedder(const std::string& url);

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Request handlers over the current snapshot. Each request pins the
/// snapshot it started on; `publish` swaps in a new one atomically.
class NoveltyService {
 public:
  explicit NoveltyService(std::shared_ptr<const ModelSnapshot> snapshot, Embedder embedder = {});

  void publish(std::shared_ptr<const ModelSnapshot> snapshot);
  std::shared_ptr<const ModelSnapshot> snapshot() const;

  Response health() const;
  Response score(const nlohmann::json& request) const;
  Response compare(const nlohmann::json& request) const;
  Response similar(const nlohmann::json& request) const;
  Response rank(const nlohmann::json& request) const;
  Response domains() const;

  /// Routes a raw request; malformed JSON bodies yield 422.
  Response dispatch(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  std::shared_ptr<const ModelSnapshot> current() const;

  mutable std::mutex mutex_;
  std::shared_ptr<const ModelSnapshot> snapshot_;
  Embedder embedder_;
};

Response error_response(int status, std::string_view code, std::string_view message,
                        nlohmann::json details = nlohmann::json::object());

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string static_dir;
};

/// HTTP binding of a NoveltyService. `start` returns once the socket is bound.
class HttpServer {
 public:
  HttpServer(NoveltyService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace noveltyrank::service
