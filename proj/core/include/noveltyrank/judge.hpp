#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/pairgen.hpp"
#include "noveltyrank/simindex.hpp"

namespace noveltyrank::judge {

enum class Mode { binary, pairwise };

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  Mode mode = Mode::binary;

  /// SHA-256 hex over system and user text.
  std::string hash() const;
};

/// Zero-shot single-paper prompt; similarity values rendered with 4 decimals.
PromptBundle build_binary_prompt(const corpus::PaperRecord& paper, const simindex::SimilarityFeatures& sim,
                                 std::string_view similarity_report);

struct PaperView {
  const corpus::PaperRecord* paper;
  const simindex::SimilarityFeatures* similarity;
};

/// Two-paper prompt in exactly the given slot order. A non-empty
/// `system_override` replaces the stock (computer-vision flavoured) system text.
PromptBundle build_pairwise_prompt(const PaperView& a, const PaperView& b, std::string_view system_override = {});

/// 0/1 for binary mode, Slot for pairwise mode.
using Verdict = std::variant<int, pairgen::Slot>;

/// Trims whitespace, then accepts exactly "0"/"1" (binary) or "A"/"B" in
/// either case (pairwise). Anything else throws ParseError carrying the raw text.
Verdict parse_verdict(std::string_view raw, Mode mode);

/// A chat-completion-style backend.
class JudgeEndpoint {
 public:
  virtual ~JudgeEndpoint() = default;
  /// Returns the model's text; throws TransportError on transport failure.
  virtual std::string complete(const PromptBundle& prompt) = 0;
};

struct EndpointConfig {
  std::string url;  // http(s)://host[:port]/path
  std::string model;
  std::string token;
  int max_output_tokens = 8;
  std::chrono::milliseconds timeout{60000};
};

/// POST {model, system, user, max_output_tokens, temperature: 0} -> {text}.
class HttpJudgeEndpoint : public JudgeEndpoint {
 public:
  explicit HttpJudgeEndpoint(EndpointConfig config);
  std::string complete(const PromptBundle& prompt) override;

 private:
  EndpointConfig config_;
};

/// Adapter for in-process responders (tests, dry runs).
class FunctionJudgeEndpoint : public JudgeEndpoint {
 public:
  explicit FunctionJudgeEndpoint(std::function<std::string(const PromptBundle&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const PromptBundle& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const PromptBundle&)> fn_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct JudgeOptions {
  bool swap_ensemble = false;
  RetryPolicy retry;
  std::string pairwise_system_override;
};

struct AuditEntry {
  std::string pair_key;
  std::string prompt_hash;
  std::string raw_response;
  std::string decision;  // parsed token, or "parse_error"
  double latency_ms = 0.0;
  bool swapped = false;
};

nlohmann::json to_json(const AuditEntry& entry);

struct JudgeVerdict {
  /// Decision in the caller's slot order; empty when inconsistent.
  std::optional<pairgen::Slot> decision;
  bool inconsistent = false;
  std::vector<std::string> raw_responses;
  bool swapped = false;
  std::vector<AuditEntry> audit;
};

/// Similarity features and reports for the papers being judged.
struct JudgeContext {
  const corpus::Corpus* corpus = nullptr;
  const std::map<std::string, simindex::SimilarityFeatures>* similarity = nullptr;
};

/// Queries the endpoint once (or twice with slots swapped under the
/// ensemble) with retries and exponential backoff. A swapped answer "A"
/// counts as a vote for original slot B. Throws TransportError or
/// ParseError with full context once retries are exhausted.
JudgeVerdict judge_pair(JudgeEndpoint& endpoint, const pairgen::ComparisonPair& pair, const JudgeContext& ctx,
                        const JudgeOptions& options);

struct BinaryVerdict {
  int label = 0;
  std::vector<std::string> raw_responses;
  std::vector<AuditEntry> audit;
};

BinaryVerdict judge_paper(JudgeEndpoint& endpoint, const corpus::PaperRecord& paper,
                          const simindex::SimilarityFeatures& sim, std::string_view similarity_report,
                          const RetryPolicy& retry);

/// Outcome slot for batch judging: a verdict or the error that ended it.
struct PairOutcome {
  std::optional<JudgeVerdict> verdict;
  std::string error;
};

/// Judges every pair with at most `max_in_flight` concurrent queries.
/// Results are indexed like `pairs`, independent of completion order.
std::vector<PairOutcome> judge_pairs(JudgeEndpoint& endpoint, const std::vector<pairgen::ComparisonPair>& pairs,
                                     const JudgeContext& ctx, const JudgeOptions& options, std::size_t max_in_flight);

}  // namespace noveltyrank::judge
