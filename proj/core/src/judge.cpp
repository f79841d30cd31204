#include "noveltyrank/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <thread>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/error.hpp"
#include "prompt_templates.hpp"

namespace noveltyrank::judge {

using json = nlohmann::json;
using pairgen::Slot;

namespace {

std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Single pass over the template; inserted values are never rescanned.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        std::string_view key = tmpl.substr(i + 1, close - i - 1);
        key = key.substr(0, key.find(':'));
        if (auto it = values.find(key); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string verdict_token(const Verdict& v) {
  if (const int* label = std::get_if<int>(&v)) return std::to_string(*label);
  return std::string(pairgen::to_string(std::get<Slot>(v)));
}


// Queries with retries; every raw response and attempt lands in `raw` / `audit`.
Verdict query_with_retry(JudgeEndpoint& endpoint, const PromptBundle& prompt, const RetryPolicy& retry,
                         const std::string& pair_key, bool swapped, std::vector<std::string>& raw,
                         std::vector<AuditEntry>& audit) {
  const int attempts = std::max(1, retry.max_attempts);
  auto backoff = retry.initial_backoff;
  std::string last_error;
  bool last_was_transport = false;
  const std::string prompt_hash = prompt.hash();
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::string text = endpoint.complete(prompt);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      raw.push_back(text);
      try {
        Verdict v = parse_verdict(text, prompt.mode);
        audit.push_back({pair_key, prompt_hash, text, verdict_token(v), ms, swapped});
        return v;
      } catch (const ParseError& e) {
        audit.push_back({pair_key, prompt_hash, text, "parse_error", ms, swapped});
        last_error = e.what();
        last_was_transport = false;
      }
    } catch (const TransportError& e) {
      last_error = e.what();
      last_was_transport = true;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  const std::string msg = pair_key + ": judge failed after " + std::to_string(attempts) +
                          " attempts (swapped=" + (swapped ? "true" : "false") + "): " + last_error;
  if (last_was_transport) throw TransportError(msg);
  throw ParseError(msg);
}

const simindex::SimilarityFeatures& features_for(const JudgeContext& ctx, const std::string& id) {
  if (ctx.similarity == nullptr) throw NotFoundError("judge context has no similarity features");
  auto it = ctx.similarity->find(id);
  if (it == ctx.similarity->end()) throw NotFoundError("no similarity features for paper '" + id + "'");
  return it->second;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint url needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string PromptBundle::hash() const { return sha256_hex(system_text + "\n\n" + user_text); }

PromptBundle build_binary_prompt(const corpus::PaperRecord& paper, const simindex::SimilarityFeatures& sim,
                                 std::string_view similarity_report) {
  const std::map<std::string, std::string, std::less<>> values = {
      {"title", paper.title},
      {"category", paper.primary_category()},
      {"abstract", paper.abstract},
      {"max_sim", format4(sim.max_sim)},
      {"avg_sim", format4(sim.avg_sim)},
      {"similarity_report", std::string(similarity_report)},
  };
  return {templates::kBinarySystem, fill(templates::kBinaryUser, values), Mode::binary};
}

PromptBundle build_pairwise_prompt(const PaperView& a, const PaperView& b, std::string_view system_override) {
  std::map<std::string, std::string, std::less<>> values;
  for (const auto& [suffix, view] : {std::pair{"A", &a}, std::pair{"B", &b}}) {
    const std::string s = suffix;
    values["title" + s] = view->paper->title;
    values["category" + s] = view->paper->primary_category();
    values["abstract" + s] = view->paper->abstract;
    values["max_sim" + s] = format4(view->similarity->max_sim);
    values["avg_sim" + s] = format4(view->similarity->avg_sim);
  }
  std::string system = system_override.empty() ? std::string(templates::kPairwiseSystem) : std::string(system_override);
  return {std::move(system), fill(templates::kPairwiseUser, values), Mode::pairwise};
}

Verdict parse_verdict(std::string_view raw, Mode mode) {
  const std::string_view t = trim(raw);
  if (mode == Mode::binary) {
    if (t == "0") return 0;
    if (t == "1") return 1;
  } else {
    if (t == "A" || t == "a") return Slot::A;
    if (t == "B" || t == "b") return Slot::B;
  }
  throw ParseError(std::string("non-conforming judge output for ") + (mode == Mode::binary ? "binary" : "pairwise") +
                   " mode: \"" + std::string(raw) + "\"");
}

HttpJudgeEndpoint::HttpJudgeEndpoint(EndpointConfig config) : config_(std::move(config)) {
  split_url(config_.url);  // validates
}

std::string HttpJudgeEndpoint::complete(const PromptBundle& prompt) {
  const auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(static_cast<time_t>(secs), 0);
  client.set_read_timeout(static_cast<time_t>(secs), 0);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  const json body = {{"model", config_.model},
                     {"system", prompt.system_text},
                     {"user", prompt.user_text},
                     {"max_output_tokens", config_.max_output_tokens},
                     {"temperature", 0}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("judge endpoint " + config_.url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("judge endpoint " + config_.url + " returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
  }
  try {
    return json::parse(res->body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError("judge endpoint " + config_.url + " returned an unreadable body: " + e.what());
  }
}

json to_json(const AuditEntry& e) {
  return {{"pair", e.pair_key},     {"prompt_hash", e.prompt_hash}, {"raw_response", e.raw_response},
          {"decision", e.decision}, {"latency_ms", e.latency_ms},   {"swapped", e.swapped}};
}

JudgeVerdict judge_pair(JudgeEndpoint& endpoint, const pairgen::ComparisonPair& pair, const JudgeContext& ctx,
                        const JudgeOptions& options) {
  if (ctx.corpus == nullptr) throw NotFoundError("judge context has no corpus");
  const PaperView a{&ctx.corpus->at(pair.a_id), &features_for(ctx, pair.a_id)};
  const PaperView b{&ctx.corpus->at(pair.b_id), &features_for(ctx, pair.b_id)};
  const std::string key = pair.a_id + "|" + pair.b_id;

  JudgeVerdict out;
  const auto first = std::get<Slot>(query_with_retry(endpoint, build_pairwise_prompt(a, b, options.pairwise_system_override),
                                                     options.retry, key, false, out.raw_responses, out.audit));
  if (!options.swap_ensemble) {
    out.decision = first;
    return out;
  }
  out.swapped = true;
  const auto second = std::get<Slot>(query_with_retry(endpoint, build_pairwise_prompt(b, a, options.pairwise_system_override),
                                                      options.retry, key, true, out.raw_responses, out.audit));
  const Slot unswapped = pairgen::other(second);
  if (unswapped == first) {
    out.decision = first;
  } else {
    out.inconsistent = true;
  }
  return out;
}

BinaryVerdict judge_paper(JudgeEndpoint& endpoint, const corpus::PaperRecord& paper,
                          const simindex::SimilarityFeatures& sim, std::string_view similarity_report,
                          const RetryPolicy& retry) {
  BinaryVerdict out;
  const auto v = query_with_retry(endpoint, build_binary_prompt(paper, sim, similarity_report), retry, paper.id, false,
                                  out.raw_responses, out.audit);
  out.label = std::get<int>(v);
  return out;
}

std::vector<PairOutcome> judge_pairs(JudgeEndpoint& endpoint, const std::vector<pairgen::ComparisonPair>& pairs,
                                     const JudgeContext& ctx, const JudgeOptions& options, std::size_t max_in_flight) {
  std::vector<PairOutcome> results(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        results[i].verdict = judge_pair(endpoint, pairs[i], ctx, options);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(1, pairs.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  return results;
}

}  // namespace noveltyrank::judge
