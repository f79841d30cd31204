#include "noveltyrank/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "noveltyrank/error.hpp"

namespace noveltyrank::corpus {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kDomainNames = {"AI", "ML", "CV", "Robotics", "NLP", "Cryptography", "Other"};

// Accepted in input, never used by the engine.
const std::set<std::string, std::less<>> kIgnoredKeys = {"authors", "venue"};
const std::set<std::string, std::less<>> kKnownKeys = {"id",        "title", "abstract",  "domain",
                                                       "published", "label", "categories"};

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line_prefix(line_no) + "missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_string()) throw ParseError(line_prefix(line_no) + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

PaperRecord parse_line(const json& obj, std::size_t line_no, std::set<std::string>& warned) {
  if (!obj.is_object()) throw ParseError(line_prefix(line_no) + "expected a JSON object");
  PaperRecord r;
  r.id = require_string(obj, "id", line_no);
  const std::string who = line_prefix(line_no) + "record '" + r.id + "': ";
  r.title = require_string(obj, "title", line_no);
  r.abstract = require_string(obj, "abstract", line_no);

  const std::string domain = require_string(obj, "domain", line_no);
  auto d = parse_domain(domain);
  if (!d) throw ParseError(who + "field 'domain' has unknown value '" + domain + "'");
  r.domain = *d;

  const std::string published = require_string(obj, "published", line_no);
  try {
    r.published = Date::parse(published);
  } catch (const ParseError& e) {
    throw ParseError(who + "field 'published': " + e.what());
  }

  const json& label = require(obj, "label", line_no);
  if (!label.is_number_integer()) throw ParseError(who + "field 'label' must be an integer 0 or 1");
  const auto lv = label.get<std::int64_t>();
  if (lv != 0 && lv != 1) throw ValidationError(who + "field 'label' must be 0 or 1, got " + std::to_string(lv));
  r.label = static_cast<int>(lv);

  const json& cats = require(obj, "categories", line_no);
  if (!cats.is_array()) throw ParseError(who + "field 'categories' must be an array of strings");
  for (const auto& c : cats) {
    if (!c.is_string()) throw ParseError(who + "field 'categories' must be an array of strings");
    r.categories.push_back(c.get<std::string>());
  }

  for (const auto& [key, _] : obj.items()) {
    if (kKnownKeys.contains(key) || kIgnoredKeys.contains(key)) continue;
    if (warned.insert(key).second) spdlog::warn("corpus: ignoring unknown key '{}' (first seen on line {})", key, line_no);
  }
  return r;
}

}  // namespace

std::string_view to_string(Domain domain) { return kDomainNames[static_cast<std::size_t>(domain)]; }

std::optional<Domain> parse_domain(std::string_view name) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (kDomainNames[i] == name) return static_cast<Domain>(i);
  }
  return std::nullopt;
}

std::string PaperRecord::primary_category() const {
  return categories.empty() ? std::string(to_string(domain)) : categories.front();
}

void validate_record(const PaperRecord& r) {
  if (r.id.empty()) throw ValidationError("record with empty id");
  if (r.title.empty()) throw ValidationError("record '" + r.id + "': empty title");
  if (r.label != 0 && r.label != 1) {
    throw ValidationError("record '" + r.id + "': label must be 0 or 1, got " + std::to_string(r.label));
  }
  if (!std::chrono::year_month_day{r.published.days()}.ok()) {
    throw ValidationError("record '" + r.id + "': invalid publication date");
  }
}

Corpus Corpus::from_records(std::vector<PaperRecord> records) {
  Corpus c;
  for (auto& r : records) {
    validate_record(r);
    std::string id = r.id;
    if (!c.records_.emplace(id, std::move(r)).second) throw ValidationError("duplicate id '" + id + "'");
  }
  c.ordering_.reserve(c.records_.size());
  for (const auto& [id, _] : c.records_) c.ordering_.push_back(id);
  std::stable_sort(c.ordering_.begin(), c.ordering_.end(), [&](const std::string& a, const std::string& b) {
    const Date da = c.records_.find(a)->second.published;
    const Date db = c.records_.find(b)->second.published;
    if (da != db) return da < db;
    return a < b;
  });
  return c;
}

const PaperRecord& Corpus::at(std::string_view id) const {
  if (const auto* r = find(id)) return *r;
  throw NotFoundError("unknown paper id '" + std::string(id) + "'");
}

const PaperRecord* Corpus::find(std::string_view id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

std::vector<const PaperRecord*> Corpus::ordered_records() const {
  std::vector<const PaperRecord*> out;
  out.reserve(ordering_.size());
  for (const auto& id : ordering_) out.push_back(&records_.find(id)->second);
  return out;
}

Corpus load_corpus(std::istream& in) {
  std::vector<PaperRecord> records;
  std::set<std::string> seen_ids;
  std::set<std::string> warned;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_prefix(line_no) + "malformed JSON: " + e.what());
    }
    PaperRecord r = parse_line(obj, line_no, warned);
    try {
      validate_record(r);
    } catch (const ValidationError& e) {
      throw ValidationError(line_prefix(line_no) + e.what());
    }
    if (!seen_ids.insert(r.id).second) throw ValidationError(line_prefix(line_no) + "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return Corpus::from_records(std::move(records));
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open corpus file '" + path + "'");
  return load_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const PaperRecord* r : corpus.ordered_records()) {
    json obj = {{"id", r->id},
                {"title", r->title},
                {"abstract", r->abstract},
                {"domain", to_string(r->domain)},
                {"published", r->published.to_string()},
                {"label", r->label},
                {"categories", r->categories}};
    out << obj.dump() << '\n';
  }
}

void write_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  write_corpus(corpus, out);
}

SplitResult temporal_split(const Corpus& corpus, Date cutoff, std::optional<Date> train_after) {
  std::vector<PaperRecord> train;
  std::vector<PaperRecord> test;
  std::size_t dropped = 0;
  for (const PaperRecord* r : corpus.ordered_records()) {
    if (r->published > cutoff) {
      test.push_back(*r);
    } else if (train_after && r->published <= *train_after) {
      ++dropped;
    } else {
      train.push_back(*r);
    }
  }
  if (dropped > 0) spdlog::info("temporal_split: dropped {} records on or before {}", dropped, train_after->to_string());
  if (train.empty()) spdlog::warn("temporal_split: training side is empty for cutoff {}", cutoff.to_string());
  if (test.empty()) spdlog::warn("temporal_split: test side is empty for cutoff {}", cutoff.to_string());
  return {Corpus::from_records(std::move(train)), Corpus::from_records(std::move(test))};
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  for (const PaperRecord* r : corpus.ordered_records()) {
    ++s.total;
    DomainCounts& dc = s.per_domain[r->domain];
    if (r->label == 1) {
      ++s.positives;
      ++dc.positives;
    } else {
      ++dc.negatives;
    }
    if (!s.date_min || r->published < *s.date_min) s.date_min = r->published;
    if (!s.date_max || r->published > *s.date_max) s.date_max = r->published;
  }
  return s;
}

}  // namespace noveltyrank::corpus
