#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noveltyrank/date.hpp"

namespace noveltyrank::corpus {

enum class Domain { AI, ML, CV, Robotics, NLP, Cryptography, Other };

inline constexpr std::array<Domain, 7> kAllDomains = {Domain::AI,  Domain::ML,           Domain::CV,   Domain::Robotics,
                                                      Domain::NLP, Domain::Cryptography, Domain::Other};

std::string_view to_string(Domain domain);
std::optional<Domain> parse_domain(std::string_view name);

struct PaperRecord {
  std::string id;
  std::string title;
  std::string abstract;
  Domain domain = Domain::Other;
  Date published;
  int label = 0;
  std::vector<std::string> categories;

  /// First category string, or the domain name when none are listed.
  std::string primary_category() const;

  bool operator==(const PaperRecord&) const = default;
};

/// Immutable id-indexed paper collection with a deterministic (published, id) ordering.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every record and builds the ordering; throws ValidationError
  /// on duplicate ids or invariant violations.
  static Corpus from_records(std::vector<PaperRecord> records);

  const PaperRecord& at(std::string_view id) const;
  const PaperRecord* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::size_t size() const { return ordering_.size(); }
  bool empty() const { return ordering_.empty(); }

  /// Record ids sorted ascending by (published, id).
  std::span<const std::string> ordering() const { return ordering_; }

  /// Records in `ordering()` order.
  std::vector<const PaperRecord*> ordered_records() const;

  bool operator==(const Corpus&) const = default;

 private:
  std::map<std::string, PaperRecord, std::less<>> records_;
  std::vector<std::string> ordering_;
};

/// Throws ValidationError naming the record if an invariant fails.
void validate_record(const PaperRecord& record);

/// Reads the line-delimited metadata format. Blank lines are skipped;
/// unknown keys are reported once each as warnings.
Corpus load_corpus(std::istream& in);
Corpus load_corpus_file(const std::string& path);

/// Writes records in ordering order; reloading yields an equal Corpus.
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus_file(const Corpus& corpus, const std::string& path);

struct SplitResult {
  Corpus train;
  Corpus test;
};

/// train = published <= cutoff (and > train_after when given); test = published > cutoff.
SplitResult temporal_split(const Corpus& corpus, Date cutoff, std::optional<Date> train_after = std::nullopt);

inline constexpr Date kDefaultCutoff{2025, 3, 15};

struct DomainCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t total() const { return positives + negatives; }
  bool operator==(const DomainCounts&) const = default;
};

struct CorpusStats {
  std::size_t total = 0;
  std::size_t positives = 0;
  std::map<Domain, DomainCounts> per_domain;
  std::optional<Date> date_min;
  std::optional<Date> date_max;

  double positive_ratio() const { return total == 0 ? 0.0 : static_cast<double>(positives) / total; }
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace noveltyrank::corpus
