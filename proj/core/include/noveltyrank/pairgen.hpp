#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noveltyrank/corpus.hpp"

namespace noveltyrank::pairgen {

enum class Slot { A, B };

inline Slot other(Slot s) { return s == Slot::A ? Slot::B : Slot::A; }
std::string_view to_string(Slot slot);
std::optional<Slot> parse_slot(std::string_view text);

/// (slot A, slot B) with `gold` pointing at the label-1 paper.
struct ComparisonPair {
  std::string a_id;
  std::string b_id;
  Slot gold = Slot::A;
  corpus::Domain domain = corpus::Domain::Other;

  const std::string& positive_id() const { return gold == Slot::A ? a_id : b_id; }
  const std::string& negative_id() const { return gold == Slot::A ? b_id : a_id; }
  ComparisonPair swapped() const { return {b_id, a_id, other(gold), domain}; }

  bool operator==(const ComparisonPair&) const = default;
};

enum class Provenance { sampled_training, dense_eval };

struct PairSet {
  std::vector<ComparisonPair> pairs;
  Provenance provenance = Provenance::sampled_training;
  std::optional<std::uint64_t> seed;
  /// Positives dropped for lack of same-domain negatives (sampled sets only).
  std::size_t skipped_positives = 0;

  bool operator==(const PairSet&) const = default;
};

inline constexpr std::size_t kDefaultNegativesPerPositive = 5;

/// For each positive (ascending id), draws min(n, available) distinct
/// same-domain negatives without replacement, then flips a fair coin for
/// slot order. Identical (corpus, n, seed) give identical output.
PairSet sample_training_pairs(const corpus::Corpus& train, std::size_t negatives_per_positive, std::uint64_t seed);

/// Every positive against every same-domain negative, positive id then
/// negative id ascending, canonical gold=A.
PairSet dense_eval_pairs(const corpus::Corpus& test);

/// Throws ValidationError if the pair breaks a ComparisonPair invariant
/// with respect to `corpus`.
void validate_pair(const ComparisonPair& pair, const corpus::Corpus& corpus);

/// Header line `{"provenance", "seed", "count"}` then one `{a_id, b_id, gold, domain}` per line.
void write_pairs(const PairSet& set, std::ostream& out);
PairSet read_pairs(std::istream& in);
void write_pairs_file(const PairSet& set, const std::string& path);
PairSet read_pairs_file(const std::string& path);

}  // namespace noveltyrank::pairgen
