#include "noveltyrank/pairgen.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "noveltyrank/error.hpp"
#include "noveltyrank/rng.hpp"

namespace noveltyrank::pairgen {

using json = nlohmann::json;
using corpus::Domain;
using corpus::PaperRecord;

namespace {

struct DomainGroups {
  std::map<Domain, std::vector<std::string>> positives;
  std::map<Domain, std::vector<std::string>> negatives;
};

// Ids inside each group come out ascending because the records map is id-sorted
// and we re-sort to be independent of the corpus ordering.
DomainGroups group_by_domain(const corpus::Corpus& c) {
  DomainGroups g;
  for (const PaperRecord* r : c.ordered_records()) {
    (r->label == 1 ? g.positives : g.negatives)[r->domain].push_back(r->id);
  }
  for (auto* m : {&g.positives, &g.negatives}) {
    for (auto& [_, ids] : *m) std::sort(ids.begin(), ids.end());
  }
  return g;
}

std::string_view provenance_name(Provenance p) {
  return p == Provenance::sampled_training ? "sampled_training" : "dense_eval";
}

}  // namespace

std::string_view to_string(Slot slot) { return slot == Slot::A ? "A" : "B"; }

std::optional<Slot> parse_slot(std::string_view text) {
  if (text == "A" || text == "a") return Slot::A;
  if (text == "B" || text == "b") return Slot::B;
  return std::nullopt;
}

PairSet sample_training_pairs(const corpus::Corpus& train, std::size_t negatives_per_positive, std::uint64_t seed) {
  if (negatives_per_positive == 0) throw ValidationError("negatives_per_positive must be at least 1");
  const DomainGroups g = group_by_domain(train);
  Rng rng(seed);
  PairSet set{{}, Provenance::sampled_training, seed, 0};

  std::vector<std::string> positives;
  for (const auto& [_, ids] : g.positives) positives.insert(positives.end(), ids.begin(), ids.end());
  std::sort(positives.begin(), positives.end());

  for (const auto& pos_id : positives) {
    const Domain domain = train.at(pos_id).domain;
    auto neg_it = g.negatives.find(domain);
    if (neg_it == g.negatives.end() || neg_it->second.empty()) {
      ++set.skipped_positives;
      continue;
    }
    std::vector<std::string> pool = neg_it->second;
    const std::size_t take = std::min(negatives_per_positive, pool.size());
    // Partial Fisher-Yates: the first `take` slots become a uniform sample.
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < take; ++i) {
      if (rng.coin()) {
        set.pairs.push_back({pool[i], pos_id, Slot::B, domain});
      } else {
        set.pairs.push_back({pos_id, pool[i], Slot::A, domain});
      }
    }
  }
  if (set.skipped_positives > 0) {
    spdlog::warn("pairgen: skipped {} positives with no same-domain negatives", set.skipped_positives);
  }
  return set;
}

PairSet dense_eval_pairs(const corpus::Corpus& test) {
  const DomainGroups g = group_by_domain(test);
  PairSet set{{}, Provenance::dense_eval, std::nullopt, 0};

  std::vector<std::pair<std::string, Domain>> positives;
  for (const auto& [domain, ids] : g.positives) {
    for (const auto& id : ids) positives.emplace_back(id, domain);
  }
  std::sort(positives.begin(), positives.end());
  for (const auto& [pos_id, domain] : positives) {
    auto neg_it = g.negatives.find(domain);
    if (neg_it == g.negatives.end()) continue;
    for (const auto& neg_id : neg_it->second) set.pairs.push_back({pos_id, neg_id, Slot::A, domain});
  }
  return set;
}

void validate_pair(const ComparisonPair& pair, const corpus::Corpus& c) {
  const std::string who = "pair (" + pair.a_id + ", " + pair.b_id + ")";
  if (pair.a_id == pair.b_id) throw ValidationError(who + ": both slots hold the same paper");
  const PaperRecord* a = c.find(pair.a_id);
  const PaperRecord* b = c.find(pair.b_id);
  if (a == nullptr || b == nullptr) throw NotFoundError(who + ": paper not in corpus");
  if (a->label + b->label != 1) throw ValidationError(who + ": exactly one paper must be positive");
  if (a->domain != b->domain || a->domain != pair.domain) throw ValidationError(who + ": domain mismatch");
  const PaperRecord* gold = pair.gold == Slot::A ? a : b;
  if (gold->label != 1) throw ValidationError(who + ": gold slot does not hold the positive paper");
}

void write_pairs(const PairSet& set, std::ostream& out) {
  json header = {{"provenance", provenance_name(set.provenance)}, {"count", set.pairs.size()}};
  header["seed"] = set.seed ? json(*set.seed) : json(nullptr);
  out << header.dump() << '\n';
  for (const auto& p : set.pairs) {
    out << json{{"a_id", p.a_id}, {"b_id", p.b_id}, {"gold", to_string(p.gold)}, {"domain", corpus::to_string(p.domain)}}
               .dump()
        << '\n';
  }
}

PairSet read_pairs(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto parse = [&]() {
    try {
      return json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("pair file line " + std::to_string(line_no) + ": " + e.what());
    }
  };

  if (!next_line()) throw ParseError("pair file is empty (missing header line)");
  const json header = parse();
  PairSet set;
  try {
    const auto prov = header.at("provenance").get<std::string>();
    if (prov == "sampled_training") {
      set.provenance = Provenance::sampled_training;
    } else if (prov == "dense_eval") {
      set.provenance = Provenance::dense_eval;
    } else {
      throw ParseError("pair file header: unknown provenance '" + prov + "'");
    }
    if (header.contains("seed") && !header["seed"].is_null()) set.seed = header["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("pair file header: ") + e.what());
  }

  while (next_line()) {
    const json obj = parse();
    try {
      ComparisonPair p;
      p.a_id = obj.at("a_id").get<std::string>();
      p.b_id = obj.at("b_id").get<std::string>();
      auto gold = parse_slot(obj.at("gold").get<std::string>());
      auto domain = corpus::parse_domain(obj.at("domain").get<std::string>());
      if (!gold || !domain) throw ParseError("bad gold or domain");
      p.gold = *gold;
      p.domain = *domain;
      set.pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ParseError("pair file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (header.contains("count") && header["count"].get<std::size_t>() != set.pairs.size()) {
    throw ParseError("pair file header count " + std::to_string(header["count"].get<std::size_t>()) +
                     " does not match " + std::to_string(set.pairs.size()) + " pairs");
  }
  return set;
}

void write_pairs_file(const PairSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write pair file '" + path + "'");
  write_pairs(set, out);
}

PairSet read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open pair file '" + path + "'");
  return read_pairs(in);
}

}  // namespace noveltyrank::pairgen
