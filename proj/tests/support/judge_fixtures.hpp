#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "noveltyrank/corpus.hpp"
#include "noveltyrank/judge.hpp"
#include "noveltyrank/simindex.hpp"

namespace testsupport {

/// Papers and similarity values read from tests/golden/fixture.json.
struct GoldenFixture {
  noveltyrank::corpus::PaperRecord binary_paper;
  noveltyrank::simindex::SimilarityFeatures binary_sim;
  std::string binary_report;
  noveltyrank::corpus::PaperRecord paper_a, paper_b;
  noveltyrank::simindex::SimilarityFeatures sim_a, sim_b;
};

inline noveltyrank::corpus::PaperRecord golden_paper(const nlohmann::json& j, const std::string& id) {
  noveltyrank::corpus::PaperRecord r;
  r.id = id;
  r.title = j.at("title").get<std::string>();
  r.abstract = j.at("abstract").get<std::string>();
  const auto category = j.at("category").get<std::string>();
  if (auto d = noveltyrank::corpus::parse_domain(category)) {
    r.domain = *d;
  } else {
    r.domain = noveltyrank::corpus::Domain::CV;
    r.categories = {category};
  }
  r.published = noveltyrank::Date(2025, 1, 1);
  return r;
}

inline noveltyrank::simindex::SimilarityFeatures golden_sim(const nlohmann::json& j) {
  noveltyrank::simindex::SimilarityFeatures s;
  s.max_sim = j.at("max_sim").get<double>();
  s.avg_sim = j.at("avg_sim").get<double>();
  return s;
}

inline GoldenFixture load_golden_fixture() {
  const auto j = nlohmann::json::parse(read_file(source_path("tests/golden/fixture.json")));
  GoldenFixture f;
  f.binary_paper = golden_paper(j.at("binary"), "bin");
  f.binary_sim = golden_sim(j.at("binary"));
  f.binary_report = j.at("binary").at("similarity_report").get<std::string>();
  f.paper_a = golden_paper(j.at("pairwise").at("A"), "pa");
  f.paper_b = golden_paper(j.at("pairwise").at("B"), "pb");
  f.sim_a = golden_sim(j.at("pairwise").at("A"));
  f.sim_b = golden_sim(j.at("pairwise").at("B"));
  return f;
}

/// Title shown in the given slot block of a pairwise prompt.
inline std::string slot_title(const noveltyrank::judge::PromptBundle& p, char slot) {
  const std::string marker = std::string("### Paper ") + slot + "\nTitle: ";
  const auto at = p.user_text.find(marker);
  if (at == std::string::npos) return {};
  const auto begin = at + marker.size();
  return p.user_text.substr(begin, p.user_text.find('\n', begin) - begin);
}

}  // namespace testsupport
