#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "noveltyrank/error.hpp"
#include "noveltyrank/pairgen.hpp"
#include "noveltyrank/rng.hpp"

using namespace noveltyrank;
using namespace noveltyrank::pairgen;
using corpus::Corpus;
using corpus::Domain;
using testsupport::record;

namespace {

Corpus pos_and_negs(std::size_t negatives, Domain domain = Domain::ML) {
  std::vector<corpus::PaperRecord> rs{record("pos", Date(2024, 1, 1), 1, domain)};
  for (std::size_t i = 0; i < negatives; ++i) rs.push_back(record("neg" + std::to_string(i), Date(2024, 1, 2), 0, domain));
  return Corpus::from_records(std::move(rs));
}

Corpus random_corpus(Rng& rng, std::size_t n) {
  std::vector<corpus::PaperRecord> rs;
  for (std::size_t i = 0; i < n; ++i) {
    const Domain d = corpus::kAllDomains[rng.below(3)];
    rs.push_back(record("p" + std::to_string(i), Date(2024, 1, 1 + static_cast<int>(rng.below(28))),
                        rng.uniform() < 0.3 ? 1 : 0, d));
  }
  return Corpus::from_records(std::move(rs));
}

}  // namespace

TEST(SampleTrainingPairs, FiveOfSevenNegatives) {
  const auto c = pos_and_negs(7);
  const auto set = sample_training_pairs(c, 5, 1);
  ASSERT_EQ(set.pairs.size(), 5u);
  std::set<std::string> negs;
  for (const auto& p : set.pairs) {
    EXPECT_EQ(p.positive_id(), "pos");
    negs.insert(p.negative_id());
  }
  EXPECT_EQ(negs.size(), 5u);
  EXPECT_EQ(set.provenance, Provenance::sampled_training);
  EXPECT_EQ(set.seed, 1u);
}

TEST(SampleTrainingPairs, ShortSupplyUsesAllNegatives) {
  const auto set = sample_training_pairs(pos_and_negs(2), 5, 1);
  ASSERT_EQ(set.pairs.size(), 2u);
  EXPECT_NE(set.pairs[0].negative_id(), set.pairs[1].negative_id());
}

TEST(SampleTrainingPairs, NoSameDomainNegativeSkips) {
  auto rs = std::vector<corpus::PaperRecord>{record("pos", Date(2024, 1, 1), 1, Domain::CV),
                                             record("neg", Date(2024, 1, 1), 0, Domain::NLP)};
  const auto set = sample_training_pairs(Corpus::from_records(rs), 5, 3);
  EXPECT_TRUE(set.pairs.empty());
  EXPECT_EQ(set.skipped_positives, 1u);
}

TEST(SampleTrainingPairs, GoldSlotIsFairCoin) {
  std::vector<corpus::PaperRecord> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(record("pos" + std::to_string(i), Date(2024, 1, 1), 1));
  for (int i = 0; i < 10; ++i) rs.push_back(record("neg" + std::to_string(i), Date(2024, 1, 1), 0));
  const auto set = sample_training_pairs(Corpus::from_records(rs), 5, 99);
  ASSERT_EQ(set.pairs.size(), 10000u);
  std::size_t gold_a = 0;
  for (const auto& p : set.pairs) gold_a += p.gold == Slot::A;
  const double frac = static_cast<double>(gold_a) / set.pairs.size();
  EXPECT_NEAR(frac, 0.5, 0.02);
}

TEST(SampleTrainingPairs, SameSeedSameFile) {
  Rng rng(4);
  const auto c = random_corpus(rng, 300);
  std::ostringstream a, b, other;
  write_pairs(sample_training_pairs(c, 5, 17), a);
  write_pairs(sample_training_pairs(c, 5, 17), b);
  write_pairs(sample_training_pairs(c, 5, 18), other);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), other.str());
}

TEST(PairLaws, EveryPairValidOnRandomCorpora) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(rng, 20 + rng.below(60));
    for (const auto& p : sample_training_pairs(c, 5, static_cast<std::uint64_t>(trial)).pairs) {
      ASSERT_NO_THROW(validate_pair(p, c));
    }
    for (const auto& p : dense_eval_pairs(c).pairs) ASSERT_NO_THROW(validate_pair(p, c));
  }
}

TEST(DenseEvalPairs, CrossProductCount) {
  std::vector<corpus::PaperRecord> rs;
  for (int i = 0; i < 3; ++i) rs.push_back(record("pos" + std::to_string(i), Date(2025, 4, 1), 1));
  for (int i = 0; i < 4; ++i) rs.push_back(record("neg" + std::to_string(i), Date(2025, 4, 1), 0));
  const auto set = dense_eval_pairs(Corpus::from_records(rs));
  ASSERT_EQ(set.pairs.size(), 12u);
  EXPECT_EQ(set.provenance, Provenance::dense_eval);
  EXPECT_EQ(set.pairs.front().a_id, "pos0");
  EXPECT_EQ(set.pairs.front().b_id, "neg0");
  for (const auto& p : set.pairs) EXPECT_EQ(p.gold, Slot::A);
}

TEST(DenseEvalPairs, MatchesDoubleLoop) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(rng, 10 + rng.below(50));
    std::set<std::pair<std::string, std::string>> expect;
    for (const auto& pid : c.ordering()) {
      for (const auto& nid : c.ordering()) {
        const auto &p = c.at(pid), &n = c.at(nid);
        if (p.label == 1 && n.label == 0 && p.domain == n.domain) expect.emplace(pid, nid);
      }
    }
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& p : dense_eval_pairs(c).pairs) got.emplace(p.positive_id(), p.negative_id());
    ASSERT_EQ(got, expect) << "trial " << trial;
    ASSERT_EQ(dense_eval_pairs(c).pairs.size(), expect.size());
  }
}

TEST(ValidatePair, RejectsBrokenPairs) {
  const auto c = Corpus::from_records({record("pos", Date(2024, 1, 1), 1), record("neg", Date(2024, 1, 1), 0),
                                       record("neg2", Date(2024, 1, 1), 0), record("cv", Date(2024, 1, 1), 0, Domain::CV)});
  EXPECT_NO_THROW(validate_pair({"pos", "neg", Slot::A, Domain::ML}, c));
  EXPECT_NO_THROW(validate_pair({"neg", "pos", Slot::B, Domain::ML}, c));
  EXPECT_THROW(validate_pair({"pos", "neg", Slot::B, Domain::ML}, c), ValidationError);
  EXPECT_THROW(validate_pair({"neg", "neg2", Slot::A, Domain::ML}, c), ValidationError);
  EXPECT_THROW(validate_pair({"pos", "pos", Slot::A, Domain::ML}, c), ValidationError);
  EXPECT_THROW(validate_pair({"pos", "cv", Slot::A, Domain::ML}, c), ValidationError);
  EXPECT_THROW(validate_pair({"pos", "missing", Slot::A, Domain::ML}, c), Error);
}

TEST(PairFiles, RoundTrip) {
  Rng rng(7);
  const auto c = random_corpus(rng, 80);
  testsupport::TempDir dir("pairs");
  for (const auto& set : {sample_training_pairs(c, 5, 11), dense_eval_pairs(c)}) {
    write_pairs_file(set, dir.file("p.jsonl"));
    EXPECT_EQ(read_pairs_file(dir.file("p.jsonl")), set);
  }
}

TEST(PairFiles, MalformedRejected) {
  std::istringstream bad_header("not json\n");
  EXPECT_THROW(read_pairs(bad_header), ParseError);
  std::istringstream bad_count(R"({"provenance":"dense_eval","seed":null,"count":2})"
                               "\n"
                               R"({"a_id":"x","b_id":"y","gold":"A","domain":"ML"})"
                               "\n");
  EXPECT_THROW(read_pairs(bad_count), ParseError);
}
