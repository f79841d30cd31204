#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "noveltyrank/corpus.hpp"
#include "noveltyrank/error.hpp"

using namespace noveltyrank;
using namespace noveltyrank::corpus;
using testsupport::record;

namespace {

std::string line(const std::string& id, const std::string& date, int label, const std::string& domain = "ML") {
  return R"({"id":")" + id + R"(","title":"T )" + id + R"(","abstract":"A","domain":")" + domain +
         R"(","published":")" + date + R"(","label":)" + std::to_string(label) + R"(,"categories":["cs.LG"]})";
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return load_corpus(in);
}

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(LoadCorpus, ThreeValidLines) {
  const auto c = parse(line("p1", "2025-01-01", 0) + "\n" + line("p2", "2025-01-02", 1) + "\n" +
                       line("p3", "2025-01-03", 0) + "\n");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.at("p2").label, 1);
  EXPECT_EQ(c.at("p2").categories, std::vector<std::string>{"cs.LG"});
}

TEST(LoadCorpus, LabelTwoIsRejectedNamingRecord) {
  const auto msg = error_of([] { parse(line("bad-label", "2025-01-01", 2)); });
  EXPECT_NE(msg.find("bad-label"), std::string::npos) << msg;
  EXPECT_NE(msg.find("label"), std::string::npos) << msg;
}

TEST(LoadCorpus, MalformedLineNamesLineAndField) {
  const std::string text = line("p1", "2025-01-01", 0) + "\n" +
                           R"({"id":"p2","abstract":"A","domain":"ML","published":"2025-01-01","label":0,"categories":[]})";
  const auto msg = error_of([&] { parse(text); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("title"), std::string::npos) << msg;
  EXPECT_THROW(parse("{not json"), ParseError);
}

TEST(LoadCorpus, DuplicateIdNamed) {
  const auto msg = error_of([] { parse(line("dup", "2025-01-01", 0) + "\n" + line("dup", "2025-01-02", 1)); });
  EXPECT_NE(msg.find("dup"), std::string::npos) << msg;
}

TEST(LoadCorpus, InvalidDateNamesRecord) {
  const auto msg = error_of([] { parse(line("when", "2025-02-30", 0)); });
  EXPECT_NE(msg.find("when"), std::string::npos) << msg;
  EXPECT_NE(msg.find("published"), std::string::npos) << msg;
}

TEST(LoadCorpus, UnknownDomainRejected) {
  EXPECT_THROW(parse(line("p", "2025-01-01", 0, "Biology")), ParseError);
}

TEST(LoadCorpus, UnknownKeysAndAuthorsIgnored) {
  const auto c = parse(
      R"({"id":"p","title":"T","abstract":"A","domain":"CV","published":"2025-01-01","label":1,"categories":[],"authors":["X"],"venue":"V","extra":3})");
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.at("p").domain, Domain::CV);
}

TEST(LoadCorpus, BlankLinesSkipped) {
  EXPECT_EQ(parse("\n" + line("p1", "2025-01-01", 0) + "\n\n").size(), 1u);
}

TEST(CorpusOrdering, DateTiesBrokenById) {
  const auto c = Corpus::from_records({record("b", Date(2025, 1, 1), 0), record("a", Date(2025, 1, 1), 0),
                                       record("0", Date(2025, 1, 2), 0)});
  ASSERT_EQ(c.ordering().size(), 3u);
  EXPECT_EQ(c.ordering()[0], "a");
  EXPECT_EQ(c.ordering()[1], "b");
  EXPECT_EQ(c.ordering()[2], "0");
}

TEST(CorpusOrdering, EmptyIdAndTitleRejected) {
  EXPECT_THROW(Corpus::from_records({record("", Date(2025, 1, 1), 0)}), ValidationError);
  auto r = record("x", Date(2025, 1, 1), 0);
  r.title.clear();
  EXPECT_THROW(Corpus::from_records({r}), ValidationError);
}

TEST(CorpusRoundTrip, SerializeAndReloadIsIdentical) {
  auto bundle = testsupport::knn_corpus(200, 4, 5);
  auto records = bundle.corpus.ordered_records();
  std::vector<PaperRecord> copy;
  for (const auto* r : records) copy.push_back(*r);
  copy[0].categories = {};
  copy[1].title = "Quotes \" and unicode é and newline\n";
  const auto original = Corpus::from_records(copy);
  std::stringstream buf;
  write_corpus(original, buf);
  EXPECT_EQ(load_corpus(buf), original);
}

TEST(TemporalSplit, CutoffDayIsTraining) {
  const auto c = Corpus::from_records({record("first", Date(2025, 3, 15), 0), record("second", Date(2025, 3, 16), 1)});
  const auto s = temporal_split(c, kDefaultCutoff);
  ASSERT_EQ(s.train.size(), 1u);
  ASSERT_EQ(s.test.size(), 1u);
  EXPECT_TRUE(s.train.contains("first"));
  EXPECT_TRUE(s.test.contains("second"));
}

TEST(TemporalSplit, EmptyCorpus) {
  const auto s = temporal_split(Corpus{}, kDefaultCutoff);
  EXPECT_TRUE(s.train.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(TemporalSplit, CutoffBelowAllDatesPutsEverythingInTest) {
  const auto bundle = testsupport::knn_corpus(100, 4, 9);
  const auto s = temporal_split(bundle.corpus, Date(2023, 12, 31));
  EXPECT_EQ(s.test.size(), 100u);
  EXPECT_EQ(s.train.size(), 0u);
}

TEST(TemporalSplit, IsAPartitionForEveryCutoff) {
  const auto bundle = testsupport::knn_corpus(300, 4, 10);
  for (int serial = Date(2023, 12, 30).serial(); serial <= Date(2024, 5, 2).serial(); serial += 3) {
    const Date cutoff = Date::from_serial(serial);
    const auto s = temporal_split(bundle.corpus, cutoff);
    ASSERT_EQ(s.train.size() + s.test.size(), bundle.corpus.size());
    for (const auto& id : bundle.corpus.ordering()) {
      const bool in_train = s.train.contains(id), in_test = s.test.contains(id);
      ASSERT_NE(in_train, in_test) << id;
      ASSERT_EQ(in_train, bundle.corpus.at(id).published <= cutoff) << id;
    }
  }
}

TEST(TemporalSplit, TrainAfterIsExclusiveLowerBound) {
  const auto c = Corpus::from_records({record("old", Date(2023, 12, 31), 0), record("edge", Date(2024, 1, 1), 0),
                                       record("mid", Date(2024, 6, 1), 1), record("late", Date(2025, 4, 1), 1)});
  const auto s = temporal_split(c, kDefaultCutoff, Date(2023, 12, 31));
  EXPECT_FALSE(s.train.contains("old"));
  EXPECT_TRUE(s.train.contains("edge"));
  EXPECT_TRUE(s.train.contains("mid"));
  EXPECT_TRUE(s.test.contains("late"));
}

TEST(CorpusStats, PaperTestSplitShape) {
  std::vector<PaperRecord> recs;
  for (int i = 0; i < 10889; ++i) recs.push_back(record("t" + std::to_string(i), Date(2025, 4, 1), i < 1358 ? 1 : 0));
  const auto s = corpus_stats(Corpus::from_records(std::move(recs)));
  EXPECT_EQ(s.total, 10889u);
  EXPECT_EQ(s.positives, 1358u);
  EXPECT_NEAR(s.positive_ratio(), 0.125, 0.0005);
}

TEST(CorpusStats, AllNegative) {
  const auto s = corpus_stats(Corpus::from_records({record("a", Date(2025, 1, 1), 0), record("b", Date(2025, 1, 2), 0)}));
  EXPECT_EQ(s.positives, 0u);
  EXPECT_EQ(s.total, 2u);
  EXPECT_EQ(s.date_min, Date(2025, 1, 1));
  EXPECT_EQ(s.date_max, Date(2025, 1, 2));
}

TEST(CorpusStats, PerDomainCountsMatchBruteForceRecount) {
  const auto bundle = testsupport::knn_corpus(500, 4, 12);
  const auto s = corpus_stats(bundle.corpus);
  std::map<Domain, std::pair<std::size_t, std::size_t>> recount;
  for (const auto* r : bundle.corpus.ordered_records()) {
    (r->label == 1 ? recount[r->domain].first : recount[r->domain].second)++;
  }
  std::size_t sum = 0;
  for (const auto& [d, c] : s.per_domain) {
    EXPECT_EQ(c.positives, recount[d].first);
    EXPECT_EQ(c.negatives, recount[d].second);
    sum += c.total();
  }
  EXPECT_EQ(sum, s.total);
  EXPECT_GE(s.per_domain.size(), 6u);
}

TEST(Domain, NamesRoundTrip) {
  for (Domain d : kAllDomains) EXPECT_EQ(parse_domain(to_string(d)), d);
  EXPECT_FALSE(parse_domain("Physics").has_value());
}
