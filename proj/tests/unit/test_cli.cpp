#include <gtest/gtest.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "noveltyrank/fusion.hpp"
#include "pipeline.hpp"

using namespace noveltyrank;
using testsupport::read_file;
using testsupport::source_path;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run_captured(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

const std::string kCorpus = source_path("data/synthetic/corpus.jsonl");
const std::string kEmbeddings = source_path("data/synthetic/embeddings");

}  // namespace

TEST(Cli, PipelineClosureOnBundledCorpus) {
  testsupport::TempDir work("pipeline");
  const auto r = testsupport::run_pipeline(kCorpus, kEmbeddings, work, 100);
  for (const auto& [name, code] : r.steps) EXPECT_EQ(code, 0) << name;
  EXPECT_TRUE(r.green()) << r.failure;
  EXPECT_EQ(r.compares, 100u);
  EXPECT_EQ(r.compare_violations, 0u);
  EXPECT_GE(r.rank_agreement, 0.95);
  EXPECT_GT(r.classify_f1, 0.5);
  const auto audit = read_file(work.file("domains.jsonl"));
  EXPECT_NE(audit.find("\"train_share\""), std::string::npos);
}

TEST(Cli, SameSeedPairsAreByteIdentical) {
  testsupport::TempDir work("pairs");
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    ASSERT_EQ(run_captured({"pairs", "--corpus", kCorpus, "--seed", "3", "--out", work.file(name)}).code, 0);
  }
  ASSERT_EQ(run_captured({"pairs", "--corpus", kCorpus, "--seed", "4", "--out", work.file("c.jsonl")}).code, 0);
  EXPECT_EQ(read_file(work.file("a.jsonl")), read_file(work.file("b.jsonl")));
  EXPECT_NE(read_file(work.file("a.jsonl")), read_file(work.file("c.jsonl")));
}

TEST(Cli, PrintsSeedAndConfigDigest) {
  const auto a = run_captured({"ingest", "--corpus", kCorpus, "--seed", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out.rfind("seed=5 config_digest=", 0), 0u) << a.out;
  const auto b = run_captured({"ingest", "--corpus", kCorpus, "--seed", "5"});
  const auto c = run_captured({"ingest", "--corpus", kCorpus, "--seed", "6"});
  const auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  EXPECT_EQ(first_line(a.out), first_line(b.out));
  EXPECT_NE(first_line(a.out).substr(7), first_line(c.out).substr(7));
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_captured({"ingest", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run_captured({}).code, 2);
  EXPECT_EQ(run_captured({"frobnicate"}).code, 2);
  EXPECT_EQ(run_captured({"train", "--features", "x"}).code, 2);
  EXPECT_EQ(run_captured({"ingest"}).code, 2);
  EXPECT_EQ(run_captured({"index", "--corpus", kCorpus, "--embeddings", kEmbeddings, "--channel", "classification",
                          "--out", "/tmp/x"})
                .code,
            2);
}

TEST(Cli, OperationalErrorsExitOne) {
  const auto r = run_captured({"ingest", "--corpus", "/nonexistent/corpus.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/nonexistent/corpus.jsonl"), std::string::npos) << r.err;
  const auto j = run_captured({"--json-errors", "ingest", "--corpus", "/nonexistent/corpus.jsonl"});
  EXPECT_EQ(j.code, 1);
  const auto body = nlohmann::json::parse(j.err.substr(0, j.err.find('\n')));
  EXPECT_EQ(body["error"]["code"], "not_found");
}

TEST(Cli, ConfigFileAndEnvironment) {
  testsupport::TempDir work("config");
  {
    std::ofstream cfg(work.file("run.toml"));
    cfg << "[pairs]\ncorpus = \"" << kCorpus << "\"\nseed = 3\nout = \"" << work.file("from_config.jsonl") << "\"\n";
  }
  ASSERT_EQ(run_captured({"--config", work.file("run.toml"), "pairs"}).code, 0);
  ASSERT_EQ(run_captured({"pairs", "--corpus", kCorpus, "--seed", "3", "--out", work.file("from_flags.jsonl")}).code, 0);
  EXPECT_EQ(read_file(work.file("from_config.jsonl")), read_file(work.file("from_flags.jsonl")));

  ::setenv("NOVELTYRANK_PAIRS_SEED", "4", 1);
  const auto env = run_captured({"--config", work.file("run.toml"), "pairs", "--out", work.file("from_env.jsonl")});
  const auto flag = run_captured({"--config", work.file("run.toml"), "pairs", "--seed", "3", "--out", work.file("flag_wins.jsonl")});
  ::unsetenv("NOVELTYRANK_PAIRS_SEED");
  ASSERT_EQ(env.code, 0);
  EXPECT_EQ(env.out.rfind("seed=4 ", 0), 0u) << env.out;
  EXPECT_EQ(flag.out.rfind("seed=3 ", 0), 0u) << flag.out;
  EXPECT_EQ(read_file(work.file("flag_wins.jsonl")), read_file(work.file("from_flags.jsonl")));
}

TEST(Cli, EvalRejectsForeignRecipe) {
  testsupport::TempDir work("recipe");
  const auto f = [&](const std::string& n) { return work.file(n); };
  ASSERT_EQ(run_captured({"featurize", "--corpus", kCorpus, "--embeddings", kEmbeddings, "--out", f("features")}).code, 0);
  ASSERT_EQ(run_captured({"pairs", "--corpus", kCorpus, "--out", f("pairs.jsonl")}).code, 0);
  ASSERT_EQ(run_captured({"train", "--task", "rank", "--corpus", kCorpus, "--features", f("features"), "--pairs",
                          f("pairs.jsonl"), "--epochs", "1", "--checkpoint", f("rank.nvrm")})
                .code,
            0);
  nlohmann::json other;
  fusion::to_json(other, fusion::FusionRecipe({{fusion::FeaturePart::max_sim, 1}, {fusion::FeaturePart::avg_sim, 1}}));
  std::ofstream(f("features/recipe.json")) << other.dump();
  const auto r = run_captured({"--json-errors", "eval", "--corpus", kCorpus, "--features", f("features"), "--checkpoint",
                               f("rank.nvrm")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.err.substr(0, r.err.find('\n')))["error"]["code"], "recipe_mismatch") << r.err;
}
