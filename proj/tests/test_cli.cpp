#include <gtest/gtest.h>

#include <unistd.h>

#include <fstream>

#include "cli_harness.hpp"
#include "distill/cli.hpp"
#include "distill/embedding_file.hpp"
#include "distill/formats.hpp"

using namespace clitest;

class Cli : public ::testing::Test {
 protected:
  ScratchDir dir{"cli"};

  void SetUp() override {
    ASSERT_EQ(run({"gen", "--classes", "4", "--per-class", "25", "--dim", "8", "--test-per-class", "10",
                   "--seed", "3", "--out", dir / "pool.emb"}),
              distill::kExitOk);
  }
};

TEST_F(Cli, GenWritesPoolTestAndManifest) {
  const auto pool = distill::read_embeddings(dir / "pool.emb");
  const auto test = distill::read_embeddings(dir / "pool.test.emb");
  EXPECT_EQ(pool.size(), 100u);
  EXPECT_EQ(test.size(), 40u);
  const auto m = distill::read_manifest(dir / "pool.manifest.json");
  EXPECT_EQ(m.class_names.size(), 4u);
  EXPECT_NO_THROW(distill::check_manifest(m, pool));
}

TEST_F(Cli, GenFromSpecFile) {
  std::ofstream(dir / "spec.json") << R"({"classes": 2, "per_class": 5, "dim": 3, "modes_per_class": 1, "seed": 4})";
  ASSERT_EQ(run({"gen", "--spec", dir / "spec.json", "--per-class", "6", "--out", dir / "s.emb"}), 0);
  const auto s = distill::read_embeddings(dir / "s.emb");
  EXPECT_EQ(s.size(), 12u);
  EXPECT_EQ(s.dim, 3u);
  std::ofstream(dir / "bad.json") << "{";
  EXPECT_EQ(run({"gen", "--spec", dir / "bad.json", "--out", dir / "x.emb"}), distill::kExitConfig);
  EXPECT_EQ(run({"gen", "--modes", "500", "--out", dir / "x.emb"}), distill::kExitConfig);
}

TEST_F(Cli, SelectProducesReadableSelection) {
  ASSERT_EQ(run({"select", "--data", dir / "pool.emb", "--method", "tacdt", "--vpc", "3", "--seed", "1",
                 "--manifest", dir / "pool.manifest.json", "--out", dir / "sel.json"}),
            0);
  const auto r = distill::parse_selection(slurp(dir / "sel.json"));
  EXPECT_EQ(r.total_selected(), 12u);
}

TEST_F(Cli, ScoreMethodWithoutScoresFailsBeforeReadingData) {
  EXPECT_EQ(run({"select", "--data", dir / "does-not-exist.emb", "--method", "top_score", "--vpc", "3", "--seed",
                 "1", "--out", dir / "sel.json"}),
            distill::kExitConfig);
}

TEST_F(Cli, ScoresDriveTopScore) {
  std::ofstream(dir / "scores.tsv") << "0\t5\n30\t4\n";
  ASSERT_EQ(run({"select", "--data", dir / "pool.emb", "--method", "knapsack", "--vpc", "1", "--seed", "0",
                 "--scores", dir / "scores.tsv", "--out", dir / "sel.json"}),
            0);
  const auto r = distill::parse_selection(slurp(dir / "sel.json"));
  EXPECT_EQ(r.per_class.at(0), (std::vector<std::size_t>{0}));
  EXPECT_EQ(r.per_class.at(1), (std::vector<std::size_t>{30}));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({}), distill::kExitConfig);
  EXPECT_EQ(run({"bogus"}), distill::kExitConfig);
  EXPECT_EQ(run({"select", "--data", dir / "pool.emb", "--method", "nope", "--vpc", "1", "--seed", "0", "--out",
                 dir / "o"}),
            distill::kExitConfig);
  EXPECT_EQ(run({"select", "--data", dir / "pool.emb", "--method", "random", "--vpc", "1", "--seed", "0",
                 "--unknown-flag", "--out", dir / "o"}),
            distill::kExitConfig);
  EXPECT_EQ(run({"select", "--data", dir / "missing.emb", "--method", "random", "--vpc", "1", "--seed", "0",
                 "--out", dir / "o"}),
            distill::kExitData);
  std::ofstream(dir / "junk.emb") << "not an embedding file";
  EXPECT_EQ(run({"select", "--data", dir / "junk.emb", "--method", "random", "--vpc", "1", "--seed", "0", "--out",
                 dir / "o"}),
            distill::kExitData);
  std::ofstream(dir / "wrong.json") << R"({"class_names": ["a"], "source": "", "created": "", "seed_lineage": []})";
  EXPECT_EQ(run({"select", "--data", dir / "pool.emb", "--method", "random", "--vpc", "1", "--seed", "0",
                 "--manifest", dir / "wrong.json", "--out", dir / "o"}),
            distill::kExitData);
  EXPECT_EQ(run({"report", "--in", dir / "missing.json"}), distill::kExitData);
  EXPECT_EQ(run({"--help"}), distill::kExitOk);
}

TEST_F(Cli, EvalAndReport) {
  ASSERT_EQ(run({"eval", "--data", dir / "pool.emb", "--test", dir / "pool.test.emb", "--method", "random", "--vpc",
                 "2", "--seed", "0", "--out", dir / "rep.json", "--csv", dir / "rep.csv"}),
            0);
  const auto rep = distill::parse_report(slurp(dir / "rep.json"));
  EXPECT_EQ(rep.runs, 5u);
  EXPECT_GT(rep.acc.std, 0.0);
  ASSERT_EQ(run({"report", "--in", dir / "rep.json", "--csv", dir / "again.csv"}), 0);
  EXPECT_EQ(slurp(dir / "rep.csv"), slurp(dir / "again.csv"));
  EXPECT_EQ(run({"eval", "--data", dir / "pool.emb", "--test", dir / "pool.test.emb", "--method", "random",
                 "--vpc", "2", "--runs", "0", "--seed", "0", "--out", dir / "r0.json"}),
            distill::kExitConfig);
}

TEST_F(Cli, InputsAreNotModified) {
  const auto before = slurp(dir / "pool.emb");
  ASSERT_EQ(run({"eval", "--data", dir / "pool.emb", "--test", dir / "pool.test.emb", "--method", "kmeans_mmd",
                 "--vpc", "2", "--runs", "2", "--seed", "0", "--out", dir / "rep.json"}),
            0);
  EXPECT_EQ(slurp(dir / "pool.emb"), before);
}
