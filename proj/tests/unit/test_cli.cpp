#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"

namespace mdllex {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mdllex_cli_" + std::to_string(std::random_device{}()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string sample() const {
    std::string text;
    const char* words[] = {"the", "cat", "sat", "on", "mat", "and", "dog", "ran", "to", "a"};
    std::mt19937 rng(3);
    for (int i = 0; i < 600; ++i) {
      text += words[rng() % 10];
      text += (i % 9 == 8) ? ".\n" : " ";
    }
    return text;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, InduceIsDeterministic) {
  write("in.txt", sample());
  ASSERT_EQ(run({"induce", "-i", path("in.txt"), "--iters", "3", "-o", path("a")}), 0) << err_.str();
  ASSERT_EQ(run({"induce", "-i", path("in.txt"), "--iters", "3", "-o", path("b"), "--threads", "4"}), 0);
  EXPECT_EQ(read("a/lexicon.bin"), read("b/lexicon.bin"));
  EXPECT_EQ(read("a/lexicon.txt"), read("b/lexicon.txt"));
  EXPECT_EQ(read("a/history.txt"), read("b/history.txt"));
  EXPECT_FALSE(read("a/lexicon.txt").empty());
}

TEST_F(Cli, ZeroIterationsEmitsTerminalsOnly) {
  write("in.txt", sample());
  ASSERT_EQ(run({"induce", "-i", path("in.txt"), "--iters", "0", "-o", path("m")}), 0) << err_.str();
  // Only single-byte words appear in the dump.
  std::istringstream dump(read("m/lexicon.txt"));
  for (std::string line; std::getline(dump, line);) {
    EXPECT_EQ(line.find("[["), std::string::npos) << line;
  }
}

TEST_F(Cli, SegmentAndEvaluate) {
  write("in.txt", sample());
  ASSERT_EQ(run({"induce", "-i", path("in.txt"), "--iters", "4", "-o", path("m")}), 0);
  ASSERT_EQ(run({"segment", "-i", path("in.txt"), "-l", path("m/lexicon.bin"), "-o", path("trees.txt"),
                 "--truth-out", path("truth.tsv")}),
            0)
      << err_.str();
  ASSERT_EQ(run({"eval", "-t", path("trees.txt"), "--truth", path("truth.tsv"), "--jsonl", path("r.jsonl")}), 0)
      << err_.str();
  EXPECT_NE(out_.str().find("recall"), std::string::npos);
  EXPECT_NE(read("r.jsonl").find("\"crossing_brackets\""), std::string::npos);
}

TEST_F(Cli, ThemoonCrossingExample) {
  write("trees.txt", "[[them][o][on]]\n");
  write("truth.tsv", "0\t3\n3\t7\n");
  ASSERT_EQ(run({"eval", "-t", path("trees.txt"), "--truth", path("truth.tsv"), "--jsonl", path("r.jsonl")}), 0)
      << err_.str();
  const std::string r = read("r.jsonl");
  EXPECT_NE(r.find("\"recall\":0.0"), std::string::npos) << r;
  EXPECT_NE(r.find("\"crossing_brackets\":50.0"), std::string::npos) << r;
}

TEST_F(Cli, EmptyTruthIsADataError) {
  write("trees.txt", "[[ab]]\n");
  write("truth.tsv", "");
  EXPECT_EQ(run({"eval", "-t", path("trees.txt"), "--truth", path("truth.tsv")}), cli::kExitData);
}

TEST_F(Cli, CompressRoundTrip) {
  write("in.txt", sample());
  ASSERT_EQ(run({"compress", "-i", path("in.txt"), "-o", path("c.mdlz"), "--iters", "3"}), 0) << err_.str();
  EXPECT_NE(out_.str().find("bits/char"), std::string::npos);
  ASSERT_EQ(run({"decompress", "-i", path("c.mdlz"), "-o", path("back.txt")}), 0) << err_.str();
  EXPECT_EQ(read("back.txt"), read("in.txt"));
}

TEST_F(Cli, CorruptFileIsADataError) {
  write("in.txt", sample());
  ASSERT_EQ(run({"compress", "-i", path("in.txt"), "-o", path("c.mdlz"), "--iters", "2"}), 0);
  std::string bytes = read("c.mdlz");
  write("cut.mdlz", bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(run({"decompress", "-i", path("cut.mdlz"), "-o", path("x")}), cli::kExitData);
  write("junk.mdlz", "hello");
  EXPECT_EQ(run({"decompress", "-i", path("junk.mdlz"), "-o", path("x")}), cli::kExitData);
  EXPECT_EQ(run({"decompress", "-i", path("missing"), "-o", path("x")}), cli::kExitData);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run({"induce"}), cli::kExitUsage);
  write("in.txt", "abc");
  EXPECT_EQ(run({"induce", "-i", path("in.txt"), "-o", path("m"), "--inner-em", "0"}), cli::kExitUsage);
  EXPECT_EQ(run({"synth", "-o", path("s.tsv")}), cli::kExitUsage);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, MeaningEndToEnd) {
  ASSERT_EQ(run({"synth", "--vocab", "30", "--count", "300", "--seed", "4", "--ambiguity", "3", "-o",
                 path("s.tsv")}),
            0)
      << err_.str();
  ASSERT_EQ(run({"synth", "--vocab", "30", "--count", "300", "--seed", "4", "--ambiguity", "3", "-o",
                 path("s2.tsv")}),
            0);
  EXPECT_EQ(read("s.tsv"), read("s2.tsv"));
  ASSERT_EQ(run({"meaning-train", "-i", path("s.tsv"), "-o", path("model"), "--text-iters", "3", "--joint-iters",
                 "2"}),
            0)
      << err_.str();
  ASSERT_EQ(run({"meaning-eval", "-i", path("s.tsv"), "-m", path("model"), "--jsonl", path("r.jsonl")}), 0)
      << err_.str();
  EXPECT_NE(read("r.jsonl").find("\"accuracy\""), std::string::npos);
}

TEST_F(Cli, RerunReproducesOutputs) {
  write("in.txt", sample());
  ASSERT_EQ(run({"--manifest", path("run.json"), "induce", "-i", path("in.txt"), "--iters", "2", "-o",
                 path("m")}),
            0)
      << err_.str();
  const std::string first = read("m/lexicon.bin");
  fs::remove_all(dir_ / "m");
  ASSERT_EQ(run({"rerun", path("run.json")}), 0) << err_.str();
  EXPECT_EQ(read("m/lexicon.bin"), first);

  write("in.txt", sample() + "changed");
  EXPECT_EQ(run({"rerun", path("run.json")}), cli::kExitData);
  EXPECT_EQ(run({"rerun", path("run.json"), "--no-verify"}), 0);
}

}  // namespace
}  // namespace mdllex
