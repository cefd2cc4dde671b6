#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "mdllex/error.hpp"
#include "mdllex/metrics.hpp"
#include "mdllex/search.hpp"
#include "test_util.hpp"

namespace mdllex {
namespace {

std::vector<SegmentationTree> trees_of(const std::string& text, Bytes* bytes = nullptr) {
  std::istringstream in(text);
  return read_trees(in, bytes);
}

void collect(const TreeNode& n, std::vector<Span>& out) {
  out.push_back(n.span);
  for (const TreeNode& c : n.children) collect(c, out);
}

std::vector<Span> all_spans(const SegmentationTree& t) {
  std::vector<Span> out;
  for (const TreeNode& n : t.tokens) collect(n, out);
  return out;
}

// Random tree over [start, end): either a leaf or a split into 2-3 parts.
TreeNode random_node(testing::Rng& rng, std::size_t start, std::size_t end) {
  TreeNode n;
  n.span = {start, end};
  if (end - start == 1) return n;
  std::size_t parts = std::min<std::size_t>(end - start, testing::uniform(rng, 2, 3));
  std::set<std::size_t> cuts;
  while (cuts.size() < parts - 1) cuts.insert(testing::uniform(rng, start + 1, end - 1));
  std::size_t at = start;
  cuts.insert(end);
  for (std::size_t c : cuts) {
    n.children.push_back(random_node(rng, at, c));
    at = c;
  }
  return n;
}

SegmentationTree random_tree(testing::Rng& rng, std::size_t start, std::size_t length) {
  SegmentationTree t;
  t.span = {start, start + length};
  std::size_t at = start;
  while (at < start + length) {
    const std::size_t len = testing::uniform(rng, 1, start + length - at);
    t.tokens.push_back(random_node(rng, at, at + len));
    at += len;
  }
  return t;
}

std::vector<Span> random_truth(testing::Rng& rng, std::size_t start, std::size_t length) {
  std::vector<Span> out;
  std::size_t at = start;
  while (at < start + length) {
    const std::size_t len = testing::uniform(rng, 1, std::min<std::size_t>(5, start + length - at));
    out.push_back({at, at + len});
    at += len;
  }
  return out;
}

TEST(Metrics, PerfectTreeScoresFullRecall) {
  const auto trees = trees_of("[[the][dog]]\n");
  const std::vector<Span> truth{{0, 3}, {3, 6}};
  EXPECT_DOUBLE_EQ(recall(trees, truth), 100.0);
  EXPECT_DOUBLE_EQ(crossing_brackets(trees, truth), 0.0);
}

TEST(Metrics, MisalignedTreeScoresZero) {
  const auto trees = trees_of("[[th][ed][og]]\n");
  const std::vector<Span> truth{{0, 3}, {3, 6}};
  EXPECT_DOUBLE_EQ(recall(trees, truth), 0.0);
  EXPECT_DOUBLE_EQ(crossing_brackets(trees, truth), 100.0);
}

TEST(Metrics, ThemoonMissesBothWordsAndCrossesMoon) {
  const auto trees = trees_of("[[them][o][on]]\n");
  const std::vector<Span> truth{{0, 3}, {3, 7}};
  EXPECT_DOUBLE_EQ(recall(trees, truth), 0.0);
  const std::vector<Span> moon{{3, 7}};
  EXPECT_DOUBLE_EQ(crossing_brackets(trees, moon), 100.0);
  EXPECT_TRUE(crosses({0, 4}, {3, 7}));
  EXPECT_FALSE(crosses({3, 7}, {3, 7}));
  EXPECT_FALSE(crosses({3, 5}, {3, 7}));
}

TEST(Metrics, LeavesCountAsNodes) {
  const auto trees = trees_of("[[a][bc]]\n");
  const std::vector<Span> truth{{0, 1}, {1, 3}};
  EXPECT_DOUBLE_EQ(recall(trees, truth), 100.0);
}

TEST(Metrics, EmptyTruthIsAnError) {
  const auto trees = trees_of("[[ab]]\n");
  EXPECT_THROW(recall(trees, std::vector<Span>{}), ContractError);
  EXPECT_THROW(crossing_brackets(trees, std::vector<Span>{}), ContractError);
}

TEST(Metrics, SingleLeafHasOneNode) {
  const auto trees = trees_of("[[a]]\n");
  ASSERT_EQ(trees.size(), 1u);
  EXPECT_EQ(node_count(trees[0]), 1u);
}

TEST(Metrics, RandomTreesAgreeWithBruteForce) {
  testing::Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = testing::uniform(rng, 1, 30);
    const SegmentationTree t = random_tree(rng, 0, n);
    const std::vector<Span> truth = random_truth(rng, 0, n);
    const std::vector<Span> spans = all_spans(t);
    std::size_t hit = 0, crossed = 0;
    for (const Span& s : truth) {
      const bool matched = std::find(spans.begin(), spans.end(), s) != spans.end();
      bool cross = false;
      for (const Span& x : spans) {
        cross |= (x.start < s.start && s.start < x.end && x.end < s.end) ||
                 (s.start < x.start && x.start < s.end && s.end < x.end);
      }
      ASSERT_FALSE(matched && cross);
      hit += matched;
      crossed += cross;
    }
    const double total = static_cast<double>(truth.size());
    ASSERT_NEAR(recall(t, truth), 100.0 * hit / total, 1e-9);
    ASSERT_NEAR(crossing_brackets(t, truth), 100.0 * crossed / total, 1e-9);

    // Unique internal spans plus top-level tokens, at most 2n - 1.
    std::set<std::pair<std::size_t, std::size_t>> nodes;
    std::function<void(const TreeNode&, bool)> walk = [&](const TreeNode& node, bool top) {
      if (top || !node.children.empty()) nodes.insert({node.span.start, node.span.end});
      for (const TreeNode& c : node.children) walk(c, false);
    };
    for (const TreeNode& tok : t.tokens) walk(tok, true);
    ASSERT_EQ(node_count(t), nodes.size());
    ASSERT_LE(node_count(t), 2 * n - 1);

    const std::vector<SegmentationTree> one{t};
    const SegReport r = evaluate(one, Bytes(n, 'x'), truth);
    ASSERT_EQ(r.matched, hit);
    ASSERT_EQ(r.crossed, crossed);
    ASSERT_LE(r.matched + r.crossed, r.true_word_count);
    ASSERT_GE(r.recall, 0.0);
    ASSERT_LE(r.crossing_brackets, 100.0);
  }
}

TEST(Metrics, UtteranceOrderDoesNotMatter) {
  testing::Rng rng(5);
  std::vector<SegmentationTree> trees;
  std::vector<Span> truth;
  std::size_t at = 0;
  for (int u = 0; u < 20; ++u) {
    const std::size_t n = testing::uniform(rng, 1, 12);
    trees.push_back(random_tree(rng, at, n));
    const auto t = random_truth(rng, at, n);
    truth.insert(truth.end(), t.begin(), t.end());
    at += n;
  }
  const double r = recall(trees, truth), x = crossing_brackets(trees, truth);
  std::reverse(trees.begin(), trees.end());
  std::shuffle(truth.begin(), truth.end(), rng);
  EXPECT_DOUBLE_EQ(recall(trees, truth), r);
  EXPECT_DOUBLE_EQ(crossing_brackets(trees, truth), x);
}

TEST(Metrics, TypeRecallCountsDistinctWords) {
  // "ab" found once of twice; "c" found.
  Bytes text;
  const auto trees = trees_of("[[ab][c]]\n[[a][b][c]]\n", &text);
  EXPECT_EQ(to_string(text), "abcabc");
  const std::vector<Span> truth{{0, 2}, {2, 3}, {3, 5}, {5, 6}};
  const SegReport r = evaluate(trees, text, truth);
  EXPECT_DOUBLE_EQ(r.recall, 75.0);
  EXPECT_DOUBLE_EQ(r.type_recall, 100.0);
}

TEST(Metrics, TreeTextRoundTrips) {
  const Corpus c = corpus_from_text("the cat sat on the mat\nthe dog sat\nthe cat ran [x]\n");
  SearchConfig cfg;
  cfg.outer_iterations = 3;
  const Lexicon lex = run_induction(c, cfg).lexicon;
  const std::vector<SegmentationTree> trees = segment_corpus(lex, c);
  std::stringstream s;
  write_trees(s, lex, trees);
  Bytes text;
  const std::vector<SegmentationTree> back = read_trees(s, &text);
  EXPECT_EQ(text, c.bytes);
  ASSERT_EQ(back.size(), trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    EXPECT_EQ(node_spans(back[i]), node_spans(trees[i]));
    EXPECT_EQ(node_count(back[i]), node_count(trees[i]));
  }
  std::stringstream again;
  write_trees(again, lex, trees);
  EXPECT_EQ(again.str(), s.str());
}

TEST(Metrics, MalformedTreeTextIsRejected) {
  for (const char* bad : {"[[ab]\n", "ab\n", "[[a]]]\n", "[\\q]\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_trees(in), DataError) << bad;
  }
}

}  // namespace
}  // namespace mdllex
