#include <gtest/gtest.h>

#include <sstream>

#include "mdllex/corpus.hpp"
#include "mdllex/error.hpp"
#include "test_util.hpp"

namespace mdllex {
namespace {

TEST(Corpus, StripRemovesDelimitersAndRecordsWords) {
  CorpusOptions o;
  o.lowercase = true;
  const Corpus c = corpus_from_text("The dog, the cat.", o);
  EXPECT_EQ(to_string(c.bytes), "thedogthecat");
  ASSERT_EQ(c.true_spans.size(), 4u);
  EXPECT_EQ(c.true_spans[0], (Span{0, 3}));
  EXPECT_EQ(c.true_spans[1], (Span{3, 6}));
  EXPECT_EQ(c.true_spans[3], (Span{9, 12}));
}

TEST(Corpus, VerbatimKeepsEveryByte) {
  CorpusOptions o;
  o.mode = CorpusMode::kKeepVerbatim;
  const std::string text = "Hi there!\n\tSecond line.\r\n";
  const Corpus c = corpus_from_text(text, o);
  EXPECT_EQ(to_string(c.bytes), text);
  ASSERT_EQ(c.true_spans.size(), 4u);
  EXPECT_EQ(to_string(c.view(c.true_spans[2])), "Second");
}

TEST(Corpus, NewlinesSplitUtterances) {
  const Corpus c = corpus_from_text("ab cd\nef\n\ngh");
  const std::vector<Span> u = utterances(c);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(to_string(c.view(u[0])), "abcd");
  EXPECT_EQ(to_string(c.view(u[1])), "ef");
  EXPECT_EQ(to_string(c.view(u[2])), "gh");

  CorpusOptions one;
  one.split_utterances_on_newline = false;
  EXPECT_EQ(utterances(corpus_from_text("ab cd\nef", one)).size(), 1u);
}

TEST(Corpus, UtterancesPartitionTheBytes) {
  testing::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t n = testing::uniform(rng, 1, 60);
    for (std::size_t i = 0; i < n; ++i) text.push_back("ab \n."[testing::uniform(rng, 0, 4)]);
    if (text.find_first_of("ab") == std::string::npos) text += "a";
    for (CorpusMode mode : {CorpusMode::kStripDelimiters, CorpusMode::kKeepVerbatim}) {
      CorpusOptions o;
      o.mode = mode;
      const Corpus c = corpus_from_text(text, o);
      std::size_t at = 0;
      for (const Span& s : utterances(c)) {
        EXPECT_EQ(s.start, at);
        at = s.end;
      }
      EXPECT_EQ(at, c.size());
      EXPECT_TRUE(spans_valid(c.true_spans, c.size()));
    }
  }
}

TEST(Corpus, MaxBytesStopsAtAWordBoundary) {
  CorpusOptions o;
  o.max_bytes = 7;
  const Corpus c = corpus_from_text("alpha beta gamma", o);
  EXPECT_EQ(to_string(c.bytes), "alpha");
  ASSERT_EQ(c.true_spans.size(), 1u);
}

TEST(Corpus, EmptyInputIsAnError) {
  EXPECT_THROW(corpus_from_text(""), DataError);
  EXPECT_THROW(corpus_from_text(" ,.\n"), DataError);
  EXPECT_THROW(load_corpus("/nonexistent/file.txt"), DataError);
}

TEST(Corpus, TruthRoundTrip) {
  const std::vector<Span> spans{{0, 3}, {3, 7}, {9, 10}};
  std::stringstream s;
  write_truth(s, spans);
  EXPECT_EQ(read_truth(s), spans);

  std::istringstream bad("0\tx\n");
  EXPECT_THROW(read_truth(bad), DataError);

  Corpus c = corpus_from_text("abcdefghij");
  EXPECT_NO_THROW(attach_truth(c, spans));
  EXPECT_THROW(attach_truth(c, {{0, 3}, {2, 4}}), DataError);
  EXPECT_THROW(attach_truth(c, {{0, 11}}), DataError);
}

}  // namespace
}  // namespace mdllex
