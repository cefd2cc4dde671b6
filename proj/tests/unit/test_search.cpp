#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>

#include "mdllex/error.hpp"
#include "mdllex/search.hpp"
#include "test_util.hpp"

namespace mdllex {
namespace {

using testing::ids_of;

// Total idealized DL of a count vector: sum c log2(N / c).
double total_bits(const std::vector<double>& counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  double bits = 0.0;
  for (double c : counts) {
    if (c > 0) bits += c * std::log2(n / c);
  }
  return bits;
}

// DL after running EM to a fixed point (a few passes) from the lexicon's
// current probabilities.
double settled_dl(Lexicon& lex, const Corpus& corpus, int passes = 3) {
  SearchConfig cfg;
  CorpusParse p;
  for (int i = 0; i < passes; ++i) p = em_step(lex, corpus, cfg);
  return description_length(lex, p.counts);
}

CountTable counts_of(Lexicon& lex, const Corpus& corpus) {
  SearchConfig cfg;
  return em_step(lex, corpus, cfg).counts;
}

std::string repeat(const std::string& s, int k) {
  std::string out;
  for (int i = 0; i < k; ++i) out += s;
  return out;
}

TEST(Search, DeltaAddMatchesWholeCountRecomputation) {
  testing::Rng rng(31);
  SearchConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const Corpus c = corpus_from_text(testing::random_text(rng, testing::uniform(rng, 20, 200), 3));
    Lexicon lex = testing::random_lexicon(rng, testing::uniform(rng, 0, 8), 3, 4);
    const CountTable counts = counts_of(lex, c);
    for (const WordPair& pair : propose_candidates(lex, counts, cfg)) {
      const double cw = counts.pair_count(pair);
      std::vector<double> after = counts.word_counts;
      after.resize(lex.id_bound(), 0.0);
      after[pair.first] -= cw - 1;
      after[pair.second] -= cw - 1;
      after.push_back(cw);
      std::vector<double> before = counts.word_counts;
      const DeltaEstimate est = delta_add(lex, counts, pair, cfg);
      if (after[pair.first] < 0 || after[pair.second] < 0) continue;
      ASSERT_NEAR(est.delta_bits, total_bits(after) - total_bits(before), 1e-6);
    }
  }
}

TEST(Search, DeltaAddSignFollowsExactDlOnRepeatedPair) {
  SearchConfig cfg;
  for (int k = 1; k <= 20; ++k) {
    const Corpus c = corpus_from_text(repeat("ab", k));
    Lexicon lex;
    const CountTable counts = counts_of(lex, c);
    const double before = settled_dl(lex, c);
    const WordPair pair{terminal_id('a'), terminal_id('b')};
    const DeltaEstimate est = delta_add(lex, counts, pair, cfg);

    Lexicon grown = lex;
    const WordId parts[2] = {pair.first, pair.second};
    const WordId ab = grown.add_word(parts);
    std::vector<double> seed(grown.id_bound(), 0.0);
    for (const auto& [w, cnt] : est.predicted_counts) seed[w] = cnt;
    seed[ab] = counts.pair_count(pair);
    grown.reestimate(seed);
    const double after = settled_dl(grown, c);

    EXPECT_NEAR(est.delta_bits, after - before, 1e-6) << "k=" << k;
    EXPECT_EQ(est.delta_bits < 0, k >= 4) << "k=" << k;
  }
}

TEST(Search, OnceUsedPairNeverPays) {
  testing::Rng rng(5);
  SearchConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    CountTable t;
    const WordId a = 1 + static_cast<WordId>(testing::uniform(rng, 0, 5));
    const WordId b = 10 + static_cast<WordId>(testing::uniform(rng, 0, 5));
    for (WordId w = 0; w < 20; ++w) t.add_word(w, static_cast<double>(testing::uniform(rng, 1, 40)));
    t.pair_counts[WordPair{a, b}.key()] = 1.0;
    EXPECT_GT(delta_add(Lexicon(), t, {a, b}, cfg).delta_bits, 0.0);
  }
}

TEST(Search, AddThenDeleteRestoresTheTotal) {
  SearchConfig cfg;
  const Corpus c = corpus_from_text(repeat("abc", 9) + "ba");
  Lexicon lex;
  const CountTable counts = counts_of(lex, c);
  const WordPair pair{terminal_id('a'), terminal_id('b')};
  const DeltaEstimate add = delta_add(lex, counts, pair, cfg);

  Lexicon grown = lex;
  const WordId parts[2] = {pair.first, pair.second};
  const WordId ab = grown.add_word(parts);
  CountTable next;
  next.word_counts = counts.word_counts;
  next.word_counts.resize(grown.id_bound(), 0.0);
  for (const auto& [w, cnt] : add.predicted_counts) next.word_counts[w] = cnt;
  next.word_counts[ab] = counts.pair_count(pair);
  next.total = add.predicted_total;
  const DeltaEstimate del = delta_delete(grown, next, ab, cfg);
  EXPECT_NEAR(add.delta_bits + del.delta_bits, 0.0, 1e-6);
}

TEST(Search, DeletingAnUnusedWordAlwaysHelps) {
  testing::Rng rng(6);
  SearchConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    Lexicon lex = testing::random_lexicon(rng, 10, 4, 6);
    testing::random_counts(rng, lex, 1.0, 30.0);
    CountTable t;
    t.word_counts.assign(lex.id_bound(), 0.0);
    for (std::size_t i = 0; i < t.word_counts.size(); ++i) {
      if (lex.contains(static_cast<WordId>(i))) t.word_counts[i] = lex.word(static_cast<WordId>(i)).count;
    }
    const std::vector<WordId> ids = lex.nonterminals();
    const WordId victim = ids[testing::uniform(rng, 0, ids.size() - 1)];
    t.word_counts[victim] = 0.0;
    for (double x : t.word_counts) t.total += x;
    EXPECT_LT(delta_delete(lex, t, victim, cfg).delta_bits, 0.0);
  }
}

TEST(Search, FrequentWordIsWorthKeeping) {
  SearchConfig cfg;
  const Corpus c = corpus_from_text(repeat("the", 10) + "dog");
  Lexicon lex;
  const WordId th = lex.add_word(ids_of(lex, {"t", "h"}));
  const WordId the = lex.add_word(std::vector<WordId>{th, terminal_id('e')});
  (void)the;
  std::vector<double> seed(lex.id_bound(), 1.0);
  lex.reestimate(seed);
  const CountTable counts = counts_of(lex, c);
  const WordId the_id = *lex.find(to_bytes("the"));
  ASSERT_EQ(counts.count(the_id), 10.0);
  const DeltaEstimate est = delta_delete(lex, counts, the_id, cfg);
  EXPECT_GT(est.delta_bits, 0.0);

  // Oracle: the same corpus without the word.
  Lexicon without = lex;
  const double before = settled_dl(lex, c);
  without.delete_word(the_id);
  std::vector<double> seed2(without.id_bound(), 0.0);
  for (const auto& [w, cnt] : est.predicted_counts) seed2[w] = cnt;
  for (std::size_t i = 0; i < seed2.size(); ++i) {
    if (without.contains(static_cast<WordId>(i)) && seed2[i] == 0.0) seed2[i] = counts.count(static_cast<WordId>(i));
  }
  without.reestimate(seed2);
  EXPECT_GT(settled_dl(without, c), before);
}

TEST(Search, DefinitionOnlyWordDeleteIsSpliceArithmetic) {
  // "xyz" is used only inside "xyzw"; deleting it moves one pointer from
  // the definition to its components.
  SearchConfig cfg;
  Lexicon lex;
  const WordId xy = lex.add_word(ids_of(lex, {"x", "y"}));
  const WordId xyz = lex.add_word(std::vector<WordId>{xy, terminal_id('z')});
  const WordId xyzw = lex.add_word(std::vector<WordId>{xyz, terminal_id('w')});
  (void)xyzw;
  CountTable t;
  t.word_counts.assign(lex.id_bound(), 0.0);
  t.word_counts[xy] = 4;
  t.word_counts[xyz] = 1;
  t.word_counts[xyzw] = 5;
  t.word_counts[terminal_id('x')] = 1;
  t.word_counts[terminal_id('y')] = 1;
  t.word_counts[terminal_id('z')] = 1;
  t.word_counts[terminal_id('w')] = 3;
  for (double x : t.word_counts) t.total += x;

  std::vector<double> after = t.word_counts;
  after[xyz] = 0;  // xy and z keep their counts: (1 - 1) * 1 extra each
  const DeltaEstimate est = delta_delete(lex, t, xyz, cfg);
  EXPECT_NEAR(est.delta_bits, total_bits(after) - total_bits(t.word_counts), 1e-9);
  EXPECT_DOUBLE_EQ(est.predicted_total, t.total - 1);
}

TEST(Search, TotalDlNeverRisesAcrossIterations) {
  testing::Rng rng(12);
  for (int trial = 0; trial < 8; ++trial) {
    std::string text;
    const std::vector<std::string> vocab{"the", "cat", "sat", "on", "mat", "dog", "ran", "a"};
    for (int i = 0; i < 400; ++i) text += vocab[testing::uniform(rng, 0, vocab.size() - 1)] + " ";
    SearchConfig cfg;
    cfg.outer_iterations = 6;
    const InductionResult r = run_induction(corpus_from_text(text), cfg);
    double prev = r.history.front().total_dl_bits;
    for (const PhaseRecord& rec : r.history) {
      if (rec.phase != "delete") continue;
      EXPECT_LE(rec.total_dl_bits, prev * 1.005);
      prev = rec.total_dl_bits;
    }
    EXPECT_LT(r.history.back().total_dl_bits, 0.75 * r.history.front().total_dl_bits);
  }
}

TEST(Search, RepeatedByteCostsNothingWithoutAFloor) {
  // One symbol with p = 1 is free, so no word can pay for itself.
  SearchConfig cfg;
  const InductionResult r = run_induction(corpus_from_text(std::string(256, 'a')), cfg);
  EXPECT_EQ(r.lexicon.nonterminal_count(), 0u);
  EXPECT_EQ(r.history.back().total_dl_bits, 0.0);
}

TEST(Search, RepeatedByteGrowsSublinearlyUnderAOneBitFloor) {
  SearchConfig cfg;
  cfg.parser.min_codelength_bits = 1.0;
  std::vector<double> bits;
  for (std::size_t n : {256u, 4096u}) {
    const InductionResult r = run_induction(corpus_from_text(std::string(n, 'a')), cfg);
    EXPECT_GT(r.lexicon.nonterminal_count(), 0u);
    bits.push_back(r.history.back().total_dl_bits);
    EXPECT_LT(bits.back(), 0.25 * static_cast<double>(n));
  }
  EXPECT_LT(bits[1] / bits[0], 4.0);
}

TEST(Search, FlooredDeltaMatchesWholeCountRecomputation) {
  testing::Rng rng(32);
  SearchConfig cfg;
  cfg.parser.min_codelength_bits = 1.0;
  auto floored = [](const std::vector<double>& counts) {
    double n = 0.0;
    for (double c : counts) n += c;
    double bits = 0.0;
    for (double c : counts) {
      if (c > 0) bits += c * std::max(1.0, std::log2(n / c));
    }
    return bits;
  };
  for (int trial = 0; trial < 100; ++trial) {
    // Skewed text so that some word has p > 1/2.
    std::string text;
    for (std::size_t i = 0, n = testing::uniform(rng, 20, 200); i < n; ++i) {
      text.push_back(testing::uniform(rng, 0, 5) ? 'a' : static_cast<char>('b' + testing::uniform(rng, 0, 1)));
    }
    Lexicon lex;
    const CountTable counts = counts_of(lex, corpus_from_text(text));
    for (const WordPair& pair : propose_candidates(lex, counts, cfg)) {
      const double cw = counts.pair_count(pair);
      std::vector<double> after = counts.word_counts;
      after.resize(lex.id_bound(), 0.0);
      after[pair.first] -= cw - 1;
      after[pair.second] -= cw - 1;
      if (after[pair.first] < 0 || after[pair.second] < 0) continue;
      after.push_back(cw);
      ASSERT_NEAR(delta_add(lex, counts, pair, cfg).delta_bits, floored(after) - floored(counts.word_counts), 1e-6);
    }
  }
}

TEST(Search, AlternatingPairBecomesAWord) {
  SearchConfig cfg;
  cfg.outer_iterations = 4;
  const InductionResult r = run_induction(corpus_from_text(repeat("ab", 40)), cfg);
  EXPECT_TRUE(r.lexicon.find(to_bytes("ab")).has_value());
}

TEST(Search, TinyCorpusAddsNothing) {
  SearchConfig cfg;
  for (const char* s : {"a", "ab", "aa"}) {
    const InductionResult r = run_induction(corpus_from_text(s), cfg);
    EXPECT_EQ(r.lexicon.nonterminal_count(), 0u) << s;
  }
}

TEST(Search, ZeroIterationsKeepsTerminals) {
  SearchConfig cfg;
  cfg.outer_iterations = 0;
  const InductionResult r = run_induction(corpus_from_text("hello hello hello"), cfg);
  EXPECT_EQ(r.lexicon.nonterminal_count(), 0u);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].phase, "init");
}

TEST(Search, InductionLeavesAValidLexicon) {
  testing::Rng rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    SearchConfig cfg;
    cfg.outer_iterations = 5;
    const InductionResult r = run_induction(corpus_from_text(testing::random_text(rng, 600, 3)), cfg);
    std::set<std::string> seen;
    for (WordId id : r.lexicon.nonterminals()) {
      const Word& w = r.lexicon.word(id);
      ASSERT_GE(w.components.size(), 2u);
      Bytes joined;
      for (WordId c : w.components) {
        ASSERT_TRUE(r.lexicon.contains(c));
        joined.insert(joined.end(), r.lexicon.surface(c).begin(), r.lexicon.surface(c).end());
      }
      ASSERT_EQ(joined, w.surface);
      ASSERT_TRUE(seen.insert(to_string(w.surface)).second);
    }
  }
}

TEST(Search, ConfigValidation) {
  SearchConfig cfg;
  cfg.inner_em_iterations = 0;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = {};
  cfg.parser.max_word_length = 1;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = {};
  cfg.max_candidates_per_round = 0;
  EXPECT_THROW(cfg.validate(), ContractError);
}

}  // namespace
}  // namespace mdllex
