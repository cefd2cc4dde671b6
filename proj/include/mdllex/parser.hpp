#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/counts.hpp"
#include "mdllex/lexicon.hpp"

namespace mdllex {

struct ParserOptions {
  // Longest word surface the parser (and the search) will consider.
  std::size_t max_word_length = 64;
  // Cost charged for a zero-count terminal. Such bytes never occur in the
  // training data, but they must stay parseable in unseen input.
  double unseen_terminal_bits = 1e6;
  // Lower bound on the cost of any token. 0 is the plain -log2 p model; 1
  // charges what a prefix code actually spends on a very frequent word.
  double min_codelength_bits = 0.0;
  // Worker threads for parse_corpus; results do not depend on this.
  std::size_t threads = 1;
};

// Trie over the surfaces of all words with finite codelength.
class SurfaceIndex {
 public:
  SurfaceIndex() = default;
  SurfaceIndex(const Lexicon& lexicon, std::size_t max_word_length);

  // Calls fn(word_id, length) for every indexed nonterminal whose surface
  // is a prefix of text[pos..], up to `max_length` bytes.
  template <typename Fn>
  void for_each_prefix(std::span<const Byte> text, std::size_t pos, std::size_t max_length,
                       Fn&& fn) const {
    if (nodes_.empty()) return;
    std::size_t node = 0;
    const std::size_t limit = std::min(text.size() - pos, max_length);
    for (std::size_t len = 1; len <= limit; ++len) {
      node = child(node, text[pos + len - 1]);
      if (node == kNone) return;
      const WordId w = nodes_[node].word;
      if (w != kNoWord) fn(w, len);
    }
  }

  std::size_t max_word_length() const { return max_word_length_; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr WordId kNoWord = std::numeric_limits<WordId>::max();

  struct Node {
    std::vector<std::pair<Byte, std::uint32_t>> children;  // sorted by byte
    WordId word = kNoWord;
  };

  std::size_t child(std::size_t node, Byte b) const {
    if (node == 0) {
      const std::uint32_t c = root_[b];
      return c == 0 ? kNone : c;
    }
    for (const auto& [key, next] : nodes_[node].children) {
      if (key == b) return next;
      if (key > b) break;
    }
    return kNone;
  }

  std::vector<Node> nodes_;
  std::uint32_t root_[256] = {};
  std::size_t max_word_length_ = 0;
};

struct Parse {
  std::vector<WordId> tokens;
  double dl_bits = 0.0;
  Span span;
};

// Per-token cost used by the dynamic program; the default is the word's
// codelength (with the unseen-terminal fallback).
double token_cost(const Lexicon& lexicon, WordId id, const ParserOptions& options);

namespace detail {

// Minimum-cost segmentation of `text` by forward dynamic programming.
// Ties prefer the longer final word, then the smaller id.
template <typename CostFn>
std::vector<WordId> best_segmentation(std::span<const Byte> text, const SurfaceIndex& index,
                                      std::size_t max_length, CostFn&& cost) {
  constexpr double kTieEps = 1e-9;
  const std::size_t n = text.size();
  std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> best_len(n + 1, 0);
  std::vector<WordId> best_word(n + 1, 0);
  best[0] = 0.0;

  auto relax = [&](std::size_t end, std::size_t len, WordId w, double c) {
    const double cand = best[end - len] + c;
    const double cur = best[end];
    bool take = false;
    if (cand < cur - kTieEps) {
      take = true;
    } else if (cand <= cur + kTieEps) {
      take = len > best_len[end] || (len == best_len[end] && w < best_word[end]);
    }
    if (take) {
      best[end] = cand;
      best_len[end] = static_cast<std::uint32_t>(len);
      best_word[end] = w;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == std::numeric_limits<double>::infinity()) continue;
    relax(i + 1, 1, terminal_id(text[i]), cost(terminal_id(text[i])));
    index.for_each_prefix(text, i, max_length, [&](WordId w, std::size_t len) {
      relax(i + len, len, w, cost(w));
    });
  }

  std::vector<WordId> tokens;
  for (std::size_t end = n; end > 0; end -= best_len[end]) tokens.push_back(best_word[end]);
  std::reverse(tokens.begin(), tokens.end());
  return tokens;
}

}  // namespace detail

// Viterbi (minimum description length) parse of `text`.
Parse viterbi_parse(const Lexicon& lexicon, std::span<const Byte> text, const SurfaceIndex& index,
                    const ParserOptions& options = {});

// Parse of a word's own surface using only strictly shorter words; this is
// the word's current best definition.
std::vector<WordId> parse_definition(const Lexicon& lexicon, WordId id, const SurfaceIndex& index,
                                     const ParserOptions& options = {});

struct CorpusParse {
  std::vector<Parse> utterances;
  // (word, re-parsed definition) for every live nonterminal.
  std::vector<std::pair<WordId, std::vector<WordId>>> definitions;
  CountTable counts;
  double corpus_dl_bits = 0.0;
};

// Parses every utterance independently plus every word definition, and
// accumulates usage and adjacent-pair counts over both.
CorpusParse parse_corpus(const Lexicon& lexicon, const Corpus& corpus,
                         const ParserOptions& options = {});

// Installs re-parsed definitions into the lexicon.
void apply_definitions(Lexicon& lexicon, const CorpusParse& parse);

// Description length of a set of counts under the lexicon's codelengths:
// sum over words of c(w) * codelength(w). After reestimate() with the same
// counts this equals lexicon_dl + corpus parse DL.
double description_length(const Lexicon& lexicon, const CountTable& counts,
                          const ParserOptions& options = {});

// Segmentation tree of one utterance: each token expanded to terminals.
struct SegmentationTree {
  Span span;
  std::vector<TreeNode> tokens;
};

SegmentationTree segmentation_tree(const Lexicon& lexicon, const Parse& parse);

}  // namespace mdllex
