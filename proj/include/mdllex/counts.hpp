#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mdllex {

using WordId = std::uint32_t;

struct WordPair {
  WordId first = 0;
  WordId second = 0;

  std::uint64_t key() const { return (std::uint64_t{first} << 32) | second; }
  static WordPair from_key(std::uint64_t k) {
    return {static_cast<WordId>(k >> 32), static_cast<WordId>(k & 0xffffffffu)};
  }
  friend bool operator==(const WordPair&, const WordPair&) = default;
};

// Usage counts c(w) and adjacent-pair counts c(W) gathered from parses of
// the corpus and of the word definitions.
struct CountTable {
  std::vector<double> word_counts;  // indexed by WordId
  std::unordered_map<std::uint64_t, double> pair_counts;
  double total = 0.0;

  double count(WordId id) const { return id < word_counts.size() ? word_counts[id] : 0.0; }
  double pair_count(WordPair p) const {
    auto it = pair_counts.find(p.key());
    return it == pair_counts.end() ? 0.0 : it->second;
  }

  void add_word(WordId id, double weight = 1.0) {
    if (id >= word_counts.size()) word_counts.resize(id + 1, 0.0);
    word_counts[id] += weight;
    total += weight;
  }

  // Adds one token stream: every token counts once; adjacent pairs count
  // once, except that runs of a repeated word count non-overlapping pairs.
  void add_sequence(std::span<const WordId> tokens, double weight = 1.0) {
    for (WordId t : tokens) add_word(t, weight);
    bool last_was_repeat = false;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      const bool repeat = tokens[i] == tokens[i + 1];
      if (repeat && last_was_repeat) {
        last_was_repeat = false;
        continue;
      }
      last_was_repeat = repeat;
      pair_counts[WordPair{tokens[i], tokens[i + 1]}.key()] += weight;
    }
  }

  void merge(const CountTable& other) {
    if (other.word_counts.size() > word_counts.size()) {
      word_counts.resize(other.word_counts.size(), 0.0);
    }
    for (std::size_t i = 0; i < other.word_counts.size(); ++i) word_counts[i] += other.word_counts[i];
    for (const auto& [k, v] : other.pair_counts) pair_counts[k] += v;
    total += other.total;
  }
};

}  // namespace mdllex
