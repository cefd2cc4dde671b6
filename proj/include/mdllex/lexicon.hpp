#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/counts.hpp"

namespace mdllex {

inline constexpr std::size_t kTerminalCount = 256;
inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

inline bool is_terminal(WordId id) { return id < kTerminalCount; }
inline WordId terminal_id(Byte b) { return static_cast<WordId>(b); }

struct Word {
  std::vector<WordId> components;  // empty iff terminal
  Bytes surface;
  double count = 0.0;
  double probability = 0.0;
  double codelength = kInfiniteBits;

  bool terminal() const { return components.empty(); }
};

// A word as a node of its recursive decomposition, positioned in some
// enclosing byte sequence.
struct TreeNode {
  WordId id = 0;
  Span span;
  std::vector<TreeNode> children;
};

// Hierarchical lexicon: every nonterminal word is a concatenation of two or
// more shorter words, bottoming out in the 256 byte terminals. Ids are
// dense and never reused; deleted ids become tombstones.
class Lexicon {
 public:
  Lexicon();

  WordId add_word(std::span<const WordId> components);
  // Splices `id`'s definition into every word that uses it, then removes it.
  // Returns the ids whose definitions changed.
  std::vector<WordId> delete_word(WordId id);
  // Replaces a definition by another parse of the same surface. Every
  // component must be strictly shorter than the word.
  void set_components(WordId id, std::vector<WordId> components);

  // p(w) = c(w)/N; zero counts give p = 0 and infinite codelength.
  void reestimate(std::span<const double> counts);
  void reestimate(const CountTable& counts) { reestimate(std::span<const double>(counts.word_counts)); }

  bool contains(WordId id) const { return id < words_.size() && words_[id].has_value(); }
  const Word& word(WordId id) const;
  double codelength(WordId id) const { return word(id).codelength; }
  const Bytes& surface(WordId id) const { return word(id).surface; }
  std::optional<WordId> find(std::span<const Byte> surface) const;

  std::size_t id_bound() const { return words_.size(); }
  std::size_t size() const { return live_; }
  std::size_t nonterminal_count() const { return live_ - kTerminalCount; }
  double total_count() const { return total_count_; }
  std::vector<WordId> nonterminals() const;

  // Ids ordered so that every word follows its components.
  std::vector<WordId> topological_order() const;

  // Raw restore used by the binary loader; bypasses the duplicate check
  // but not the DAG check.
  void restore(WordId id, std::vector<WordId> components, double count);
  // Finishes a restore: pads tombstones up to `id_bound` and installs the
  // saved probabilities.
  void restore_tail(std::size_t id_bound, std::span<const double> probabilities);

  friend bool operator==(const Lexicon& a, const Lexicon& b);

 private:
  Word& mutable_word(WordId id);
  void check_components(std::span<const WordId> components, std::size_t max_length) const;
  Bytes concat(std::span<const WordId> components) const;

  std::vector<std::optional<Word>> words_;
  std::unordered_map<std::string, WordId> by_surface_;
  std::size_t live_ = 0;
  double total_count_ = 0.0;
};

Lexicon new_lexicon();

// Cost in bits of writing every nonterminal definition as codes for its
// components, plus `per_word_overhead` bits per nonterminal.
double lexicon_dl(const Lexicon& lexicon, double per_word_overhead = 0.0);

TreeNode expand_tree(const Lexicon& lexicon, WordId id, std::size_t offset = 0);
std::size_t tree_depth(const TreeNode& node);
std::size_t leaf_count(const TreeNode& node);
// Bracketed form, e.g. "[[re][lax]]" for a word, "[re]" for a leaf run.
std::string bracketed(const Lexicon& lexicon, const TreeNode& node);
// First-level decomposition, e.g. "[[connect][ed]]"; terminals print "[a]".
std::string first_level(const Lexicon& lexicon, WordId id);

// Printable rendering of raw bytes: tab, newline, backslash and
// non-printable bytes are escaped.
std::string printable(std::span<const Byte> bytes);

// Text dump: rank, count, codelength, [surface], first-level decomposition;
// ranked by decreasing count. Zero-count terminals are omitted.
void dump_lexicon(const Lexicon& lexicon, std::ostream& out);

// Binary format preserving ids, components and counts exactly.
void save_lexicon(const Lexicon& lexicon, std::ostream& out);
Lexicon load_lexicon(std::istream& in);
void save_lexicon_file(const Lexicon& lexicon, const std::filesystem::path& path);
Lexicon load_lexicon_file(const std::filesystem::path& path);

}  // namespace mdllex
