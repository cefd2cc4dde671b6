#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/lexicon.hpp"
#include "mdllex/parser.hpp"

namespace mdllex {

struct CodeEntry {
  WordId id = 0;
  unsigned length = 0;
  std::uint64_t code = 0;  // low `length` bits, MSB first
};

// Canonical minimum-redundancy code. Entries are in canonical order
// (by code length, then by rank = decreasing count); the table is fully
// determined by that order plus the code lengths.
class CodeTable {
 public:
  CodeTable() = default;
  explicit CodeTable(std::vector<CodeEntry> entries);

  const std::vector<CodeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(WordId id) const { return index_.contains(id); }
  const CodeEntry& at(WordId id) const;
  std::size_t rank(WordId id) const { return index_.at(id); }
  double kraft_sum() const;
  unsigned max_length() const;

 private:
  std::vector<CodeEntry> entries_;
  std::unordered_map<WordId, std::size_t> index_;
};

// Builds the code from explicit (word, count) weights; all counts must be
// positive.
CodeTable build_code(std::span<const std::pair<WordId, double>> weights);
// Builds the code over every live word with positive count.
CodeTable build_code(const Lexicon& lexicon);

// Assigns canonical codes to entries already sorted by (length, rank).
void assign_canonical_codes(std::vector<CodeEntry>& entries);

struct CompressedFile {
  Bytes data;
  std::size_t symbol_count = 0;
  std::size_t token_count = 0;
  std::size_t original_size = 0;
  std::uint64_t lexicon_bits = 0;  // everything before the body
  std::uint64_t body_bits = 0;     // token codes only
  std::uint64_t padding_bits = 0;  // body alignment + trailing pad byte
  double idealized_bits = 0.0;     // sum c(w) log2(N / c(w)) over the coded stream
};

// Compresses the corpus bytes with a lexicon. The corpus should be loaded
// in keep-verbatim mode; decode() returns exactly corpus.bytes.
CompressedFile encode(const Corpus& corpus, const Lexicon& lexicon, const ParserOptions& options = {});
Bytes decode(std::span<const Byte> file);

// Byte offsets of every token whose surface equals `surface`, found by
// walking the token codes without reconstructing the text.
std::vector<std::size_t> scan_tokens(std::span<const Byte> file, std::span<const Byte> surface);

struct DlReport {
  std::size_t input_bytes = 0;
  double idealized_bits = 0.0;
  double realized_bits = 0.0;
  double lexicon_bits = 0.0;
  double body_bits = 0.0;
  double padding_bits = 0.0;
  double bits_per_char = 0.0;
  double idealized_bits_per_char = 0.0;
};

DlReport dl_report(const CompressedFile& file);
DlReport dl_report(const Corpus& corpus, const Lexicon& lexicon, const ParserOptions& options = {});

}  // namespace mdllex
