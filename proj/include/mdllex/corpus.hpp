#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdllex {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

// Half-open byte range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

enum class CorpusMode { kStripDelimiters, kKeepVerbatim };

struct CorpusOptions {
  CorpusMode mode = CorpusMode::kStripDelimiters;
  bool lowercase = false;
  std::optional<std::size_t> max_bytes;
  // Bytes treated as word delimiters. Empty means the default set:
  // ASCII whitespace and ASCII punctuation.
  std::string delimiters;
  // Newlines split the input into utterances; parses never cross them.
  bool split_utterances_on_newline = true;
};

struct Corpus {
  Bytes bytes;
  // Indices where utterances begin; empty means a single utterance.
  std::vector<std::size_t> utterance_bounds;
  // True words: maximal delimiter-free runs of the original text.
  std::vector<Span> true_spans;

  std::size_t size() const { return bytes.size(); }
  std::span<const Byte> view(Span s) const {
    return std::span<const Byte>(bytes).subspan(s.start, s.length());
  }
};

std::string default_delimiters();

Corpus corpus_from_text(std::string_view text, const CorpusOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options = {});

// Ranges partitioning corpus.bytes at its utterance bounds.
std::vector<Span> utterances(const Corpus& corpus);

// Sidecar ground truth: one "start<TAB>end" line per true word.
std::vector<Span> read_truth(std::istream& in);
std::vector<Span> read_truth_file(const std::filesystem::path& path);
void write_truth(std::ostream& out, std::span<const Span> spans);

// Replaces corpus.true_spans after checking they are sorted,
// non-overlapping and in bounds.
void attach_truth(Corpus& corpus, std::vector<Span> spans);

bool spans_valid(std::span<const Span> spans, std::size_t size);

std::string to_string(std::span<const Byte> bytes);
Bytes to_bytes(std::string_view text);

}  // namespace mdllex
