#include "mdllex/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mdllex/error.hpp"

namespace mdllex {

namespace {

using DelimiterTable = std::array<bool, 256>;

DelimiterTable make_table(const std::string& delimiters) {
  DelimiterTable table{};
  const std::string set = delimiters.empty() ? default_delimiters() : delimiters;
  for (unsigned char c : set) table[c] = true;
  return table;
}

Byte fold(Byte b, bool lowercase) {
  if (lowercase && b >= 'A' && b <= 'Z') return static_cast<Byte>(b - 'A' + 'a');
  return b;
}

// Backs a cut point off to the nearest delimiter so the last word is whole.
std::size_t trim_cut(std::string_view text, std::size_t cut, const DelimiterTable& delim) {
  if (cut >= text.size()) return text.size();
  std::size_t pos = cut;
  while (pos > 0 && !delim[static_cast<Byte>(text[pos])] &&
         !delim[static_cast<Byte>(text[pos - 1])]) {
    --pos;
  }
  return pos == 0 ? cut : pos;
}

}  // namespace

std::string default_delimiters() {
  std::string out;
  for (int c = 0; c < 128; ++c) {
    const bool space = c == ' ' || (c >= '\t' && c <= '\r');
    const bool punct = (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
                       (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
    if (space || punct) out.push_back(static_cast<char>(c));
  }
  return out;
}

Corpus corpus_from_text(std::string_view text, const CorpusOptions& options) {
  const DelimiterTable delim = make_table(options.delimiters);
  if (options.max_bytes) {
    if (*options.max_bytes == 0) throw ContractError("max_bytes must be >= 1");
    text = text.substr(0, trim_cut(text, *options.max_bytes, delim));
  }

  Corpus corpus;
  corpus.bytes.reserve(text.size());
  const bool strip = options.mode == CorpusMode::kStripDelimiters;
  std::size_t word_start = 0;
  bool in_word = false;

  auto close_word = [&](std::size_t end) {
    if (in_word) corpus.true_spans.push_back({word_start, end});
    in_word = false;
  };

  for (char ch : text) {
    const Byte b = fold(static_cast<Byte>(ch), options.lowercase);
    const bool newline = options.split_utterances_on_newline && b == '\n';
    if (delim[b] || newline) {
      close_word(corpus.bytes.size());
      if (!strip) corpus.bytes.push_back(b);
      if (newline) corpus.utterance_bounds.push_back(corpus.bytes.size());
      continue;
    }
    if (!in_word) {
      word_start = corpus.bytes.size();
      in_word = true;
    }
    corpus.bytes.push_back(b);
  }
  close_word(corpus.bytes.size());

  if (corpus.bytes.empty()) throw DataError("empty corpus");

  auto& bounds = corpus.utterance_bounds;
  std::erase_if(bounds, [&](std::size_t b) { return b == 0 || b >= corpus.bytes.size(); });
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("error reading corpus file: " + path.string());
  return corpus_from_text(text, options);
}

std::vector<Span> utterances(const Corpus& corpus) {
  std::vector<std::size_t> cuts = corpus.utterance_bounds;
  std::sort(cuts.begin(), cuts.end());
  std::vector<Span> out;
  std::size_t begin = 0;
  for (std::size_t cut : cuts) {
    if (cut <= begin || cut >= corpus.bytes.size()) continue;
    out.push_back({begin, cut});
    begin = cut;
  }
  if (begin < corpus.bytes.size() || out.empty()) out.push_back({begin, corpus.bytes.size()});
  return out;
}

bool spans_valid(std::span<const Span> spans, std::size_t size) {
  std::size_t prev_end = 0;
  for (const Span& s : spans) {
    if (s.start >= s.end || s.start < prev_end || s.end > size) return false;
    prev_end = s.end;
  }
  return true;
}

std::vector<Span> read_truth(std::istream& in) {
  std::vector<Span> spans;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Span s;
    if (!(fields >> s.start >> s.end)) {
      throw DataError("malformed truth line " + std::to_string(line_no));
    }
    spans.push_back(s);
  }
  return spans;
}

std::vector<Span> read_truth_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read truth file: " + path.string());
  return read_truth(in);
}

void write_truth(std::ostream& out, std::span<const Span> spans) {
  for (const Span& s : spans) out << s.start << '\t' << s.end << '\n';
}

void attach_truth(Corpus& corpus, std::vector<Span> spans) {
  if (!spans_valid(spans, corpus.bytes.size())) {
    throw DataError("truth spans must be sorted, non-overlapping and within the corpus");
  }
  corpus.true_spans = std::move(spans);
}

std::string to_string(std::span<const Byte> bytes) {
  return std::string(bytes.begin(), bytes.end());
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

}  // namespace mdllex
