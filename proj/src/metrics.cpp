#include "mdllex/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include "mdllex/error.hpp"

namespace mdllex {

namespace {

void collect(const TreeNode& node, bool leaves, std::vector<Span>& out) {
  if (leaves || !node.children.empty()) out.push_back(node.span);
  for (const TreeNode& c : node.children) collect(c, leaves, out);
}

void sort_unique(std::vector<Span>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Per-position extremes of the node spans, enough to answer "does any node
// cross this span" in time proportional to the span length.
struct CrossIndex {
  std::size_t size = 0;
  std::vector<std::size_t> min_start_ending_at;  // by end position
  std::vector<std::size_t> max_end_starting_at;  // by start position

  explicit CrossIndex(std::span<const SegmentationTree> trees) {
    std::vector<Span> spans;
    for (const SegmentationTree& t : trees) {
      size = std::max(size, t.span.end);
      for (const TreeNode& tok : t.tokens) collect(tok, true, spans);
    }
    min_start_ending_at.assign(size + 1, SIZE_MAX);
    max_end_starting_at.assign(size + 1, 0);
    for (const Span& s : spans) {
      min_start_ending_at[s.end] = std::min(min_start_ending_at[s.end], s.start);
      max_end_starting_at[s.start] = std::max(max_end_starting_at[s.start], s.end);
    }
  }

  bool crossed(Span t) const {
    const std::size_t hi = std::min(t.end, size + 1);
    for (std::size_t p = t.start + 1; p < hi; ++p) {
      if (min_start_ending_at[p] < t.start) return true;
      if (max_end_starting_at[p] > t.end) return true;
    }
    return false;
  }
};

std::vector<Span> all_spans(std::span<const SegmentationTree> trees) {
  std::vector<Span> spans;
  for (const SegmentationTree& t : trees) {
    for (const TreeNode& tok : t.tokens) collect(tok, true, spans);
  }
  sort_unique(spans);
  return spans;
}

void require_truth(std::span<const Span> true_spans) {
  if (true_spans.empty()) throw ContractError("no true words to evaluate against");
}

std::size_t count_matched(const std::vector<Span>& spans, std::span<const Span> true_spans) {
  std::size_t hits = 0;
  for (const Span& t : true_spans) hits += std::binary_search(spans.begin(), spans.end(), t);
  return hits;
}

std::size_t count_crossed(const CrossIndex& index, std::span<const Span> true_spans) {
  std::size_t n = 0;
  for (const Span& t : true_spans) n += index.crossed(t);
  return n;
}

double percent(std::size_t part, std::size_t whole) {
  return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

}  // namespace

std::vector<Span> node_spans(const SegmentationTree& tree) {
  std::vector<Span> spans;
  for (const TreeNode& tok : tree.tokens) collect(tok, true, spans);
  sort_unique(spans);
  return spans;
}

std::size_t node_count(const SegmentationTree& tree) {
  std::vector<Span> spans;
  for (const TreeNode& tok : tree.tokens) {
    spans.push_back(tok.span);
    collect(tok, false, spans);
  }
  sort_unique(spans);
  return spans.size();
}

bool crosses(Span node, Span truth) {
  return (node.start < truth.start && truth.start < node.end && node.end < truth.end) ||
         (truth.start < node.start && node.start < truth.end && truth.end < node.end);
}

double recall(std::span<const SegmentationTree> trees, std::span<const Span> true_spans) {
  require_truth(true_spans);
  return percent(count_matched(all_spans(trees), true_spans), true_spans.size());
}

double crossing_brackets(std::span<const SegmentationTree> trees, std::span<const Span> true_spans) {
  require_truth(true_spans);
  return percent(count_crossed(CrossIndex(trees), true_spans), true_spans.size());
}

double recall(const SegmentationTree& tree, std::span<const Span> true_spans) {
  return recall(std::span<const SegmentationTree>(&tree, 1), true_spans);
}

double crossing_brackets(const SegmentationTree& tree, std::span<const Span> true_spans) {
  return crossing_brackets(std::span<const SegmentationTree>(&tree, 1), true_spans);
}

TreeStats tree_stats(std::span<const SegmentationTree> trees, std::size_t true_word_count) {
  TreeStats s;
  for (const SegmentationTree& t : trees) s.node_count += node_count(t);
  if (true_word_count) {
    s.nodes_per_true_word = static_cast<double>(s.node_count) / static_cast<double>(true_word_count);
  }
  return s;
}

SegReport evaluate(std::span<const SegmentationTree> trees, std::span<const Byte> text,
                   std::span<const Span> true_spans) {
  require_truth(true_spans);
  const std::vector<Span> spans = all_spans(trees);
  const CrossIndex index(trees);

  SegReport r;
  r.true_word_count = true_spans.size();
  std::unordered_set<std::string> types;
  std::unordered_set<std::string> found;
  for (const Span& t : true_spans) {
    if (t.end > text.size()) throw ContractError("true span outside the text");
    std::string type(text.begin() + static_cast<std::ptrdiff_t>(t.start),
                     text.begin() + static_cast<std::ptrdiff_t>(t.end));
    const bool hit = std::binary_search(spans.begin(), spans.end(), t);
    r.matched += hit;
    r.crossed += index.crossed(t);
    if (hit) found.insert(type);
    types.insert(std::move(type));
  }
  r.recall = percent(r.matched, r.true_word_count);
  r.crossing_brackets = percent(r.crossed, r.true_word_count);
  r.type_recall = percent(found.size(), types.size());
  const TreeStats stats = tree_stats(trees, r.true_word_count);
  r.node_count = stats.node_count;
  r.nodes_per_true_word = stats.nodes_per_true_word;
  return r;
}

std::vector<SegmentationTree> segment_corpus(const Lexicon& lexicon, const Corpus& corpus,
                                             const ParserOptions& options) {
  const SurfaceIndex index(lexicon, options.max_word_length);
  std::vector<SegmentationTree> trees;
  for (const Span& u : utterances(corpus)) {
    Parse p = viterbi_parse(lexicon, corpus.view(u), index, options);
    p.span = u;
    trees.push_back(segmentation_tree(lexicon, p));
  }
  return trees;
}

void write_trees(std::ostream& out, const Lexicon& lexicon, std::span<const SegmentationTree> trees) {
  for (const SegmentationTree& t : trees) {
    out << '[';
    for (const TreeNode& tok : t.tokens) out << '[' << bracketed(lexicon, tok) << ']';
    out << "]\n";
  }
}

namespace {

class TreeReader {
 public:
  TreeReader(const std::string& line, std::size_t offset, Bytes& text)
      : line_(line), pos_(0), offset_(offset), text_(text) {}

  SegmentationTree read() {
    SegmentationTree tree;
    tree.span.start = offset_;
    expect('[');
    while (peek() != ']') {
      expect('[');
      tree.tokens.push_back(group());
    }
    expect(']');
    if (pos_ != line_.size()) fail("trailing characters");
    tree.span.end = offset_;
    return tree;
  }

 private:
  // Body of a bracket whose '[' was consumed; consumes the ']'.
  TreeNode group() {
    TreeNode node;
    node.span.start = offset_;
    while (peek() != ']') {
      if (peek() == '[') {
        ++pos_;
        node.children.push_back(group());
      } else {
        TreeNode leaf;
        leaf.span = {offset_, offset_ + 1};
        text_.push_back(byte());
        ++offset_;
        node.children.push_back(std::move(leaf));
      }
    }
    ++pos_;
    node.span.end = offset_;
    if (node.children.empty()) fail("empty brackets");
    if (node.children.size() == 1 && node.children[0].children.empty()) return node.children[0];
    return node;
  }

  Byte byte() {
    const char c = line_[pos_++];
    if (c != '\\') return static_cast<Byte>(c);
    if (pos_ >= line_.size()) fail("dangling escape");
    const char e = line_[pos_++];
    switch (e) {
      case 't': return '\t';
      case 'n': return '\n';
      case 'r': return '\r';
      case '\\':
      case '[':
      case ']': return static_cast<Byte>(e);
      case 'x': {
        if (pos_ + 2 > line_.size()) fail("short hex escape");
        const std::string hex = line_.substr(pos_, 2);
        pos_ += 2;
        std::size_t used = 0;
        int v = 0;
        try {
          v = std::stoi(hex, &used, 16);
        } catch (const std::exception&) {
          fail("bad hex escape");
        }
        if (used != 2) fail("bad hex escape");
        return static_cast<Byte>(v);
      }
      default: fail("unknown escape");
    }
  }

  char peek() const {
    if (pos_ >= line_.size()) fail("unbalanced brackets");
    return line_[pos_];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("tree file: " + what + " at column " + std::to_string(pos_ + 1));
  }

  const std::string& line_;
  std::size_t pos_;
  std::size_t offset_;
  Bytes& text_;

 public:
  std::size_t offset() const { return offset_; }
};

}  // namespace

std::vector<SegmentationTree> read_trees(std::istream& in, Bytes* text) {
  Bytes scratch;
  Bytes& sink = text ? *text : scratch;
  std::vector<SegmentationTree> trees;
  std::string line;
  std::size_t offset = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TreeReader reader(line, offset, sink);
    try {
      trees.push_back(reader.read());
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + ", line " + std::to_string(lineno));
    }
    offset = reader.offset();
  }
  return trees;
}

void write_report(std::ostream& out, const SegReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(22) << "true words" << r.true_word_count << '\n'
      << std::setw(22) << "recall (tokens) %" << r.recall << '\n'
      << std::setw(22) << "recall (types) %" << r.type_recall << '\n'
      << std::setw(22) << "crossing brackets %" << r.crossing_brackets << '\n'
      << std::setw(22) << "tree nodes" << r.node_count << '\n'
      << std::setw(22) << "nodes per true word" << r.nodes_per_true_word << '\n';
  out.flags(flags);
}

}  // namespace mdllex
