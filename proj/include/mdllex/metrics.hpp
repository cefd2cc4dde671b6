#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/lexicon.hpp"
#include "mdllex/parser.hpp"

namespace mdllex {

struct SegReport {
  double recall = 0.0;             // percent of true word tokens
  double type_recall = 0.0;        // percent of true word types
  double crossing_brackets = 0.0;  // percent of true word tokens
  std::size_t matched = 0;
  std::size_t crossed = 0;
  std::size_t node_count = 0;
  std::size_t true_word_count = 0;
  double nodes_per_true_word = 0.0;
};

// Distinct spans of every node of the tree, leaves included, sorted.
std::vector<Span> node_spans(const SegmentationTree& tree);

// Distinct spans of internal nodes plus top-level tokens; a tree of one
// terminal token has one node.
std::size_t node_count(const SegmentationTree& tree);

// Strict crossing: s' < s < e' < e or s < s' < e < e'.
bool crosses(Span node, Span truth);

// Trees hold absolute spans into one shared text. Throw ContractError on
// empty truth.
double recall(std::span<const SegmentationTree> trees, std::span<const Span> true_spans);
double crossing_brackets(std::span<const SegmentationTree> trees, std::span<const Span> true_spans);
double recall(const SegmentationTree& tree, std::span<const Span> true_spans);
double crossing_brackets(const SegmentationTree& tree, std::span<const Span> true_spans);

struct TreeStats {
  std::size_t node_count = 0;
  double nodes_per_true_word = 0.0;
};
TreeStats tree_stats(std::span<const SegmentationTree> trees, std::size_t true_word_count);

// Full report; `text` is the shared text, needed for type recall.
SegReport evaluate(std::span<const SegmentationTree> trees, std::span<const Byte> text,
                   std::span<const Span> true_spans);

// Segments every utterance of the corpus with the lexicon.
std::vector<SegmentationTree> segment_corpus(const Lexicon& lexicon, const Corpus& corpus,
                                             const ParserOptions& options = {});

// One line per tree: "[" + "[token]"... + "]", nested words in brackets,
// terminal runs flat, e.g. "[[[th]e][[do]g]]".
void write_trees(std::ostream& out, const Lexicon& lexicon, std::span<const SegmentationTree> trees);
// Inverse of write_trees up to word ids (all ids are 0 in the result);
// spans are laid out consecutively from offset 0. The text is appended to
// `text` if given.
std::vector<SegmentationTree> read_trees(std::istream& in, Bytes* text = nullptr);

void write_report(std::ostream& out, const SegReport& report);

}  // namespace mdllex
