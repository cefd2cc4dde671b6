#include "mdllex/parser.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace mdllex {

SurfaceIndex::SurfaceIndex(const Lexicon& lexicon, std::size_t max_word_length)
    : max_word_length_(max_word_length) {
  nodes_.emplace_back();
  for (WordId id : lexicon.nonterminals()) {
    const Word& w = lexicon.word(id);
    if (!std::isfinite(w.codelength) || w.surface.size() > max_word_length) continue;
    std::size_t node = 0;
    for (Byte b : w.surface) {
      std::size_t next = child(node, b);
      if (next == kNone) {
        next = nodes_.size();
        nodes_.emplace_back();
        if (node == 0) {
          root_[b] = static_cast<std::uint32_t>(next);
        } else {
          auto& kids = nodes_[node].children;
          auto at = std::lower_bound(kids.begin(), kids.end(), b,
                                     [](const auto& kv, Byte key) { return kv.first < key; });
          kids.insert(at, {b, static_cast<std::uint32_t>(next)});
        }
      }
      node = next;
    }
    nodes_[node].word = id;
  }
}

double token_cost(const Lexicon& lexicon, WordId id, const ParserOptions& options) {
  const double cl = lexicon.codelength(id);
  if (std::isfinite(cl)) return std::max(cl, options.min_codelength_bits);
  return is_terminal(id) ? options.unseen_terminal_bits : cl;
}

Parse viterbi_parse(const Lexicon& lexicon, std::span<const Byte> text, const SurfaceIndex& index,
                    const ParserOptions& options) {
  Parse parse;
  parse.span = {0, text.size()};
  parse.tokens = detail::best_segmentation(text, index, options.max_word_length,
                                           [&](WordId w) { return token_cost(lexicon, w, options); });
  for (WordId t : parse.tokens) parse.dl_bits += token_cost(lexicon, t, options);
  return parse;
}

std::vector<WordId> parse_definition(const Lexicon& lexicon, WordId id, const SurfaceIndex& index,
                                     const ParserOptions& options) {
  const Bytes& surface = lexicon.surface(id);
  return detail::best_segmentation(surface, index, surface.size() - 1,
                                   [&](WordId w) { return token_cost(lexicon, w, options); });
}

namespace {

struct Chunk {
  std::vector<Parse> parses;
  std::vector<std::pair<WordId, std::vector<WordId>>> definitions;
  CountTable counts;
};

template <typename Fn>
void run_chunks(std::size_t items, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, items));
  if (threads == 1) {
    fn(0, 0, items);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t per = (items + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * per;
    const std::size_t end = std::min(items, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

CorpusParse parse_corpus(const Lexicon& lexicon, const Corpus& corpus, const ParserOptions& options) {
  const SurfaceIndex index(lexicon, options.max_word_length);
  const std::vector<Span> spans = utterances(corpus);
  const std::vector<WordId> words = lexicon.nonterminals();

  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  std::vector<Chunk> utt_chunks(threads);
  run_chunks(spans.size(), threads, [&](std::size_t t, std::size_t begin, std::size_t end) {
    Chunk& chunk = utt_chunks[t];
    for (std::size_t i = begin; i < end; ++i) {
      Parse p = viterbi_parse(lexicon, corpus.view(spans[i]), index, options);
      p.span = spans[i];
      chunk.counts.add_sequence(p.tokens);
      chunk.parses.push_back(std::move(p));
    }
  });
  std::vector<Chunk> def_chunks(threads);
  run_chunks(words.size(), threads, [&](std::size_t t, std::size_t begin, std::size_t end) {
    Chunk& chunk = def_chunks[t];
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<WordId> def = parse_definition(lexicon, words[i], index, options);
      chunk.counts.add_sequence(def);
      chunk.definitions.emplace_back(words[i], std::move(def));
    }
  });

  CorpusParse out;
  out.utterances.reserve(spans.size());
  out.definitions.reserve(words.size());
  out.counts.word_counts.assign(lexicon.id_bound(), 0.0);
  for (Chunk& c : utt_chunks) {
    for (Parse& p : c.parses) {
      out.corpus_dl_bits += p.dl_bits;
      out.utterances.push_back(std::move(p));
    }
    out.counts.merge(c.counts);
  }
  for (Chunk& c : def_chunks) {
    for (auto& d : c.definitions) out.definitions.push_back(std::move(d));
    out.counts.merge(c.counts);
  }
  return out;
}

void apply_definitions(Lexicon& lexicon, const CorpusParse& parse) {
  for (const auto& [id, def] : parse.definitions) {
    if (lexicon.contains(id) && lexicon.word(id).components != def) lexicon.set_components(id, def);
  }
}

double description_length(const Lexicon& lexicon, const CountTable& counts,
                           const ParserOptions& options) {
  double bits = 0.0;
  for (std::size_t i = 0; i < counts.word_counts.size(); ++i) {
    const double c = counts.word_counts[i];
    if (c <= 0.0) continue;
    bits += c * token_cost(lexicon, static_cast<WordId>(i), options);
  }
  return bits;
}

SegmentationTree segmentation_tree(const Lexicon& lexicon, const Parse& parse) {
  SegmentationTree tree;
  tree.span = parse.span;
  std::size_t pos = parse.span.start;
  for (WordId t : parse.tokens) {
    tree.tokens.push_back(expand_tree(lexicon, t, pos));
    pos = tree.tokens.back().span.end;
  }
  return tree;
}

}  // namespace mdllex
