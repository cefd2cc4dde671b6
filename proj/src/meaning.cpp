#include "mdllex/meaning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "mdllex/error.hpp"

namespace mdllex {

SymbolSet make_set(std::vector<SymbolId> symbols) {
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  return symbols;
}

SymbolSet set_union(const SymbolSet& a, const SymbolSet& b) {
  SymbolSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SymbolSet set_minus(const SymbolSet& a, const SymbolSet& b) {
  SymbolSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

SymbolSet set_intersection(const SymbolSet& a, const SymbolSet& b) {
  SymbolSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t symmetric_difference_size(const SymbolSet& a, const SymbolSet& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) {
      ++i;
      ++j;
    } else if (*i < *j) {
      ++n;
      ++i;
    } else {
      ++n;
      ++j;
    }
  }
  return n + static_cast<std::size_t>(a.end() - i) + static_cast<std::size_t>(b.end() - j);
}

bool set_contains(const SymbolSet& a, SymbolId s) { return std::binary_search(a.begin(), a.end(), s); }

std::uint64_t set_hash(const SymbolSet& a) {
  std::uint64_t h = 1469598103934665603ull;
  for (SymbolId s : a) {
    for (int i = 0; i < 4; ++i) {
      h ^= (s >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

SymbolId SymbolInventory::intern(const std::string& name) {
  if (name.empty()) throw DataError("empty symbol name");
  auto [it, inserted] = ids_.emplace(name, static_cast<SymbolId>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<SymbolId> SymbolInventory::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Corpus text_corpus(const MeaningCorpus& corpus) {
  Corpus out;
  for (const MeaningUtterance& u : corpus.utterances) {
    out.utterance_bounds.push_back(out.bytes.size());
    out.bytes.insert(out.bytes.end(), u.text.begin(), u.text.end());
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

MeaningCorpus read_meaning_corpus(std::istream& in) {
  MeaningCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() < 2) throw DataError("meaning corpus line " + std::to_string(lineno) + ": no meaning");
    if (fields[0].empty()) throw DataError("meaning corpus line " + std::to_string(lineno) + ": empty text");
    MeaningUtterance u;
    u.text = to_bytes(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      std::vector<SymbolId> syms;
      if (!fields[f].empty()) {
        for (const std::string& name : split(fields[f], ',')) syms.push_back(corpus.symbols.intern(name));
      }
      u.candidates.push_back(make_set(std::move(syms)));
    }
    corpus.utterances.push_back(std::move(u));
  }
  if (corpus.utterances.empty()) throw DataError("meaning corpus is empty");
  return corpus;
}

MeaningCorpus read_meaning_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_meaning_corpus(in);
}

std::string format_set(const SymbolInventory& symbols, const SymbolSet& set) {
  std::string out;
  for (SymbolId s : set) {
    if (!out.empty()) out += ',';
    out += symbols.name(s);
  }
  return out;
}

void write_meaning_corpus(std::ostream& out, const MeaningCorpus& corpus) {
  for (const MeaningUtterance& u : corpus.utterances) {
    out << to_string(u.text) << '\t' << format_set(corpus.symbols, u.candidates.at(u.true_meaning));
    for (std::size_t k = 0; k < u.candidates.size(); ++k) {
      if (k != u.true_meaning) out << '\t' << format_set(corpus.symbols, u.candidates[k]);
    }
    out << '\n';
  }
}

const SymbolSet& MeaningLexicon::meaning(WordId id) const {
  static const SymbolSet kEmpty;
  if (is_terminal(id) || id >= meanings.size()) return kEmpty;
  return meanings[id];
}

SymbolSet MeaningLexicon::component_union(WordId id) const {
  SymbolSet u;
  for (WordId c : text.word(id).components) {
    if (!meaning(c).empty()) u = set_union(u, meaning(c));
  }
  return u;
}

std::size_t MeaningLexicon::perturbation_size(WordId id) const {
  if (is_terminal(id)) return 0;
  return symmetric_difference_size(meaning(id), component_union(id));
}

std::size_t MeaningLexicon::total_perturbation_size() const {
  std::size_t n = 0;
  for (WordId id : text.nonterminals()) n += perturbation_size(id);
  return n;
}

void MeaningLexicon::sync() {
  const std::size_t known = meanings.size();
  meanings.resize(text.id_bound());
  for (std::size_t i = std::max(known, kTerminalCount); i < meanings.size(); ++i) {
    const auto id = static_cast<WordId>(i);
    if (text.contains(id)) meanings[i] = component_union(id);
  }
}

void MeaningLexicon::set_perturbation(WordId id, const SymbolSet& add, const SymbolSet& remove) {
  if (is_terminal(id)) throw ContractError("terminals carry no meaning");
  if (!set_intersection(add, remove).empty()) throw ContractError("a symbol cannot be both added and removed");
  sync();

  std::vector<std::vector<WordId>> users(text.id_bound());
  for (WordId w : text.nonterminals()) {
    for (WordId c : text.word(w).components) users[c].push_back(w);
  }
  std::vector<char> seen(text.id_bound(), 0);
  std::vector<WordId> above;
  std::vector<WordId> stack{id};
  while (!stack.empty()) {
    const WordId w = stack.back();
    stack.pop_back();
    for (WordId u : users[w]) {
      if (!seen[u]) {
        seen[u] = 1;
        above.push_back(u);
        stack.push_back(u);
      }
    }
  }
  std::sort(above.begin(), above.end(), [&](WordId a, WordId b) {
    const auto la = text.surface(a).size();
    const auto lb = text.surface(b).size();
    return la != lb ? la < lb : a < b;
  });
  std::vector<std::pair<SymbolSet, SymbolSet>> kept;
  for (WordId a : above) kept.emplace_back(plus(a), minus(a));

  meanings[id] = set_minus(set_union(component_union(id), add), remove);
  for (std::size_t i = 0; i < above.size(); ++i) {
    meanings[above[i]] = set_minus(set_union(component_union(above[i]), kept[i].first), kept[i].second);
  }
}

MeaningLexicon meaning_lexicon(Lexicon text) {
  MeaningLexicon lex;
  lex.text = std::move(text);
  lex.meanings.assign(lex.text.id_bound(), {});
  return lex;
}

void save_meanings(std::ostream& out, const MeaningLexicon& lexicon, const SymbolInventory& symbols) {
  for (WordId id : lexicon.text.nonterminals()) {
    const SymbolSet& m = lexicon.meaning(id);
    if (!m.empty()) out << id << '\t' << format_set(symbols, m) << '\n';
  }
}

void load_meanings(std::istream& in, MeaningLexicon& lexicon, SymbolInventory& symbols) {
  lexicon.meanings.assign(lexicon.text.id_bound(), {});
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, '\t');
    const std::string where = "meanings line " + std::to_string(lineno);
    if (fields.size() != 2) throw DataError(where + ": expected id and symbols");
    WordId id = 0;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("id");
      id = static_cast<WordId>(v);
    } catch (const std::exception&) {
      throw DataError(where + ": bad word id");
    }
    if (!lexicon.text.contains(id) || is_terminal(id)) throw DataError(where + ": no such word");
    std::vector<SymbolId> syms;
    for (const std::string& name : split(fields[1], ',')) syms.push_back(symbols.intern(name));
    lexicon.meanings[id] = make_set(std::move(syms));
  }
}

SymbolSet meaning_of(const MeaningLexicon& lexicon, WordId id) {
  if (!lexicon.text.contains(id)) throw ContractError("unknown word");
  if (is_terminal(id)) return {};
  SymbolSet u;
  for (WordId c : lexicon.text.word(id).components) u = set_union(u, meaning_of(lexicon, c));
  return set_minus(set_union(u, lexicon.plus(id)), lexicon.minus(id));
}

void MeaningConfig::validate() const {
  if (!(symbol_cost >= 0.0)) throw ContractError("symbol cost must be non-negative");
  if (min_cooccurrence_ratio < 0.0 || min_cooccurrence_ratio > 1.0) {
    throw ContractError("co-occurrence ratio must lie in [0, 1]");
  }
  if (max_sweeps < 1) throw ContractError("max_sweeps must be >= 1");
  search.validate();
}

SymbolSet parse_meaning(const MeaningLexicon& lexicon, std::span<const WordId> tokens) {
  SymbolSet u;
  for (WordId t : tokens) {
    const SymbolSet& m = lexicon.meaning(t);
    if (!m.empty()) u = set_union(u, m);
  }
  return u;
}

double joint_dl(const MeaningLexicon& lexicon, std::span<const WordId> tokens, const SymbolSet& meaning,
                std::size_t candidate_count, const MeaningConfig& config) {
  double bits = 0.0;
  for (WordId t : tokens) bits += token_cost(lexicon.text, t, config.search.parser);
  const std::size_t residual = symmetric_difference_size(meaning, parse_meaning(lexicon, tokens));
  if (residual > 0) bits += config.symbol_cost * static_cast<double>(residual);
  if (candidate_count > 1) bits += std::log2(static_cast<double>(candidate_count));
  return bits;
}

JointParse joint_parse(const MeaningLexicon& lexicon, const SurfaceIndex& index, std::span<const Byte> text,
                       const SymbolSet& meaning, std::size_t candidate_count, const MeaningConfig& config) {
  const ParserOptions& opts = config.search.parser;
  // Per-token symbol terms: exact whenever token meanings are disjoint.
  auto cost = [&](WordId w) {
    double c = token_cost(lexicon.text, w, opts);
    for (SymbolId s : lexicon.meaning(w)) c += set_contains(meaning, s) ? -config.symbol_cost : config.symbol_cost;
    return c;
  };
  JointParse best;
  best.tokens = detail::best_segmentation(text, index, opts.max_word_length, cost);
  best.bits = joint_dl(lexicon, best.tokens, meaning, candidate_count, config);

  std::vector<WordId> plain = detail::best_segmentation(
      text, index, opts.max_word_length, [&](WordId w) { return token_cost(lexicon.text, w, opts); });
  const double plain_bits = joint_dl(lexicon, plain, meaning, candidate_count, config);
  if (plain_bits < best.bits - 1e-9) {
    best.tokens = std::move(plain);
    best.bits = plain_bits;
  }
  return best;
}

JointParse joint_parse(const MeaningLexicon& lexicon, const SurfaceIndex& index,
                       const MeaningUtterance& utterance, const MeaningConfig& config) {
  if (utterance.candidates.empty()) throw ContractError("utterance without candidate meanings");
  JointParse best;
  std::uint64_t best_hash = 0;
  for (std::size_t k = 0; k < utterance.candidates.size(); ++k) {
    JointParse p = joint_parse(lexicon, index, utterance.text, utterance.candidates[k],
                               utterance.candidates.size(), config);
    const std::uint64_t h = set_hash(utterance.candidates[k]);
    const bool better = k == 0 || p.bits < best.bits - 1e-9 || (p.bits <= best.bits + 1e-9 && h < best_hash);
    if (better) {
      best = std::move(p);
      best.candidate = k;
      best_hash = h;
    }
  }
  return best;
}

namespace {

struct JointStep {
  ParsedMeaningCorpus parses;
  CountTable counts;
  std::vector<std::pair<WordId, std::vector<WordId>>> definitions;
};

JointStep joint_pass(const MeaningLexicon& lexicon, const MeaningCorpus& corpus, const MeaningConfig& config) {
  const ParserOptions& opts = config.search.parser;
  const SurfaceIndex index(lexicon.text, opts.max_word_length);
  JointStep step;
  step.counts.word_counts.assign(lexicon.text.id_bound(), 0.0);
  for (const MeaningUtterance& u : corpus.utterances) {
    JointParse p = joint_parse(lexicon, index, u, config);
    for (WordId t : p.tokens) step.parses.text_bits += token_cost(lexicon.text, t, opts);
    step.counts.add_sequence(p.tokens);
    step.parses.tokens.push_back(std::move(p.tokens));
  }
  for (WordId w : lexicon.text.nonterminals()) {
    std::vector<WordId> def = parse_definition(lexicon.text, w, index, opts);
    step.counts.add_sequence(def);
    step.definitions.emplace_back(w, std::move(def));
  }
  return step;
}

JointStep joint_em(MeaningLexicon& lexicon, const MeaningCorpus& corpus, const MeaningConfig& config) {
  JointStep step = joint_pass(lexicon, corpus, config);
  for (const auto& [id, def] : step.definitions) {
    if (lexicon.text.word(id).components != def) lexicon.text.set_components(id, def);
  }
  lexicon.text.reestimate(step.counts);
  return step;
}

}  // namespace

ParsedMeaningCorpus joint_parse_corpus(const MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                                       const MeaningConfig& config, CountTable* counts) {
  JointStep step = joint_pass(lexicon, corpus, config);
  if (counts) *counts = std::move(step.counts);
  return std::move(step.parses);
}

namespace {

double residual_bits(const MeaningUtterance& u, const SymbolSet& parsed, double symbol_cost) {
  std::size_t best = SIZE_MAX;
  for (const SymbolSet& m : u.candidates) best = std::min(best, symmetric_difference_size(m, parsed));
  return symbol_cost * static_cast<double>(best);
}

}  // namespace

double meaning_dl(const MeaningLexicon& lexicon, const MeaningCorpus& corpus, const ParsedMeaningCorpus& parses,
                  const MeaningConfig& config) {
  double bits = config.symbol_cost * static_cast<double>(lexicon.total_perturbation_size());
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const MeaningUtterance& u = corpus.utterances[i];
    bits += residual_bits(u, parse_meaning(lexicon, parses.tokens.at(i)), config.symbol_cost);
    if (u.candidates.size() > 1) bits += std::log2(static_cast<double>(u.candidates.size()));
  }
  return bits;
}

namespace {

// A change of one word's perturbations.
struct Edit {
  WordId id;
  SymbolSet plus;
  SymbolSet minus;
};

class SymbolSearch {
 public:
  SymbolSearch(MeaningLexicon& lexicon, const MeaningCorpus& corpus, const ParsedMeaningCorpus& parses,
               const MeaningConfig& config)
      : lex_(lexicon), corpus_(corpus), parses_(parses), config_(config) {
    const std::size_t bound = lex_.text.id_bound();
    users_.resize(bound);
    for (WordId w : lex_.text.nonterminals()) {
      std::vector<WordId> comps = lex_.text.word(w).components;
      std::sort(comps.begin(), comps.end());
      comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
      for (WordId c : comps) users_[c].push_back(w);
    }
    occurrences_.resize(bound);
    utt_cost_.resize(parses_.tokens.size());
    for (std::size_t u = 0; u < parses_.tokens.size(); ++u) {
      std::vector<WordId> toks = parses_.tokens[u];
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      for (WordId t : toks) occurrences_[t].push_back(static_cast<std::uint32_t>(u));
      utt_cost_[u] = residual_bits(corpus_.utterances[u], parse_meaning(lex_, parses_.tokens[u]), config_.symbol_cost);
    }
    word_mark_.assign(bound, 0);
    utt_mark_.assign(parses_.tokens.size(), 0);
  }

  double current_bits() const {
    double bits = config_.symbol_cost * static_cast<double>(lex_.total_perturbation_size());
    for (double c : utt_cost_) bits += c;
    return bits;
  }

  // Tries the edits; keeps them if total bits drop.
  bool attempt(const std::vector<Edit>& edits) {
    const double delta = evaluate(edits);
    if (delta < -1e-9) {
      commit();
      return true;
    }
    return false;
  }

  const std::vector<WordId>& users(WordId w) const { return users_[w]; }

  // (word, symbol) add-move candidates by descending co-occurrence.
  std::vector<std::pair<WordId, SymbolId>> add_candidates() const {
    const std::size_t bound = lex_.text.id_bound();
    std::vector<std::vector<WordId>> below(bound);
    std::vector<char> done(bound, 0);
    for (WordId w : lex_.text.topological_order()) {
      if (is_terminal(w)) continue;
      std::vector<WordId> set{w};
      for (WordId c : lex_.text.word(w).components) {
        if (!is_terminal(c)) set.insert(set.end(), below[c].begin(), below[c].end());
      }
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      below[w] = std::move(set);
    }

    std::vector<double> occ(bound, 0.0);
    std::unordered_map<std::uint64_t, double> cooc;
    std::vector<WordId> words;
    for (std::size_t u = 0; u < parses_.tokens.size(); ++u) {
      words.clear();
      for (WordId t : parses_.tokens[u]) {
        if (!is_terminal(t)) words.insert(words.end(), below[t].begin(), below[t].end());
      }
      std::sort(words.begin(), words.end());
      words.erase(std::unique(words.begin(), words.end()), words.end());
      SymbolSet syms;
      for (const SymbolSet& m : corpus_.utterances[u].candidates) syms = set_union(syms, m);
      for (WordId w : words) {
        occ[w] += 1.0;
        for (SymbolId s : syms) cooc[(std::uint64_t{w} << 32) | s] += 1.0;
      }
    }
    std::vector<std::tuple<double, std::size_t, WordId, SymbolId>> ranked;
    for (const auto& [key, c] : cooc) {
      const auto w = static_cast<WordId>(key >> 32);
      const auto s = static_cast<SymbolId>(key & 0xffffffffu);
      if (c < config_.min_cooccurrence || c < config_.min_cooccurrence_ratio * occ[w]) continue;
      ranked.emplace_back(-c, lex_.text.surface(w).size(), w, s);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::pair<WordId, SymbolId>> out;
    out.reserve(ranked.size());
    for (const auto& [c, len, w, s] : ranked) out.emplace_back(w, s);
    return out;
  }

 private:
  // Change in total bits if the edits were applied, every other word
  // keeping its perturbations. Leaves the proposal in pending_*.
  double evaluate(const std::vector<Edit>& edits) {
    ++stamp_;
    pending_words_.clear();
    std::vector<WordId> stack;
    for (const Edit& e : edits) {
      if (word_mark_[e.id] != stamp_) {
        word_mark_[e.id] = stamp_;
        pending_words_.push_back(e.id);
        stack.push_back(e.id);
      }
    }
    while (!stack.empty()) {
      const WordId w = stack.back();
      stack.pop_back();
      for (WordId u : users_[w]) {
        if (word_mark_[u] != stamp_) {
          word_mark_[u] = stamp_;
          pending_words_.push_back(u);
          stack.push_back(u);
        }
      }
    }
    std::sort(pending_words_.begin(), pending_words_.end(), [&](WordId a, WordId b) {
      const auto la = lex_.text.surface(a).size();
      const auto lb = lex_.text.surface(b).size();
      return la != lb ? la < lb : a < b;
    });

    overlay_.clear();
    auto meaning = [&](WordId w) -> const SymbolSet& {
      auto it = overlay_.find(w);
      return it == overlay_.end() ? lex_.meaning(w) : it->second;
    };

    double delta = 0.0;
    std::vector<std::pair<WordId, SymbolSet>> fresh;
    for (WordId w : pending_words_) {
      SymbolSet p;
      SymbolSet m;
      auto e = std::find_if(edits.begin(), edits.end(), [&](const Edit& x) { return x.id == w; });
      if (e != edits.end()) {
        p = e->plus;
        m = e->minus;
      } else {
        p = lex_.plus(w);
        m = lex_.minus(w);
      }
      SymbolSet u;
      for (WordId c : lex_.text.word(w).components) u = set_union(u, meaning(c));
      SymbolSet next = set_minus(set_union(u, p), m);
      delta += config_.symbol_cost * (static_cast<double>(symmetric_difference_size(next, u)) -
                                      static_cast<double>(lex_.perturbation_size(w)));
      overlay_.emplace(w, std::move(next));
    }

    pending_utts_.clear();
    for (WordId w : pending_words_) {
      if (overlay_.at(w) == lex_.meaning(w)) continue;
      for (std::uint32_t u : occurrences_[w]) {
        if (utt_mark_[u] != stamp_) {
          utt_mark_[u] = stamp_;
          pending_utts_.emplace_back(u, 0.0);
        }
      }
    }
    for (auto& [u, cost] : pending_utts_) {
      SymbolSet parsed;
      for (WordId t : parses_.tokens[u]) {
        const SymbolSet& m = meaning(t);
        if (!m.empty()) parsed = set_union(parsed, m);
      }
      cost = residual_bits(corpus_.utterances[u], parsed, config_.symbol_cost);
      delta += cost - utt_cost_[u];
    }
    return delta;
  }

  void commit() {
    for (auto& [w, m] : overlay_) lex_.meanings[w] = std::move(m);
    for (const auto& [u, cost] : pending_utts_) utt_cost_[u] = cost;
    overlay_.clear();
  }

  MeaningLexicon& lex_;
  const MeaningCorpus& corpus_;
  const ParsedMeaningCorpus& parses_;
  const MeaningConfig& config_;
  std::vector<std::vector<WordId>> users_;
  std::vector<std::vector<std::uint32_t>> occurrences_;
  std::vector<double> utt_cost_;
  std::vector<std::uint32_t> word_mark_;
  std::vector<std::uint32_t> utt_mark_;
  std::uint32_t stamp_ = 0;
  std::vector<WordId> pending_words_;
  std::vector<std::pair<std::uint32_t, double>> pending_utts_;
  std::unordered_map<WordId, SymbolSet> overlay_;
};

SymbolSet with(SymbolSet s, SymbolId x) { return set_union(s, SymbolSet{x}); }
SymbolSet without(SymbolSet s, SymbolId x) { return set_minus(s, SymbolSet{x}); }

}  // namespace

ReassignStats reassign_symbols(MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                               const ParsedMeaningCorpus& parses, const MeaningConfig& config) {
  if (parses.tokens.size() != corpus.utterances.size()) throw ContractError("parses do not match the corpus");
  lexicon.sync();
  SymbolSearch search(lexicon, corpus, parses, config);
  ReassignStats stats;
  stats.bits_before = search.current_bits();
  const std::vector<std::pair<WordId, SymbolId>> candidates = search.add_candidates();

  while (stats.sweeps < config.max_sweeps) {
    ++stats.sweeps;
    std::size_t accepted = 0;
    const std::vector<WordId> words = lexicon.text.nonterminals();

    // Drop symbols.
    for (WordId w : words) {
      const SymbolSet own = lexicon.meaning(w);
      for (SymbolId s : own) {
        if (!set_contains(lexicon.meaning(w), s)) continue;
        const SymbolSet p = lexicon.plus(w);
        const SymbolSet m = lexicon.minus(w);
        Edit e = set_contains(p, s) ? Edit{w, without(p, s), m} : Edit{w, p, with(m, s)};
        accepted += search.attempt({e});
      }
    }
    // Add symbols.
    for (const auto& [w, s] : candidates) {
      if (set_contains(lexicon.meaning(w), s)) continue;
      const SymbolSet p = lexicon.plus(w);
      const SymbolSet m = lexicon.minus(w);
      Edit e = set_contains(m, s) ? Edit{w, p, without(m, s)} : Edit{w, with(p, s), m};
      accepted += search.attempt({e});
    }
    // Move a perturbation one level down or up.
    for (WordId w : words) {
      std::vector<WordId> targets = lexicon.text.word(w).components;
      const auto& up = search.users(w);
      targets.insert(targets.end(), up.begin(), up.end());
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      for (int kind = 0; kind < 2; ++kind) {
        const SymbolSet moving = kind == 0 ? lexicon.plus(w) : lexicon.minus(w);
        for (SymbolId s : moving) {
          for (WordId x : targets) {
            if (is_terminal(x) || x == w) continue;
            const SymbolSet wp = lexicon.plus(w);
            const SymbolSet wm = lexicon.minus(w);
            if (!set_contains(kind == 0 ? wp : wm, s)) break;
            const SymbolSet xp = lexicon.plus(x);
            const SymbolSet xm = lexicon.minus(x);
            std::vector<Edit> edits;
            if (kind == 0) {
              edits = {Edit{w, without(wp, s), wm}, Edit{x, with(xp, s), xm}};
            } else {
              edits = {Edit{w, wp, without(wm, s)}, Edit{x, xp, with(xm, s)}};
            }
            if (search.attempt(edits)) break;
          }
        }
      }
    }
    stats.accepted += accepted;
    if (accepted == 0) break;
  }
  stats.bits_after = search.current_bits();
  return stats;
}

namespace {

MeaningPhase measure_joint(const MeaningLexicon& lexicon, const MeaningCorpus& corpus, const JointStep& step,
                           const MeaningConfig& config, std::string phase, std::size_t iteration) {
  MeaningPhase r;
  r.phase = std::move(phase);
  r.iteration = iteration;
  r.lexicon_size = lexicon.text.nonterminal_count();
  r.perturbations = lexicon.total_perturbation_size();
  r.text_bits = description_length(lexicon.text, step.counts, config.search.parser);
  r.meaning_bits = meaning_dl(lexicon, corpus, step.parses, config);
  return r;
}

}  // namespace

MeaningModel train_joint(const MeaningCorpus& corpus, const MeaningConfig& config,
                         const std::function<void(const MeaningPhase&)>& on_phase) {
  config.validate();
  if (corpus.utterances.empty()) throw ContractError("empty meaning corpus");
  MeaningModel model;
  auto record = [&](MeaningPhase r) {
    if (on_phase) on_phase(r);
    model.history.push_back(std::move(r));
  };

  SearchConfig text_cfg = config.search;
  text_cfg.outer_iterations = config.text_iterations;
  InductionResult text = run_induction(text_corpus(corpus), text_cfg);
  model.text_history = std::move(text.history);
  model.lexicon = meaning_lexicon(std::move(text.lexicon));
  MeaningLexicon& lex = model.lexicon;

  JointStep step = joint_em(lex, corpus, config);
  for (std::size_t it = 1; it <= config.joint_iterations; ++it) {
    for (std::size_t e = 0; e < config.search.inner_em_iterations; ++e) step = joint_em(lex, corpus, config);
    record(measure_joint(lex, corpus, step, config, "em", it));

    add_words(lex.text, step.counts, config.search);
    lex.sync();
    for (std::size_t e = 0; e < config.search.inner_em_iterations; ++e) step = joint_em(lex, corpus, config);
    record(measure_joint(lex, corpus, step, config, "add", it));

    reassign_symbols(lex, corpus, step.parses, config);
    record(measure_joint(lex, corpus, step, config, "symbols", it));

    delete_words(lex.text, step.counts, config.search,
                 [&](WordId w) { return lex.perturbation_size(w) > 0; });
    step = joint_em(lex, corpus, config);
    record(measure_joint(lex, corpus, step, config, "delete", it));
  }
  // Final placement against the final parses.
  step = joint_em(lex, corpus, config);
  model.parses = joint_parse_corpus(lex, corpus, config);
  reassign_symbols(lex, corpus, model.parses, config);
  JointStep last;
  last.parses = model.parses;
  last.counts = step.counts;
  record(measure_joint(lex, corpus, last, config, "final", config.joint_iterations));
  return model;
}

SymbolSet infer_meaning(const MeaningLexicon& lexicon, std::span<const Byte> text, const ParserOptions& options) {
  const SurfaceIndex index(lexicon.text, options.max_word_length);
  return parse_meaning(lexicon, viterbi_parse(lexicon.text, text, index, options).tokens);
}

namespace {

Identification identify_with(const MeaningLexicon& lexicon, const SurfaceIndex& index, std::span<const Byte> text,
                             std::span<const SymbolSet> pool, std::size_t truth, const MeaningConfig& config) {
  if (truth >= pool.size()) throw ContractError("true meaning outside the pool");
  Identification r;
  for (const SymbolSet& m : pool) r.bits.push_back(joint_parse(lexicon, index, text, m, 1, config).bits);
  r.rank = 1;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (k == truth) continue;
    if (r.bits[k] < r.bits[truth] - 1e-9) {
      ++r.rank;
    } else if (r.bits[k] <= r.bits[truth] + 1e-9) {
      ++r.tied;
    }
  }
  return r;
}

double percent(std::size_t a, std::size_t b) { return b ? 100.0 * static_cast<double>(a) / static_cast<double>(b) : 0.0; }

}  // namespace

Identification identify(const MeaningLexicon& lexicon, std::span<const Byte> text, std::span<const SymbolSet> pool,
                        std::size_t truth, const MeaningConfig& config) {
  const SurfaceIndex index(lexicon.text, config.search.parser.max_word_length);
  return identify_with(lexicon, index, text, pool, truth, config);
}

MeaningReport evaluate_meaning(const MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                               const MeaningConfig& config, std::size_t pool_size) {
  const ParserOptions& opts = config.search.parser;
  const SurfaceIndex index(lexicon.text, opts.max_word_length);
  MeaningReport r;
  const auto& utts = corpus.utterances;
  r.utterances = utts.size();
  std::size_t top1 = 0;
  std::size_t tied = 0;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const SymbolSet& truth = utts[i].candidates.at(utts[i].true_meaning);
    const SymbolSet got = parse_meaning(lexicon, viterbi_parse(lexicon.text, utts[i].text, index, opts).tokens);
    r.predicted_symbols += got.size();
    r.true_symbols += truth.size();
    r.correct_symbols += set_intersection(got, truth).size();

    if (pool_size > 1 && utts.size() > 1) {
      std::vector<SymbolSet> pool{truth};
      for (std::size_t back = 1; back < pool_size; ++back) {
        const MeaningUtterance& prev = utts[(i + utts.size() - back % utts.size()) % utts.size()];
        pool.push_back(prev.candidates.at(prev.true_meaning));
      }
      const Identification id = identify_with(lexicon, index, utts[i].text, pool, 0, config);
      ++r.identify_trials;
      if (id.rank == 1 && id.tied == 0) ++top1;
      if (id.rank == 1 && id.tied > 0) ++tied;
    }
  }
  r.accuracy = percent(r.correct_symbols, r.predicted_symbols);
  r.recall = percent(r.correct_symbols, r.true_symbols);
  r.top1 = percent(top1, r.identify_trials);
  r.tied_first = percent(tied, r.identify_trials);
  return r;
}

void write_meaning_report(std::ostream& out, const MeaningReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(2) << std::left;
  out << std::setw(24) << "utterances" << r.utterances << '\n'
      << std::setw(24) << "symbol accuracy %" << r.accuracy << '\n'
      << std::setw(24) << "symbol recall %" << r.recall << '\n';
  if (r.identify_trials) {
    out << std::setw(24) << "identification trials" << r.identify_trials << '\n'
        << std::setw(24) << "ranked first alone %" << r.top1 << '\n'
        << std::setw(24) << "tied for first %" << r.tied_first << '\n';
  }
  out.flags(flags);
}

MeaningCorpus synth_corpus(const SynthOptions& options) {
  if (options.vocab_size < 1 || options.utterance_count < 1) throw ContractError("sizes must be >= 1");
  if (options.ambiguity != 1 && options.ambiguity != 3) throw ContractError("ambiguity must be 1 or 3");
  if (options.min_words < 1 || options.max_words < options.min_words) throw ContractError("bad utterance length range");

  std::mt19937_64 rng(options.seed);
  static const std::string kOnsets = "bdfgklmnprstvz";
  static const std::string kVowels = "aeiou";
  static const std::string kCodas = "nrslm";
  auto pick = [&](const std::string& from) {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MeaningCorpus corpus;
  std::unordered_set<std::string> taken;
  std::vector<std::vector<std::string>> forms(options.vocab_size);
  std::vector<SymbolId> symbol(options.vocab_size);
  for (std::size_t r = 0; r < options.vocab_size; ++r) {
    std::string form;
    for (int attempt = 0; form.empty() || taken.contains(form); ++attempt) {
      // Frequent words get short forms; retries grow the form.
      std::size_t syllables = (r < 30 ? 1 : r < 200 ? 2 : 3) + (unit(rng) < 0.3 ? 1 : 0) + attempt / 8;
      form.clear();
      for (std::size_t s = 0; s < syllables; ++s) {
        form += pick(kOnsets);
        form += pick(kVowels);
        if (unit(rng) < 0.2) form += pick(kCodas);
      }
    }
    taken.insert(form);
    forms[r].push_back(form);
    std::string name = form;
    std::transform(name.begin(), name.end(), name.begin(), [](char c) { return static_cast<char>(c - 'a' + 'A'); });
    symbol[r] = corpus.symbols.intern(name);
  }
  for (std::size_t r = 10; r < options.vocab_size; ++r) {
    if (unit(rng) >= options.inflection_rate) continue;
    for (const char* suffix : {"s", "ing"}) {
      const std::string variant = forms[r][0] + suffix;
      if (taken.insert(variant).second) forms[r].push_back(variant);
    }
  }

  std::vector<double> weights(options.vocab_size);
  for (std::size_t r = 0; r < options.vocab_size; ++r) {
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), options.zipf_exponent);
  }
  std::discrete_distribution<std::size_t> zipf(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(options.min_words, options.max_words);

  std::vector<SymbolSet> truths;
  for (std::size_t i = 0; i < options.utterance_count; ++i) {
    MeaningUtterance u;
    std::vector<SymbolId> syms;
    const std::size_t n = length(rng);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = zipf(rng);
      std::size_t variant = 0;
      if (forms[r].size() > 1 && unit(rng) < 0.5) {
        variant = std::uniform_int_distribution<std::size_t>(1, forms[r].size() - 1)(rng);
      }
      const std::string& f = forms[r][variant];
      u.text.insert(u.text.end(), f.begin(), f.end());
      syms.push_back(symbol[r]);
    }
    truths.push_back(make_set(std::move(syms)));
    corpus.utterances.push_back(std::move(u));
  }
  const std::size_t count = options.utterance_count;
  for (std::size_t i = 0; i < count; ++i) {
    MeaningUtterance& u = corpus.utterances[i];
    u.candidates.push_back(truths[i]);
    if (options.ambiguity == 3) {
      u.candidates.push_back(truths[(i + count - 1) % count]);
      u.candidates.push_back(truths[(i + 1) % count]);
    }
  }
  return corpus;
}

}  // namespace mdllex
