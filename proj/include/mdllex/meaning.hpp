#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/lexicon.hpp"
#include "mdllex/parser.hpp"
#include "mdllex/search.hpp"

namespace mdllex {

using SymbolId = std::uint32_t;
// Sorted, duplicate-free.
using SymbolSet = std::vector<SymbolId>;

SymbolSet make_set(std::vector<SymbolId> symbols);
SymbolSet set_union(const SymbolSet& a, const SymbolSet& b);
SymbolSet set_minus(const SymbolSet& a, const SymbolSet& b);
SymbolSet set_intersection(const SymbolSet& a, const SymbolSet& b);
std::size_t symmetric_difference_size(const SymbolSet& a, const SymbolSet& b);
bool set_contains(const SymbolSet& a, SymbolId s);
std::uint64_t set_hash(const SymbolSet& a);

class SymbolInventory {
 public:
  SymbolId intern(const std::string& name);
  std::optional<SymbolId> find(const std::string& name) const;
  const std::string& name(SymbolId id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
};

struct MeaningUtterance {
  Bytes text;
  std::vector<SymbolSet> candidates;  // uniform prior
  std::size_t true_meaning = 0;       // evaluation only
};

struct MeaningCorpus {
  SymbolInventory symbols;
  std::vector<MeaningUtterance> utterances;
};

// Concatenated utterance texts, one utterance per bound.
Corpus text_corpus(const MeaningCorpus& corpus);

// Lines of "text<TAB>sym,sym<TAB>sym,..."; the first set is the true one.
MeaningCorpus read_meaning_corpus(std::istream& in);
MeaningCorpus read_meaning_corpus_file(const std::filesystem::path& path);
void write_meaning_corpus(std::ostream& out, const MeaningCorpus& corpus);

std::string format_set(const SymbolInventory& symbols, const SymbolSet& set);

// A text lexicon whose words also carry meanings. The derived meaning of
// every word is stored; its perturbations are the differences from the
// union of its components' meanings, so re-representing a word (new
// definition, deleted component) never changes any derived meaning.
struct MeaningLexicon {
  Lexicon text;
  std::vector<SymbolSet> meanings;  // by WordId; terminals stay empty

  const SymbolSet& meaning(WordId id) const;
  SymbolSet component_union(WordId id) const;
  SymbolSet plus(WordId id) const { return set_minus(meaning(id), component_union(id)); }
  SymbolSet minus(WordId id) const { return set_minus(component_union(id), meaning(id)); }
  std::size_t perturbation_size(WordId id) const;
  std::size_t total_perturbation_size() const;

  // Gives words added since the last call (ids past meanings.size()) the
  // plain union of their components' meanings.
  void sync();

  // Replaces w's perturbations and re-derives the meanings of every word
  // above it, whose own perturbations are kept.
  void set_perturbation(WordId id, const SymbolSet& plus, const SymbolSet& minus);
};

MeaningLexicon meaning_lexicon(Lexicon text);

// Text form: one "id<TAB>SYM,SYM" line per nonterminal with a non-empty
// meaning. Loading interns unknown symbol names.
void save_meanings(std::ostream& out, const MeaningLexicon& lexicon, const SymbolInventory& symbols);
void load_meanings(std::istream& in, MeaningLexicon& lexicon, SymbolInventory& symbols);

// Recursive evaluation of a word's meaning: union of the components'
// meanings, plus its added symbols, minus its removed ones.
SymbolSet meaning_of(const MeaningLexicon& lexicon, WordId id);

struct MeaningConfig {
  double symbol_cost = 10.0;
  std::size_t text_iterations = 8;
  std::size_t joint_iterations = 8;
  SearchConfig search;
  // Add-moves are tried only for (word, symbol) pairs that co-occur in at
  // least this many utterances and in this fraction of the word's ones.
  double min_cooccurrence = 2.0;
  double min_cooccurrence_ratio = 0.3;
  std::size_t max_sweeps = 30;

  void validate() const;
};

// Union of the meanings of the tokens.
SymbolSet parse_meaning(const MeaningLexicon& lexicon, std::span<const WordId> tokens);

// Token codelengths + symbol_cost * |meaning xor parse meaning| +
// log2(candidate_count).
double joint_dl(const MeaningLexicon& lexicon, std::span<const WordId> tokens, const SymbolSet& meaning,
                std::size_t candidate_count, const MeaningConfig& config);

struct JointParse {
  std::vector<WordId> tokens;
  std::size_t candidate = 0;
  double bits = 0.0;
};

// Best parse of `text` for the given meaning.
JointParse joint_parse(const MeaningLexicon& lexicon, const SurfaceIndex& index, std::span<const Byte> text,
                       const SymbolSet& meaning, std::size_t candidate_count, const MeaningConfig& config);
// Best (parse, candidate) pair; ties between candidates go to the smaller
// set hash, never to the candidate position.
JointParse joint_parse(const MeaningLexicon& lexicon, const SurfaceIndex& index,
                       const MeaningUtterance& utterance, const MeaningConfig& config);

// Utterance parses held fixed while symbols are re-assigned.
struct ParsedMeaningCorpus {
  std::vector<std::vector<WordId>> tokens;  // per utterance
  double text_bits = 0.0;                   // sum of token codelengths
};

ParsedMeaningCorpus joint_parse_corpus(const MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                                       const MeaningConfig& config, CountTable* counts = nullptr);

// Perturbation bits plus every utterance's best-candidate residual bits
// and choice bits, for fixed parses.
double meaning_dl(const MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                  const ParsedMeaningCorpus& parses, const MeaningConfig& config);

struct ReassignStats {
  std::size_t sweeps = 0;
  std::size_t accepted = 0;
  double bits_before = 0.0;
  double bits_after = 0.0;
};

// Greedy local search over symbol placement with parses fixed: add or
// remove a symbol at a word, and move a word's added or removed symbol to
// one of its components or to a word built from it. Stops when a whole
// sweep finds no improving move.
ReassignStats reassign_symbols(MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                               const ParsedMeaningCorpus& parses, const MeaningConfig& config);

struct MeaningPhase {
  std::string phase;
  std::size_t iteration = 0;
  std::size_t lexicon_size = 0;
  std::size_t perturbations = 0;
  double text_bits = 0.0;
  double meaning_bits = 0.0;
};

struct MeaningModel {
  MeaningLexicon lexicon;
  ParsedMeaningCorpus parses;  // the parses the final symbol placement was optimised for
  std::vector<PhaseRecord> text_history;
  std::vector<MeaningPhase> history;
};

// Text-only induction, then joint iterations: joint parsing, word
// addition, symbol re-assignment and word deletion.
MeaningModel train_joint(const MeaningCorpus& corpus, const MeaningConfig& config,
                         const std::function<void(const MeaningPhase&)>& on_phase = {});

// Union of the meanings along the text-only Viterbi parse.
SymbolSet infer_meaning(const MeaningLexicon& lexicon, std::span<const Byte> text,
                        const ParserOptions& options = {});

struct Identification {
  std::size_t rank = 0;  // 1 + number of pool entries strictly better than the truth
  std::size_t tied = 0;  // other entries with the same cost as the truth
  std::vector<double> bits;
};

// Ranks pool[truth] among the pool by joint DL.
Identification identify(const MeaningLexicon& lexicon, std::span<const Byte> text,
                        std::span<const SymbolSet> pool, std::size_t truth, const MeaningConfig& config);

struct MeaningReport {
  std::size_t utterances = 0;
  std::size_t predicted_symbols = 0;
  std::size_t true_symbols = 0;
  std::size_t correct_symbols = 0;
  double accuracy = 0.0;  // percent of predicted symbols that are true
  double recall = 0.0;    // percent of true symbols predicted
  std::size_t identify_trials = 0;
  double top1 = 0.0;        // percent ranked first alone
  double tied_first = 0.0;  // percent ranked first with ties
};

// Symbol accuracy and recall of inferred meanings against the true
// candidates; with pool_size > 0 also identification of each utterance's
// meaning among the true meanings of the pool_size - 1 preceding ones.
MeaningReport evaluate_meaning(const MeaningLexicon& lexicon, const MeaningCorpus& corpus,
                               const MeaningConfig& config, std::size_t pool_size = 0);

void write_meaning_report(std::ostream& out, const MeaningReport& report);

struct SynthOptions {
  std::size_t vocab_size = 500;
  std::size_t utterance_count = 10000;
  std::size_t ambiguity = 1;  // 1 or 3
  std::uint64_t seed = 1;
  std::size_t min_words = 2;
  std::size_t max_words = 7;
  double zipf_exponent = 1.0;
  double inflection_rate = 0.3;  // share of roots that also get suffixed forms
};

// Seeded synthetic corpus: Zipf-distributed root words with made-up
// lowercase forms, utterances written without delimiters, meaning = the
// set of root symbols. With ambiguity 3 the meanings of the neighbouring
// utterances are added as distractors.
MeaningCorpus synth_corpus(const SynthOptions& options);

}  // namespace mdllex
