#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/counts.hpp"
#include "mdllex/lexicon.hpp"
#include "mdllex/parser.hpp"

namespace mdllex {

struct SearchConfig {
  std::size_t outer_iterations = 10;
  std::size_t inner_em_iterations = 2;
  double add_candidate_min_pair_count = 2.0;
  std::optional<std::size_t> max_candidates_per_round;
  // Structural cost charged per nonterminal definition on top of its
  // component pointers.
  double per_word_overhead_bits = 0.0;
  ParserOptions parser;

  // Throws ContractError on out-of-range settings.
  void validate() const;
};

struct DeltaEstimate {
  std::variant<WordPair, WordId> candidate;
  double delta_bits = 0.0;  // negative = predicted improvement
  std::vector<std::pair<WordId, double>> predicted_counts;  // c'(.) of changed words
  double predicted_total = 0.0;                             // N'
};

// Adjacent pairs with count >= threshold whose concatenation is not already
// a word, by descending pair count.
std::vector<WordPair> propose_candidates(const Lexicon& lexicon, const CountTable& counts,
                                         const SearchConfig& config);

// Estimated DL change of adding w1.w2, assuming all other parses stay put.
DeltaEstimate delta_add(const Lexicon& lexicon, const CountTable& counts, WordPair pair,
                        const SearchConfig& config);

// Estimated DL change of deleting `id`, assuming its definition replaces it
// everywhere.
DeltaEstimate delta_delete(const Lexicon& lexicon, const CountTable& counts, WordId id,
                           const SearchConfig& config);

struct PhaseRecord {
  std::string phase;
  std::size_t iteration = 0;
  std::size_t lexicon_size = 0;  // nonterminals
  double lexicon_dl_bits = 0.0;
  double corpus_dl_bits = 0.0;
  double total_dl_bits = 0.0;
  double bits_per_char = 0.0;
};

// One EM step: parse corpus and definitions, install the re-parsed
// definitions, re-estimate probabilities from the counts.
CorpusParse em_step(Lexicon& lexicon, const Corpus& corpus, const SearchConfig& config);

// Total description length (lexicon + corpus) for a parse whose counts were
// just used to re-estimate `lexicon`.
PhaseRecord measure(const Lexicon& lexicon, const CorpusParse& parse, const Corpus& corpus,
                    const SearchConfig& config, std::string phase, std::size_t iteration);

// Adds every candidate with negative estimated delta, all at once; new
// words start at their predicted count. Returns the new ids.
std::vector<WordId> add_words(Lexicon& lexicon, const CountTable& counts,
                              const SearchConfig& config);

// Deletes words with negative estimated delta, most promising first,
// updating the predicted counts after every deletion. `keep` may veto
// individual deletions. Returns the deleted ids.
std::vector<WordId> delete_words(Lexicon& lexicon, const CountTable& counts,
                                 const SearchConfig& config,
                                 const std::function<bool(WordId)>& keep = {});

struct InductionResult {
  Lexicon lexicon;
  std::vector<PhaseRecord> history;
};

// The full search: start from terminals; each outer iteration runs EM,
// adds words, runs EM again, deletes words.
InductionResult run_induction(const Corpus& corpus, const SearchConfig& config,
                              const std::function<void(const PhaseRecord&)>& on_phase = {});

// Continues the search from an existing lexicon.
void continue_induction(Lexicon& lexicon, const Corpus& corpus, const SearchConfig& config,
                        std::vector<PhaseRecord>& history,
                        const std::function<void(const PhaseRecord&)>& on_phase = {});

}  // namespace mdllex
