#include "mdllex/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mdllex/error.hpp"

namespace mdllex {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

constexpr WordId kNewWord = std::numeric_limits<WordId>::max();

struct CountChange {
  WordId id;
  double before;
  double after;
};

// Extra bits the codelength floor adds to c tokens of a word when the
// total is n.
double floor_excess(double c, double n, double floor) {
  if (!(c > 0.0) || floor <= 0.0) return 0.0;
  const double cl = std::log2(n / c);
  return cl < floor ? c * (floor - cl) : 0.0;
}

// Change in sum_w c(w) cost(w) when `changes` replace the old counts and
// the total moves from n_old to n_new; cost is log2(N / c) raised to the
// floor. Words not in `changes` keep their counts.
double cost_change(const CountTable& counts, double n_old, double n_new,
                   const std::vector<CountChange>& changes, double floor) {
  double delta = xlogx(n_new) - xlogx(n_old);
  for (const CountChange& ch : changes) delta -= xlogx(ch.after) - xlogx(ch.before);
  if (floor <= 0.0) return delta;
  for (const CountChange& ch : changes) {
    delta += floor_excess(ch.after, n_new, floor) - floor_excess(ch.before, n_old, floor);
  }
  for (std::size_t i = 0; i < counts.word_counts.size(); ++i) {
    const double c = counts.word_counts[i];
    if (c <= 0.0) continue;
    const auto id = static_cast<WordId>(i);
    if (std::any_of(changes.begin(), changes.end(), [&](const CountChange& ch) { return ch.id == id; })) continue;
    delta += floor_excess(c, n_new, floor) - floor_excess(c, n_old, floor);
  }
  return delta;
}

}  // namespace

void SearchConfig::validate() const {
  if (inner_em_iterations < 1) throw ContractError("inner_em_iterations must be >= 1");
  if (add_candidate_min_pair_count < 1.0) throw ContractError("min pair count must be >= 1");
  if (max_candidates_per_round && *max_candidates_per_round < 1) {
    throw ContractError("max_candidates_per_round must be >= 1");
  }
  if (parser.max_word_length < 2) throw ContractError("max word length must be >= 2");
  if (per_word_overhead_bits < 0.0) throw ContractError("overhead must be non-negative");
  if (!(parser.min_codelength_bits >= 0.0)) throw ContractError("codelength floor must be non-negative");
}

std::vector<WordPair> propose_candidates(const Lexicon& lexicon, const CountTable& counts,
                                         const SearchConfig& config) {
  std::vector<std::pair<double, std::uint64_t>> ranked;
  Bytes joined;
  for (const auto& [key, c] : counts.pair_counts) {
    if (c < config.add_candidate_min_pair_count) continue;
    const WordPair p = WordPair::from_key(key);
    if (!lexicon.contains(p.first) || !lexicon.contains(p.second)) continue;
    const Bytes& a = lexicon.surface(p.first);
    const Bytes& b = lexicon.surface(p.second);
    if (a.size() + b.size() > config.parser.max_word_length) continue;
    joined.assign(a.begin(), a.end());
    joined.insert(joined.end(), b.begin(), b.end());
    if (lexicon.find(joined)) continue;
    ranked.emplace_back(c, key);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  if (config.max_candidates_per_round && ranked.size() > *config.max_candidates_per_round) {
    ranked.resize(*config.max_candidates_per_round);
  }
  std::vector<WordPair> out;
  out.reserve(ranked.size());
  for (const auto& [c, key] : ranked) out.push_back(WordPair::from_key(key));
  return out;
}

DeltaEstimate delta_add(const Lexicon& lexicon, const CountTable& counts, WordPair pair,
                        const SearchConfig& config) {
  const double cw = counts.pair_count(pair);
  if (!(cw > 0.0)) throw ContractError("candidate pair never occurs");
  (void)lexicon;

  DeltaEstimate est;
  est.candidate = pair;
  const double n = counts.total;
  std::vector<CountChange> changes;
  if (pair.first == pair.second) {
    const double c = counts.count(pair.first);
    const double after = std::max(0.0, c - 2.0 * cw + 2.0);
    changes.push_back({pair.first, c, after});
    est.predicted_counts.emplace_back(pair.first, after);
  } else {
    for (WordId w : {pair.first, pair.second}) {
      const double c = counts.count(w);
      const double after = std::max(0.0, c - cw + 1.0);
      changes.push_back({w, c, after});
      est.predicted_counts.emplace_back(w, after);
    }
  }
  changes.push_back({kNewWord, 0.0, cw});
  double n_new = n;
  for (const CountChange& ch : changes) n_new += ch.after - ch.before;
  est.predicted_total = n_new;
  est.delta_bits = cost_change(counts, n, n_new, changes, config.parser.min_codelength_bits) +
                   config.per_word_overhead_bits;
  return est;
}

DeltaEstimate delta_delete(const Lexicon& lexicon, const CountTable& counts, WordId id,
                           const SearchConfig& config) {
  const Word& w = lexicon.word(id);
  if (w.terminal()) throw ContractError("cannot delete a terminal");

  std::map<WordId, double> multiplicity;
  for (WordId c : w.components) multiplicity[c] += 1.0;

  DeltaEstimate est;
  est.candidate = id;
  const double cw = counts.count(id);
  const double n = counts.total;
  std::vector<CountChange> changes;
  changes.push_back({id, cw, 0.0});
  est.predicted_counts.emplace_back(id, 0.0);
  for (const auto& [u, m] : multiplicity) {
    const double c = counts.count(u);
    const double after = std::max(0.0, c + (cw - 1.0) * m);
    changes.push_back({u, c, after});
    est.predicted_counts.emplace_back(u, after);
  }
  double n_new = n;
  for (const CountChange& ch : changes) n_new += ch.after - ch.before;
  est.predicted_total = n_new;
  est.delta_bits = cost_change(counts, n, n_new, changes, config.parser.min_codelength_bits) -
                   config.per_word_overhead_bits;
  return est;
}

CorpusParse em_step(Lexicon& lexicon, const Corpus& corpus, const SearchConfig& config) {
  CorpusParse parse = parse_corpus(lexicon, corpus, config.parser);
  apply_definitions(lexicon, parse);
  lexicon.reestimate(parse.counts);
  return parse;
}

PhaseRecord measure(const Lexicon& lexicon, const CorpusParse& parse, const Corpus& corpus,
                    const SearchConfig& config, std::string phase, std::size_t iteration) {
  PhaseRecord r;
  r.phase = std::move(phase);
  r.iteration = iteration;
  r.lexicon_size = lexicon.nonterminal_count();
  r.lexicon_dl_bits = config.per_word_overhead_bits * static_cast<double>(r.lexicon_size);
  for (WordId id : lexicon.nonterminals()) {
    for (WordId c : lexicon.word(id).components) r.lexicon_dl_bits += token_cost(lexicon, c, config.parser);
  }
  r.total_dl_bits = description_length(lexicon, parse.counts, config.parser) +
                    config.per_word_overhead_bits * static_cast<double>(r.lexicon_size);
  r.corpus_dl_bits = r.total_dl_bits - r.lexicon_dl_bits;
  r.bits_per_char = corpus.size() ? r.total_dl_bits / static_cast<double>(corpus.size()) : 0.0;
  return r;
}

std::vector<WordId> add_words(Lexicon& lexicon, const CountTable& counts,
                              const SearchConfig& config) {
  std::vector<std::pair<WordPair, double>> accepted;
  for (const WordPair& p : propose_candidates(lexicon, counts, config)) {
    if (delta_add(lexicon, counts, p, config).delta_bits < 0.0) {
      accepted.emplace_back(p, counts.pair_count(p));
    }
  }
  std::vector<double> next = counts.word_counts;
  next.resize(lexicon.id_bound(), 0.0);
  std::vector<WordId> added;
  for (const auto& [p, cw] : accepted) {
    const WordId parts[2] = {p.first, p.second};
    Bytes joined = lexicon.surface(p.first);
    const Bytes& tail = lexicon.surface(p.second);
    joined.insert(joined.end(), tail.begin(), tail.end());
    // Two candidates can spell the same surface, e.g. (a,bc) and (ab,c).
    if (lexicon.find(joined)) continue;
    const WordId id = lexicon.add_word(parts);
    next.resize(lexicon.id_bound(), 0.0);
    next[id] = cw;
    added.push_back(id);
  }
  if (!added.empty()) lexicon.reestimate(next);
  return added;
}

std::vector<WordId> delete_words(Lexicon& lexicon, const CountTable& counts,
                                 const SearchConfig& config,
                                 const std::function<bool(WordId)>& keep) {
  std::vector<std::pair<double, WordId>> ranked;
  for (WordId id : lexicon.nonterminals()) {
    if (keep && keep(id)) continue;
    const double d = delta_delete(lexicon, counts, id, config).delta_bits;
    if (d < 0.0) ranked.emplace_back(d, id);
  }
  std::sort(ranked.begin(), ranked.end());

  CountTable running;
  running.word_counts = counts.word_counts;
  running.word_counts.resize(lexicon.id_bound(), 0.0);
  running.total = counts.total;

  std::vector<WordId> deleted;
  for (const auto& [first_estimate, id] : ranked) {
    // Earlier deletions may have changed this word's definition and counts.
    const DeltaEstimate est = delta_delete(lexicon, running, id, config);
    if (est.delta_bits >= 0.0) continue;
    for (const auto& [w, c] : est.predicted_counts) running.word_counts[w] = c;
    running.total = est.predicted_total;
    lexicon.delete_word(id);
    deleted.push_back(id);
  }
  if (!deleted.empty() && running.total > 0.0) lexicon.reestimate(running.word_counts);
  return deleted;
}

void continue_induction(Lexicon& lexicon, const Corpus& corpus, const SearchConfig& config,
                        std::vector<PhaseRecord>& history,
                        const std::function<void(const PhaseRecord&)>& on_phase) {
  config.validate();
  auto record = [&](PhaseRecord r) {
    if (on_phase) on_phase(r);
    history.push_back(std::move(r));
  };

  CorpusParse parse = em_step(lexicon, corpus, config);
  if (history.empty()) record(measure(lexicon, parse, corpus, config, "init", 0));

  for (std::size_t it = 1; it <= config.outer_iterations; ++it) {
    for (std::size_t e = 0; e < config.inner_em_iterations; ++e) parse = em_step(lexicon, corpus, config);
    record(measure(lexicon, parse, corpus, config, "em", it));

    add_words(lexicon, parse.counts, config);
    for (std::size_t e = 0; e < config.inner_em_iterations; ++e) parse = em_step(lexicon, corpus, config);
    record(measure(lexicon, parse, corpus, config, "add", it));

    delete_words(lexicon, parse.counts, config);
    parse = em_step(lexicon, corpus, config);
    record(measure(lexicon, parse, corpus, config, "delete", it));
  }
}

InductionResult run_induction(const Corpus& corpus, const SearchConfig& config,
                              const std::function<void(const PhaseRecord&)>& on_phase) {
  if (corpus.bytes.empty()) throw ContractError("empty corpus");
  InductionResult result;
  continue_induction(result.lexicon, corpus, config, result.history, on_phase);
  return result;
}

}  // namespace mdllex
