#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "mdllex/codec.hpp"
#include "mdllex/corpus.hpp"
#include "mdllex/error.hpp"
#include "mdllex/lexicon.hpp"
#include "mdllex/meaning.hpp"
#include "mdllex/metrics.hpp"
#include "mdllex/search.hpp"

namespace mdllex::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Bytes read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, std::span<const Byte> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string fnv1a(std::span<const Byte> data) {
  std::uint64_t h = 1469598103934665603ull;
  for (Byte b : data) {
    h ^= b;
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Options shared by every command that loads a text corpus.
struct CorpusFlags {
  std::string input;
  bool verbatim = false;
  bool lower = false;
  std::size_t max_bytes = 0;
  std::string delimiters;
  bool single_utterance = false;

  void add(CLI::App* app, bool default_verbatim) {
    verbatim = default_verbatim;
    app->add_option("-i,--input", input, "input text file")->required();
    mode_ = app->add_flag("--strip,!--verbatim", strip_,
                          default_verbatim ? "strip delimiters (default: keep every byte)"
                                           : "strip delimiters (default) or keep every byte");
    app->add_flag("--lower", lower, "lowercase ASCII letters");
    app->add_option("--max-bytes", max_bytes, "read at most this many bytes (0 = all)");
    app->add_option("--delimiters", delimiters, "delimiter bytes (default: ASCII whitespace and punctuation)");
    app->add_flag("--single-utterance", single_utterance, "let parses run across newlines");
  }

  Corpus load() {
    if (mode_->count()) verbatim = !strip_;
    CorpusOptions o;
    o.mode = verbatim ? CorpusMode::kKeepVerbatim : CorpusMode::kStripDelimiters;
    o.lowercase = lower;
    if (max_bytes) o.max_bytes = max_bytes;
    o.delimiters = delimiters;
    o.split_utterances_on_newline = !single_utterance;
    return load_corpus(input, o);
  }

 private:
  bool strip_ = true;
  CLI::Option* mode_ = nullptr;
};

struct SearchFlags {
  std::size_t iters = 10;
  std::size_t inner_em = 2;
  double min_pair_count = 2.0;
  std::size_t max_candidates = 0;
  std::size_t max_word_length = 64;
  double overhead_bits = 0.0;
  double min_codelength = 0.0;

  void add(CLI::App* app) {
    app->add_option("--iters", iters, "outer iterations")->capture_default_str();
    app->add_option("--inner-em", inner_em, "EM passes per phase")->capture_default_str();
    app->add_option("--min-pair-count", min_pair_count, "pair count threshold for new words")->capture_default_str();
    app->add_option("--max-candidates", max_candidates, "cap on candidates per round (0 = none)");
    app->add_option("--max-word-length", max_word_length, "longest word in bytes")->capture_default_str();
    app->add_option("--overhead-bits", overhead_bits, "extra bits charged per word definition")
        ->capture_default_str();
    app->add_option("--min-codelength", min_codelength, "lower bound on any token's cost in bits")
        ->capture_default_str();
  }

  SearchConfig config(std::size_t threads) const {
    SearchConfig c;
    c.outer_iterations = iters;
    c.inner_em_iterations = inner_em;
    c.add_candidate_min_pair_count = min_pair_count;
    if (max_candidates) c.max_candidates_per_round = max_candidates;
    c.parser.max_word_length = max_word_length;
    c.parser.threads = threads;
    c.per_word_overhead_bits = overhead_bits;
    c.parser.min_codelength_bits = min_codelength;
    c.validate();
    return c;
  }
};

json phase_json(const PhaseRecord& p) {
  return {{"phase", p.phase},
          {"iteration", p.iteration},
          {"words", p.lexicon_size},
          {"lexicon_bits", p.lexicon_dl_bits},
          {"corpus_bits", p.corpus_dl_bits},
          {"total_bits", p.total_dl_bits},
          {"bits_per_char", p.bits_per_char}};
}

void write_history(const fs::path& dir, const std::vector<PhaseRecord>& history) {
  std::ofstream text = open_out(dir / "history.txt");
  std::ofstream lines = open_out(dir / "history.jsonl");
  text << std::left << std::setw(8) << "phase" << std::right << std::setw(6) << "iter" << std::setw(9) << "words"
       << std::setw(16) << "lexicon_bits" << std::setw(16) << "corpus_bits" << std::setw(16) << "total_bits"
       << std::setw(10) << "bits/char" << '\n';
  for (const PhaseRecord& p : history) {
    text << std::left << std::setw(8) << p.phase << std::right << std::setw(6) << p.iteration << std::setw(9)
         << p.lexicon_size << std::setw(16) << fixed(p.lexicon_dl_bits, 1) << std::setw(16)
         << fixed(p.corpus_dl_bits, 1) << std::setw(16) << fixed(p.total_dl_bits, 1) << std::setw(10)
         << fixed(p.bits_per_char) << '\n';
    lines << phase_json(p).dump() << '\n';
  }
}

json seg_json(const SegReport& r) {
  return {{"recall", r.recall},
          {"type_recall", r.type_recall},
          {"crossing_brackets", r.crossing_brackets},
          {"matched", r.matched},
          {"crossed", r.crossed},
          {"node_count", r.node_count},
          {"true_word_count", r.true_word_count},
          {"nodes_per_true_word", r.nodes_per_true_word}};
}

json dl_json(const DlReport& r) {
  return {{"input_bytes", r.input_bytes},
          {"realized_bits", r.realized_bits},
          {"idealized_bits", r.idealized_bits},
          {"lexicon_bits", r.lexicon_bits},
          {"body_bits", r.body_bits},
          {"padding_bits", r.padding_bits},
          {"bits_per_char", r.bits_per_char},
          {"idealized_bits_per_char", r.idealized_bits_per_char}};
}

json meaning_json(const MeaningReport& r) {
  json j = {{"utterances", r.utterances},
            {"predicted_symbols", r.predicted_symbols},
            {"true_symbols", r.true_symbols},
            {"correct_symbols", r.correct_symbols},
            {"accuracy", r.accuracy},
            {"recall", r.recall}};
  if (r.identify_trials) {
    j["identify_trials"] = r.identify_trials;
    j["top1"] = r.top1;
    j["tied_first"] = r.tied_first;
  }
  return j;
}

void write_dl_report(std::ostream& out, const DlReport& r) {
  out << std::left << std::setw(24) << "input bytes" << r.input_bytes << '\n'
      << std::setw(24) << "compressed bytes" << static_cast<std::uint64_t>(r.realized_bits / 8) << '\n'
      << std::setw(24) << "lexicon bits" << fixed(r.lexicon_bits, 0) << '\n'
      << std::setw(24) << "body bits" << fixed(r.body_bits, 0) << '\n'
      << std::setw(24) << "padding bits" << fixed(r.padding_bits, 0) << '\n'
      << std::setw(24) << "bits/char (realized)" << fixed(r.bits_per_char) << '\n'
      << std::setw(24) << "bits/char (idealized)" << fixed(r.idealized_bits_per_char) << '\n';
}

void append_jsonl(const std::string& path, const json& record) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << record.dump() << '\n';
}

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::optional<std::uint64_t> seed;
  std::string config;

  json to_json(double seconds) const {
    json j;
    j["tool"] = "mdllex";
    j["format"] = 1;
    j["command"] = command;
    j["args"] = args;
    j["config"] = config;
    j["inputs"] = json::array();
    for (const fs::path& p : inputs) {
      const Bytes data = read_bytes(p);
      j["inputs"].push_back({{"path", p.string()}, {"bytes", data.size()}, {"fnv1a64", fnv1a(data)}});
    }
    j["outputs"] = json::array();
    for (const fs::path& p : outputs) j["outputs"].push_back(p.string());
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["seconds"] = seconds;
    return j;
  }
};

MeaningConfig meaning_config(const SearchFlags& s, std::size_t threads, double symbol_cost, std::size_t text_iters,
                             std::size_t joint_iters) {
  MeaningConfig c;
  c.search = s.config(threads);
  c.symbol_cost = symbol_cost;
  c.text_iterations = text_iters;
  c.joint_iterations = joint_iters;
  c.validate();
  return c;
}

MeaningLexicon load_model(const fs::path& dir, SymbolInventory& symbols) {
  MeaningLexicon model = meaning_lexicon(load_lexicon_file(dir / "lexicon.bin"));
  std::ifstream in = open_in(dir / "meanings.tsv");
  load_meanings(in, model, symbols);
  return model;
}

int run_rerun(const fs::path& manifest_path, bool verify, std::ostream& out, std::ostream& err) {
  json m;
  try {
    std::ifstream in = open_in(manifest_path);
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("bad manifest: " + std::string(e.what()));
  }
  if (!m.contains("args") || !m["args"].is_array()) throw DataError("manifest has no args");
  if (verify) {
    for (const json& input : m.value("inputs", json::array())) {
      const std::string path = input.at("path").get<std::string>();
      if (fnv1a(read_bytes(path)) != input.at("fnv1a64").get<std::string>()) {
        throw DataError("input changed since the manifest was written: " + path);
      }
    }
  }
  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "rerun") throw DataError("manifest would rerun itself");
  return run(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical lexicon induction by minimum description length", "mdllex"};
  app.set_config("--config", "", "read options from a TOML/INI file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 1;
  std::string manifest_path;
  app.add_option("--threads", threads, "parser threads (results do not depend on this)")->capture_default_str();
  app.add_option("--manifest", manifest_path, "write a run manifest to this path");

  // induce
  auto* induce = app.add_subcommand("induce", "learn a lexicon from text");
  CorpusFlags induce_corpus;
  SearchFlags induce_search;
  std::string induce_out;
  induce_corpus.add(induce, false);
  induce_search.add(induce);
  induce->add_option("-o,--out-dir", induce_out, "output directory")->required();

  // segment
  auto* segment = app.add_subcommand("segment", "write segmentation trees");
  CorpusFlags segment_corpus_flags;
  std::string segment_lexicon;
  std::string segment_out;
  std::string segment_truth_out;
  bool segment_flat = false;
  std::size_t segment_max_len = 64;
  segment_corpus_flags.add(segment, false);
  segment->add_option("-l,--lexicon", segment_lexicon, "binary lexicon")->required();
  segment->add_option("-o,--out", segment_out, "tree file")->required();
  segment->add_option("--truth-out", segment_truth_out, "also write the true word spans");
  segment->add_flag("--flat", segment_flat, "write top-level tokens separated by spaces instead of trees");
  segment->add_option("--max-word-length", segment_max_len, "longest word in bytes")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "score segmentation trees against true words");
  std::string eval_trees;
  std::string eval_truth;
  std::string eval_jsonl;
  eval->add_option("-t,--trees", eval_trees, "tree file written by segment")->required();
  eval->add_option("--truth", eval_truth, "true word spans, one start<TAB>end per line")->required();
  eval->add_option("--jsonl", eval_jsonl, "also write the report as a JSON line");

  // compress
  auto* compress = app.add_subcommand("compress", "compress a file with a lexicon");
  CorpusFlags compress_corpus;
  SearchFlags compress_search;
  std::string compress_lexicon;
  std::string compress_out;
  std::string compress_jsonl;
  compress_corpus.add(compress, true);
  compress_search.min_codelength = 1.0;  // a prefix code spends at least a bit per token
  compress_search.add(compress);
  compress->add_option("-l,--lexicon", compress_lexicon, "binary lexicon (default: learn one from the input)");
  compress->add_option("-o,--out", compress_out, "compressed file")->required();
  compress->add_option("--jsonl", compress_jsonl, "also write the size report as a JSON line");

  // decompress
  auto* decompress = app.add_subcommand("decompress", "restore a compressed file");
  std::string decompress_in;
  std::string decompress_out;
  decompress->add_option("-i,--input", decompress_in, "compressed file")->required();
  decompress->add_option("-o,--out", decompress_out, "output file")->required();

  // meaning-train
  auto* mtrain = app.add_subcommand("meaning-train", "learn words and their meanings from paired text");
  std::string mtrain_in;
  std::string mtrain_out;
  double symbol_cost = 10.0;
  std::size_t text_iters = 8;
  std::size_t joint_iters = 8;
  SearchFlags mtrain_search;
  mtrain->add_option("-i,--input", mtrain_in, "paired corpus")->required();
  mtrain->add_option("-o,--out-dir", mtrain_out, "model directory")->required();
  mtrain->add_option("--symbol-cost", symbol_cost, "bits per written symbol")->capture_default_str();
  mtrain->add_option("--text-iters", text_iters, "text-only iterations")->capture_default_str();
  mtrain->add_option("--joint-iters", joint_iters, "joint iterations")->capture_default_str();
  mtrain_search.add(mtrain);

  // meaning-eval
  auto* meval = app.add_subcommand("meaning-eval", "score inferred meanings");
  std::string meval_in;
  std::string meval_model;
  std::size_t meval_pool = 20;
  double meval_cost = 10.0;
  std::string meval_jsonl;
  meval->add_option("-i,--input", meval_in, "paired corpus; the first set of each line is the truth")->required();
  meval->add_option("-m,--model", meval_model, "model directory from meaning-train")->required();
  meval->add_option("--pool", meval_pool, "identification pool size (0 = skip)")->capture_default_str();
  meval->add_option("--symbol-cost", meval_cost, "bits per written symbol")->capture_default_str();
  meval->add_option("--jsonl", meval_jsonl, "also write the report as a JSON line");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic paired corpus");
  SynthOptions synth_opts;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--vocab", synth_opts.vocab_size, "root words")->capture_default_str();
  synth->add_option("--count", synth_opts.utterance_count, "utterances")->capture_default_str();
  synth->add_option("--ambiguity", synth_opts.ambiguity, "candidate meanings per utterance")
      ->check(CLI::IsMember({1, 3}))
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "random seed")->required();
  synth->add_option("-o,--out", synth_out, "output file")->required();

  // rerun
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  std::string rerun_manifest;
  bool rerun_no_verify = false;
  rerun->add_option("manifest", rerun_manifest, "manifest.json")->required();
  rerun->add_flag("--no-verify", rerun_no_verify, "skip the input hash check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  Manifest manifest;
  manifest.args = args;
  std::vector<fs::path> default_manifests;

  if (rerun->parsed()) return run_rerun(rerun_manifest, !rerun_no_verify, out, err);

  if (induce->parsed()) {
    manifest.command = "induce";
    const SearchConfig cfg = induce_search.config(threads);
    const Corpus corpus = induce_corpus.load();
    if (corpus.bytes.empty()) throw DataError("input has no text");
    const fs::path dir = induce_out;
    make_dir(dir);
    InductionResult result = run_induction(corpus, cfg);
    save_lexicon_file(result.lexicon, dir / "lexicon.bin");
    std::ofstream dump = open_out(dir / "lexicon.txt");
    dump_lexicon(result.lexicon, dump);
    write_history(dir, result.history);
    const PhaseRecord& last = result.history.back();
    out << "words " << result.lexicon.nonterminal_count() << ", total " << fixed(last.total_dl_bits, 1)
        << " bits, " << fixed(last.bits_per_char) << " bits/char\n";
    manifest.inputs = {induce_corpus.input};
    manifest.outputs = {dir / "lexicon.bin", dir / "lexicon.txt", dir / "history.txt", dir / "history.jsonl"};
    default_manifests.push_back(dir / "manifest.json");
    manifest.config = induce->config_to_str(true, false);
  } else if (segment->parsed()) {
    manifest.command = "segment";
    const Corpus corpus = segment_corpus_flags.load();
    const Lexicon lexicon = load_lexicon_file(segment_lexicon);
    ParserOptions opts;
    opts.max_word_length = segment_max_len;
    const std::vector<SegmentationTree> trees = segment_corpus(lexicon, corpus, opts);
    std::ofstream f = open_out(segment_out);
    if (segment_flat) {
      for (const SegmentationTree& t : trees) {
        for (std::size_t k = 0; k < t.tokens.size(); ++k) {
          f << (k ? " " : "") << printable(lexicon.surface(t.tokens[k].id));
        }
        f << '\n';
      }
    } else {
      write_trees(f, lexicon, trees);
    }
    manifest.inputs = {segment_corpus_flags.input, segment_lexicon};
    manifest.outputs = {segment_out};
    if (!segment_truth_out.empty()) {
      std::ofstream t = open_out(segment_truth_out);
      write_truth(t, corpus.true_spans);
      manifest.outputs.push_back(segment_truth_out);
    }
    out << "segmented " << trees.size() << " utterances\n";
    manifest.config = segment->config_to_str(true, false);
  } else if (eval->parsed()) {
    manifest.command = "eval";
    std::ifstream tf = open_in(eval_trees);
    Bytes text;
    const std::vector<SegmentationTree> trees = read_trees(tf, &text);
    const std::vector<Span> truth = read_truth_file(eval_truth);
    if (truth.empty()) throw DataError("truth file has no spans: " + eval_truth);
    if (!spans_valid(truth, text.size())) throw DataError("truth spans do not fit the tree text");
    const SegReport report = evaluate(trees, text, truth);
    write_report(out, report);
    append_jsonl(eval_jsonl, seg_json(report));
    manifest.inputs = {eval_trees, eval_truth};
    if (!eval_jsonl.empty()) manifest.outputs = {eval_jsonl};
    manifest.config = eval->config_to_str(true, false);
  } else if (compress->parsed()) {
    manifest.command = "compress";
    const Corpus corpus = compress_corpus.load();
    Lexicon lexicon;
    const SearchConfig cfg = compress_search.config(threads);
    if (!compress_lexicon.empty()) {
      lexicon = load_lexicon_file(compress_lexicon);
      manifest.inputs.push_back(compress_lexicon);
    } else if (!corpus.bytes.empty()) {
      lexicon = run_induction(corpus, cfg).lexicon;
    }
    const CompressedFile file = encode(corpus, lexicon, cfg.parser);
    write_bytes(compress_out, file.data);
    const DlReport report = dl_report(file);
    write_dl_report(out, report);
    append_jsonl(compress_jsonl, dl_json(report));
    manifest.inputs.insert(manifest.inputs.begin(), compress_corpus.input);
    manifest.outputs = {compress_out};
    if (!compress_jsonl.empty()) manifest.outputs.push_back(compress_jsonl);
    manifest.config = compress->config_to_str(true, false);
  } else if (decompress->parsed()) {
    manifest.command = "decompress";
    const Bytes data = read_bytes(decompress_in);
    write_bytes(decompress_out, decode(data));
    manifest.inputs = {decompress_in};
    manifest.outputs = {decompress_out};
  } else if (mtrain->parsed()) {
    manifest.command = "meaning-train";
    const MeaningConfig cfg = meaning_config(mtrain_search, threads, symbol_cost, text_iters, joint_iters);
    const MeaningCorpus corpus = read_meaning_corpus_file(mtrain_in);
    const fs::path dir = mtrain_out;
    make_dir(dir);
    std::ofstream history = open_out(dir / "history.jsonl");
    const MeaningModel model = train_joint(corpus, cfg, [&](const MeaningPhase& p) {
      history << json{{"phase", p.phase},
                      {"iteration", p.iteration},
                      {"words", p.lexicon_size},
                      {"perturbations", p.perturbations},
                      {"text_bits", p.text_bits},
                      {"meaning_bits", p.meaning_bits}}
                     .dump()
              << '\n';
    });
    save_lexicon_file(model.lexicon.text, dir / "lexicon.bin");
    std::ofstream dump = open_out(dir / "lexicon.txt");
    dump_lexicon(model.lexicon.text, dump);
    std::ofstream meanings = open_out(dir / "meanings.tsv");
    save_meanings(meanings, model.lexicon, corpus.symbols);
    const MeaningReport report = evaluate_meaning(model.lexicon, corpus, cfg);
    write_meaning_report(out, report);
    manifest.inputs = {mtrain_in};
    manifest.outputs = {dir / "lexicon.bin", dir / "lexicon.txt", dir / "meanings.tsv", dir / "history.jsonl"};
    default_manifests.push_back(dir / "manifest.json");
    manifest.config = mtrain->config_to_str(true, false);
  } else if (meval->parsed()) {
    manifest.command = "meaning-eval";
    MeaningCorpus corpus = read_meaning_corpus_file(meval_in);
    const MeaningLexicon model = load_model(meval_model, corpus.symbols);
    MeaningConfig cfg;
    cfg.symbol_cost = meval_cost;
    cfg.search.parser.threads = threads;
    cfg.validate();
    const MeaningReport report = evaluate_meaning(model, corpus, cfg, meval_pool);
    write_meaning_report(out, report);
    append_jsonl(meval_jsonl, meaning_json(report));
    manifest.inputs = {meval_in, fs::path(meval_model) / "lexicon.bin", fs::path(meval_model) / "meanings.tsv"};
    if (!meval_jsonl.empty()) manifest.outputs = {meval_jsonl};
    manifest.config = meval->config_to_str(true, false);
  } else if (synth->parsed()) {
    manifest.command = "synth";
    synth_opts.seed = synth_seed;
    const MeaningCorpus corpus = synth_corpus(synth_opts);
    std::ofstream f = open_out(synth_out);
    write_meaning_corpus(f, corpus);
    out << "wrote " << corpus.utterances.size() << " utterances\n";
    manifest.seed = synth_seed;
    manifest.outputs = {synth_out};
    manifest.config = synth->config_to_str(true, false);
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!manifest_path.empty()) default_manifests.push_back(manifest_path);
  if (!default_manifests.empty()) {
    // The stored command line never writes manifests itself.
    std::vector<std::string> clean;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--manifest") {
        ++i;
        continue;
      }
      if (args[i].rfind("--manifest=", 0) == 0) continue;
      clean.push_back(args[i]);
    }
    manifest.args = clean;
    const json record = manifest.to_json(seconds);
    for (const fs::path& p : default_manifests) {
      std::ofstream f = open_out(p);
      f << record.dump(2) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ContractError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace mdllex::cli
