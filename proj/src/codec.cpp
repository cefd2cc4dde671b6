#include "mdllex/codec.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>

#include "mdllex/bitio.hpp"
#include "mdllex/error.hpp"

namespace mdllex {

namespace {

constexpr Byte kMagic[4] = {'M', 'D', 'L', 'Z'};
constexpr Byte kVersion = 1;
constexpr unsigned kMaxCodeLength = 60;

// Huffman code lengths for weights given in rank order. Ties merge the
// earliest-created node first, so the result is deterministic.
std::vector<unsigned> huffman_lengths(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  if (n == 1) return {1};
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<std::size_t> parent(2 * n - 1, 0);
  for (std::size_t i = 0; i < n; ++i) heap.emplace(weights[i], i);
  std::size_t next = n;
  while (heap.size() > 1) {
    const Item a = heap.top();
    heap.pop();
    const Item b = heap.top();
    heap.pop();
    parent[a.second] = next;
    parent[b.second] = next;
    heap.emplace(a.first + b.first, next++);
  }
  const std::size_t root = next - 1;
  std::vector<unsigned> depth(2 * n - 1, 0);
  for (std::size_t i = root; i-- > 0;) depth[i] = depth[parent[i]] + 1;
  return {depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(n)};
}

// Canonical decoder state built from code lengths in canonical order.
class CanonicalDecoder {
 public:
  explicit CanonicalDecoder(const std::vector<std::size_t>& length_counts) {
    first_code_.assign(length_counts.size() + 1, 0);
    first_index_.assign(length_counts.size() + 1, 0);
    count_.assign(length_counts.size() + 1, 0);
    std::uint64_t code = 0;
    std::size_t index = 0;
    for (std::size_t l = 1; l <= length_counts.size(); ++l) {
      code <<= 1;
      first_code_[l] = code;
      first_index_[l] = index;
      count_[l] = length_counts[l - 1];
      code += count_[l];
      index += count_[l];
    }
  }

  std::size_t read(BitReader& in) const {
    std::uint64_t code = 0;
    for (std::size_t l = 1; l < first_code_.size(); ++l) {
      code = (code << 1) | (in.read_bit() ? 1u : 0u);
      if (code - first_code_[l] < count_[l] && code >= first_code_[l]) {
        return first_index_[l] + (code - first_code_[l]);
      }
    }
    throw DataError("invalid code in stream");
  }

 private:
  std::vector<std::uint64_t> first_code_;
  std::vector<std::size_t> first_index_;
  std::vector<std::uint64_t> count_;
};

struct Header {
  std::size_t symbol_count = 0;
  std::size_t original_size = 0;
  std::size_t token_count = 0;
  std::vector<std::size_t> length_counts;
  // Per rank: terminal byte (components empty) or component ranks.
  std::vector<std::vector<std::size_t>> components;
  std::vector<Byte> terminal;
  std::vector<std::size_t> surface_length;
  std::size_t body_offset = 0;  // byte offset of the body
};

Header read_header(std::span<const Byte> file, std::unique_ptr<CanonicalDecoder>& decoder) {
  if (file.size() < 6 || !std::equal(std::begin(kMagic), std::end(kMagic), file.begin())) {
    throw DataError("not a compressed file (bad magic)");
  }
  if (file[4] != kVersion) throw DataError("unsupported format version");
  std::size_t pos = 5;
  Header h;
  h.symbol_count = get_varint(file, pos);
  h.original_size = get_varint(file, pos);
  h.token_count = get_varint(file, pos);
  const std::uint64_t max_len = get_varint(file, pos);
  if (max_len == 0 || max_len > kMaxCodeLength) throw DataError("corrupt header: code length");
  std::size_t total = 0;
  std::uint64_t kraft_num = 0;  // sum count_l * 2^(max_len - l)
  for (std::uint64_t l = 1; l <= max_len; ++l) {
    const std::uint64_t c = get_varint(file, pos);
    if (c > file.size() * 8) throw DataError("corrupt header: symbol count");
    h.length_counts.push_back(c);
    total += c;
    kraft_num += c << (max_len - l);
  }
  if (total != h.symbol_count || total == 0) throw DataError("corrupt header: symbol count mismatch");
  if (kraft_num > (std::uint64_t{1} << max_len)) throw DataError("corrupt header: code is not prefix-free");
  if (h.token_count > h.original_size || (h.token_count == 0) != (h.original_size == 0)) {
    throw DataError("corrupt header: sizes");
  }
  decoder = std::make_unique<CanonicalDecoder>(h.length_counts);

  BitReader in(file, pos);
  h.components.resize(total);
  h.terminal.assign(total, 0);
  for (std::size_t r = 0; r < total; ++r) {
    const std::uint64_t k = in.read_gamma() - 1;
    if (k == 0) {
      h.terminal[r] = static_cast<Byte>(in.read_bits(8));
    } else if (k == 1 || k > h.original_size) {
      throw DataError("corrupt record: component count");
    } else {
      h.components[r].resize(k);
      for (auto& c : h.components[r]) c = decoder->read(in);
    }
  }
  in.align();
  h.body_offset = in.byte_position();

  // Surface lengths with cycle detection; every used surface fits in the
  // original text.
  h.surface_length.assign(total, 0);
  std::vector<Byte> state(total, 0);
  for (std::size_t start = 0; start < total; ++start) {
    if (state[start] == 2) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    state[start] = 1;
    while (!stack.empty()) {
      auto& [r, next] = stack.back();
      const auto& comps = h.components[r];
      if (next < comps.size()) {
        const std::size_t c = comps[next++];
        if (state[c] == 1) throw DataError("corrupt lexicon: cyclic definition");
        if (state[c] == 0) {
          state[c] = 1;
          stack.emplace_back(c, 0);
        }
        continue;
      }
      std::size_t len = comps.empty() ? 1 : 0;
      for (std::size_t c : comps) len += h.surface_length[c];
      if (len > std::max<std::size_t>(h.original_size, 1)) throw DataError("corrupt lexicon: surface too long");
      h.surface_length[r] = len;
      state[r] = 2;
      stack.pop_back();
    }
  }
  return h;
}

void expand(const Header& h, std::size_t rank, Bytes& out) {
  std::vector<std::size_t> stack{rank};
  while (!stack.empty()) {
    const std::size_t r = stack.back();
    stack.pop_back();
    if (h.components[r].empty()) {
      out.push_back(h.terminal[r]);
      continue;
    }
    for (auto it = h.components[r].rbegin(); it != h.components[r].rend(); ++it) stack.push_back(*it);
  }
}

void check_trailer(std::span<const Byte> file, const BitReader& in) {
  const std::size_t body_end = in.byte_position();
  if (body_end + 1 != file.size()) throw DataError("corrupt body: unexpected length");
  const unsigned pad = static_cast<unsigned>((8 - in.bit_position() % 8) % 8);
  if (file.back() != pad) throw DataError("corrupt body: padding mismatch");
}

}  // namespace

CodeTable::CodeTable(std::vector<CodeEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].id, i);
}

const CodeEntry& CodeTable::at(WordId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ContractError("word has no code");
  return entries_[it->second];
}

double CodeTable::kraft_sum() const {
  double s = 0.0;
  for (const CodeEntry& e : entries_) s += std::ldexp(1.0, -static_cast<int>(e.length));
  return s;
}

unsigned CodeTable::max_length() const {
  unsigned m = 0;
  for (const CodeEntry& e : entries_) m = std::max(m, e.length);
  return m;
}

void assign_canonical_codes(std::vector<CodeEntry>& entries) {
  std::uint64_t code = 0;
  unsigned prev = 0;
  for (CodeEntry& e : entries) {
    if (prev != 0) ++code;
    code <<= (e.length - prev);
    e.code = code;
    prev = e.length;
  }
}

CodeTable build_code(std::span<const std::pair<WordId, double>> weights) {
  if (weights.empty()) throw ContractError("no live words to code");
  std::vector<std::pair<WordId, double>> ranked(weights.begin(), weights.end());
  for (const auto& [id, c] : ranked) {
    if (!(c > 0.0)) throw ContractError("every coded word needs a positive count");
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<double> w(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) w[i] = ranked[i].second;
  const std::vector<unsigned> lengths = huffman_lengths(w);

  std::vector<CodeEntry> entries(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (lengths[i] > kMaxCodeLength) throw DataError("code length limit exceeded");
    entries[i] = {ranked[i].first, lengths[i], 0};
  }
  // Rank order is kept within each length.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CodeEntry& a, const CodeEntry& b) { return a.length < b.length; });
  assign_canonical_codes(entries);
  return CodeTable(std::move(entries));
}

CodeTable build_code(const Lexicon& lexicon) {
  std::vector<std::pair<WordId, double>> weights;
  for (std::size_t i = 0; i < lexicon.id_bound(); ++i) {
    const auto id = static_cast<WordId>(i);
    if (lexicon.contains(id) && lexicon.word(id).count > 0.0) weights.emplace_back(id, lexicon.word(id).count);
  }
  return build_code(weights);
}

CompressedFile encode(const Corpus& corpus, const Lexicon& lexicon, const ParserOptions& options) {
  const SurfaceIndex index(lexicon, options.max_word_length);
  std::vector<WordId> tokens;
  for (const Span& u : utterances(corpus)) {
    const Parse p = viterbi_parse(lexicon, corpus.view(u), index, options);
    tokens.insert(tokens.end(), p.tokens.begin(), p.tokens.end());
  }

  // Words reachable from the token stream, each with its usage count in the
  // stream plus in the definitions of reachable words.
  std::vector<double> counts(lexicon.id_bound(), 0.0);
  std::vector<char> reached(lexicon.id_bound(), 0);
  std::vector<WordId> frontier;
  for (WordId t : tokens) {
    counts[t] += 1.0;
    if (!reached[t]) {
      reached[t] = 1;
      frontier.push_back(t);
    }
  }
  while (!frontier.empty()) {
    const WordId w = frontier.back();
    frontier.pop_back();
    for (WordId c : lexicon.word(w).components) {
      counts[c] += 1.0;
      if (!reached[c]) {
        reached[c] = 1;
        frontier.push_back(c);
      }
    }
  }
  std::vector<std::pair<WordId, double>> weights;
  double n = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0.0) {
      weights.emplace_back(static_cast<WordId>(i), counts[i]);
      n += counts[i];
    }
  }
  const CodeTable table = build_code(weights);

  CompressedFile out;
  out.symbol_count = table.size();
  out.token_count = tokens.size();
  out.original_size = corpus.bytes.size();
  for (const auto& [id, c] : weights) out.idealized_bits += c * std::log2(n / c);

  Bytes& data = out.data;
  data.assign(std::begin(kMagic), std::end(kMagic));
  data.push_back(kVersion);
  put_varint(data, table.size());
  put_varint(data, corpus.bytes.size());
  put_varint(data, tokens.size());
  const unsigned max_len = table.max_length();
  put_varint(data, max_len);
  std::vector<std::size_t> per_length(max_len + 1, 0);
  for (const CodeEntry& e : table.entries()) ++per_length[e.length];
  for (unsigned l = 1; l <= max_len; ++l) put_varint(data, per_length[l]);

  BitWriter bits(data);
  for (const CodeEntry& e : table.entries()) {
    const Word& w = lexicon.word(e.id);
    bits.write_gamma(w.components.size() + 1);
    if (w.terminal()) {
      bits.write_bits(w.surface[0], 8);
    } else {
      for (WordId c : w.components) {
        const CodeEntry& ce = table.at(c);
        bits.write_bits(ce.code, ce.length);
      }
    }
  }
  bits.align();
  out.lexicon_bits = data.size() * 8;

  for (WordId t : tokens) {
    const CodeEntry& ce = table.at(t);
    bits.write_bits(ce.code, ce.length);
    out.body_bits += ce.length;
  }
  const unsigned pad = bits.align();
  data.push_back(static_cast<Byte>(pad));
  out.padding_bits = pad + 8;
  return out;
}

Bytes decode(std::span<const Byte> file) {
  std::unique_ptr<CanonicalDecoder> decoder;
  const Header h = read_header(file, decoder);
  Bytes out;
  out.reserve(h.original_size);
  BitReader in(file, h.body_offset);
  for (std::size_t t = 0; t < h.token_count; ++t) {
    const std::size_t r = decoder->read(in);
    if (out.size() + h.surface_length[r] > h.original_size) throw DataError("corrupt body: too much output");
    expand(h, r, out);
  }
  if (out.size() != h.original_size) throw DataError("corrupt body: size mismatch");
  check_trailer(file, in);
  return out;
}

std::vector<std::size_t> scan_tokens(std::span<const Byte> file, std::span<const Byte> surface) {
  std::unique_ptr<CanonicalDecoder> decoder;
  const Header h = read_header(file, decoder);

  // Find the rank spelling `surface` by comparing expansions of candidates
  // with the right length only.
  std::optional<std::size_t> target;
  for (std::size_t r = 0; r < h.symbol_count && !target; ++r) {
    if (h.surface_length[r] != surface.size()) continue;
    Bytes s;
    expand(h, r, s);
    if (std::equal(s.begin(), s.end(), surface.begin(), surface.end())) target = r;
  }
  std::vector<std::size_t> offsets;
  if (!target) return offsets;

  BitReader in(file, h.body_offset);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < h.token_count; ++t) {
    const std::size_t r = decoder->read(in);
    if (r == *target) offsets.push_back(offset);
    offset += h.surface_length[r];
  }
  return offsets;
}

DlReport dl_report(const CompressedFile& file) {
  DlReport r;
  r.input_bytes = file.original_size;
  r.idealized_bits = file.idealized_bits;
  r.realized_bits = static_cast<double>(file.data.size()) * 8.0;
  r.lexicon_bits = static_cast<double>(file.lexicon_bits);
  r.body_bits = static_cast<double>(file.body_bits);
  r.padding_bits = static_cast<double>(file.padding_bits);
  if (file.original_size > 0) {
    r.bits_per_char = r.realized_bits / static_cast<double>(file.original_size);
    r.idealized_bits_per_char = r.idealized_bits / static_cast<double>(file.original_size);
  }
  return r;
}

DlReport dl_report(const Corpus& corpus, const Lexicon& lexicon, const ParserOptions& options) {
  return dl_report(encode(corpus, lexicon, options));
}

}  // namespace mdllex
