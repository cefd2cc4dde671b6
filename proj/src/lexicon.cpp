#include "mdllex/lexicon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mdllex/bitio.hpp"
#include "mdllex/error.hpp"

namespace mdllex {

namespace {

std::string key_of(std::span<const Byte> bytes) {
  return std::string(bytes.begin(), bytes.end());
}

constexpr Byte kLexiconMagic[4] = {'M', 'D', 'L', 'X'};
constexpr Byte kLexiconVersion = 1;

}  // namespace

Lexicon::Lexicon() {
  words_.resize(kTerminalCount);
  for (std::size_t b = 0; b < kTerminalCount; ++b) {
    Word w;
    w.surface = {static_cast<Byte>(b)};
    w.probability = 1.0 / kTerminalCount;
    w.codelength = std::log2(static_cast<double>(kTerminalCount));
    words_[b] = std::move(w);
  }
  live_ = kTerminalCount;
}

Lexicon new_lexicon() { return Lexicon(); }

const Word& Lexicon::word(WordId id) const {
  if (!contains(id)) throw ContractError("unknown word id " + std::to_string(id));
  return *words_[id];
}

Word& Lexicon::mutable_word(WordId id) {
  if (!contains(id)) throw ContractError("unknown word id " + std::to_string(id));
  return *words_[id];
}

std::optional<WordId> Lexicon::find(std::span<const Byte> surface) const {
  if (surface.size() == 1) return terminal_id(surface[0]);
  auto it = by_surface_.find(key_of(surface));
  if (it == by_surface_.end()) return std::nullopt;
  return it->second;
}

void Lexicon::check_components(std::span<const WordId> components,
                               std::size_t max_length) const {
  if (components.size() < 2) throw ContractError("a nonterminal needs at least two components");
  for (WordId c : components) {
    if (!contains(c)) throw ContractError("unknown component id " + std::to_string(c));
    if (words_[c]->surface.size() >= max_length) {
      throw ContractError("component is not shorter than the word it defines");
    }
  }
}

Bytes Lexicon::concat(std::span<const WordId> components) const {
  Bytes out;
  for (WordId c : components) {
    const Bytes& s = word(c).surface;
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

WordId Lexicon::add_word(std::span<const WordId> components) {
  check_components(components, std::numeric_limits<std::size_t>::max());
  Bytes surface = concat(components);
  std::string key = key_of(surface);
  if (by_surface_.contains(key)) throw ContractError("duplicate definition for \"" + printable(surface) + "\"");

  const auto id = static_cast<WordId>(words_.size());
  Word w;
  w.components.assign(components.begin(), components.end());
  w.surface = std::move(surface);
  words_.push_back(std::move(w));
  by_surface_.emplace(std::move(key), id);
  ++live_;
  return id;
}

void Lexicon::set_components(WordId id, std::vector<WordId> components) {
  Word& w = mutable_word(id);
  if (w.terminal()) throw ContractError("terminals have no definition");
  check_components(components, w.surface.size());
  if (concat(components) != w.surface) throw ContractError("new definition changes the surface");
  w.components = std::move(components);
}

std::vector<WordId> Lexicon::delete_word(WordId id) {
  Word& victim = mutable_word(id);
  if (victim.terminal()) throw ContractError("cannot delete a terminal");
  const std::vector<WordId> replacement = victim.components;

  std::vector<WordId> affected;
  for (std::size_t i = kTerminalCount; i < words_.size(); ++i) {
    if (!words_[i] || i == id) continue;
    auto& comps = words_[i]->components;
    if (std::find(comps.begin(), comps.end(), id) == comps.end()) continue;
    std::vector<WordId> spliced;
    spliced.reserve(comps.size() + replacement.size());
    for (WordId c : comps) {
      if (c == id) {
        spliced.insert(spliced.end(), replacement.begin(), replacement.end());
      } else {
        spliced.push_back(c);
      }
    }
    comps = std::move(spliced);
    affected.push_back(static_cast<WordId>(i));
  }

  total_count_ -= victim.count;
  by_surface_.erase(key_of(victim.surface));
  words_[id].reset();
  --live_;
  return affected;
}

void Lexicon::reestimate(std::span<const double> counts) {
  double total = 0.0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!words_[i]) continue;
    const double c = i < counts.size() ? counts[i] : 0.0;
    if (c < 0.0) throw ContractError("negative count");
    total += c;
  }
  if (!(total > 0.0)) throw ContractError("cannot reestimate from all-zero counts");
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!words_[i]) continue;
    Word& w = *words_[i];
    w.count = i < counts.size() ? counts[i] : 0.0;
    w.probability = w.count / total;
    w.codelength = w.count > 0.0 ? -std::log2(w.probability) : kInfiniteBits;
  }
  total_count_ = total;
}

std::vector<WordId> Lexicon::nonterminals() const {
  std::vector<WordId> out;
  for (std::size_t i = kTerminalCount; i < words_.size(); ++i) {
    if (words_[i]) out.push_back(static_cast<WordId>(i));
  }
  return out;
}

std::vector<WordId> Lexicon::topological_order() const {
  std::vector<WordId> ids;
  ids.reserve(live_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i]) ids.push_back(static_cast<WordId>(i));
  }
  // Components are strictly shorter than the words they build.
  std::stable_sort(ids.begin(), ids.end(), [&](WordId a, WordId b) {
    return words_[a]->surface.size() < words_[b]->surface.size();
  });
  return ids;
}

void Lexicon::restore(WordId id, std::vector<WordId> components, double count) {
  if (id < kTerminalCount) {
    if (!components.empty()) throw DataError("terminal with a definition");
    words_[id]->count = count;
    return;
  }
  if (id < words_.size() && words_[id]) throw DataError("duplicate word id in lexicon file");
  if (id >= words_.size()) words_.resize(id + 1);
  for (WordId c : components) {
    if (!contains(c)) throw DataError("lexicon file lists a word before its components");
  }
  if (components.size() < 2) throw DataError("nonterminal with fewer than two components");
  Word w;
  w.surface = concat(components);
  w.components = std::move(components);
  w.count = count;
  std::string key = key_of(w.surface);
  if (by_surface_.contains(key)) throw DataError("duplicate surface in lexicon file");
  by_surface_.emplace(std::move(key), id);
  words_[id] = std::move(w);
  ++live_;
}

void Lexicon::restore_tail(std::size_t id_bound, std::span<const double> probabilities) {
  if (id_bound > words_.size()) words_.resize(id_bound);
  total_count_ = 0.0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!words_[i]) continue;
    Word& w = *words_[i];
    w.probability = i < probabilities.size() ? probabilities[i] : 0.0;
    w.codelength = w.probability > 0.0 ? -std::log2(w.probability) : kInfiniteBits;
    total_count_ += w.count;
  }
}

bool operator==(const Lexicon& a, const Lexicon& b) {
  if (a.words_.size() != b.words_.size()) return false;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    const auto& x = a.words_[i];
    const auto& y = b.words_[i];
    if (x.has_value() != y.has_value()) return false;
    if (!x) continue;
    if (x->components != y->components || x->count != y->count ||
        x->probability != y->probability) {
      return false;
    }
  }
  return true;
}

double lexicon_dl(const Lexicon& lexicon, double per_word_overhead) {
  double bits = 0.0;
  for (WordId id : lexicon.nonterminals()) {
    bits += per_word_overhead;
    for (WordId c : lexicon.word(id).components) bits += lexicon.codelength(c);
  }
  return bits;
}

TreeNode expand_tree(const Lexicon& lexicon, WordId id, std::size_t offset) {
  const Word& w = lexicon.word(id);
  TreeNode node{id, {offset, offset + w.surface.size()}, {}};
  std::size_t pos = offset;
  for (WordId c : w.components) {
    node.children.push_back(expand_tree(lexicon, c, pos));
    pos = node.children.back().span.end;
  }
  return node;
}

std::size_t tree_depth(const TreeNode& node) {
  std::size_t deepest = 0;
  for (const TreeNode& c : node.children) deepest = std::max(deepest, tree_depth(c));
  return node.children.empty() ? 0 : deepest + 1;
}

std::size_t leaf_count(const TreeNode& node) {
  if (node.children.empty()) return 1;
  std::size_t n = 0;
  for (const TreeNode& c : node.children) n += leaf_count(c);
  return n;
}

std::string printable(std::span<const Byte> bytes) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (Byte b : bytes) {
    switch (b) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      case '[': out += "\\["; break;
      case ']': out += "\\]"; break;
      default:
        if (b >= 0x20 && b < 0x7f) {
          out.push_back(static_cast<char>(b));
        } else {
          out += "\\x";
          out.push_back(hex[b >> 4]);
          out.push_back(hex[b & 15]);
        }
    }
  }
  return out;
}

std::string bracketed(const Lexicon& lexicon, const TreeNode& node) {
  if (node.children.empty()) return printable(lexicon.surface(node.id));
  std::string out;
  for (const TreeNode& c : node.children) {
    // Terminal runs inside a word print flat, as in "[[re][lax]]".
    if (c.children.empty()) {
      out += printable(lexicon.surface(c.id));
    } else {
      out += "[" + bracketed(lexicon, c) + "]";
    }
  }
  return out;
}

std::string first_level(const Lexicon& lexicon, WordId id) {
  const Word& w = lexicon.word(id);
  if (w.terminal()) return "[" + printable(w.surface) + "]";
  std::string out = "[";
  for (WordId c : w.components) out += "[" + printable(lexicon.surface(c)) + "]";
  return out + "]";
}

void dump_lexicon(const Lexicon& lexicon, std::ostream& out) {
  std::vector<WordId> ids;
  for (std::size_t i = 0; i < lexicon.id_bound(); ++i) {
    const auto id = static_cast<WordId>(i);
    if (!lexicon.contains(id)) continue;
    if (is_terminal(id) && lexicon.word(id).count <= 0.0) continue;
    ids.push_back(id);
  }
  std::stable_sort(ids.begin(), ids.end(), [&](WordId a, WordId b) {
    return lexicon.word(a).count > lexicon.word(b).count;
  });
  std::size_t rank = 0;
  for (WordId id : ids) {
    const Word& w = lexicon.word(id);
    std::ostringstream cl;
    cl.precision(4);
    cl << std::fixed << w.codelength;
    out << rank++ << '\t' << w.count << '\t' << cl.str() << "\t[" << printable(w.surface) << "]\t"
        << first_level(lexicon, id) << '\n';
  }
}

void save_lexicon(const Lexicon& lexicon, std::ostream& out) {
  Bytes buf(std::begin(kLexiconMagic), std::end(kLexiconMagic));
  buf.push_back(kLexiconVersion);
  put_varint(buf, lexicon.id_bound());
  put_varint(buf, lexicon.size());
  // Components always precede the words built from them.
  for (WordId id : lexicon.topological_order()) {
    const Word& w = lexicon.word(id);
    put_varint(buf, id);
    put_varint(buf, w.components.size());
    for (WordId c : w.components) put_varint(buf, c);
    put_u64(buf, std::bit_cast<std::uint64_t>(w.count));
    put_u64(buf, std::bit_cast<std::uint64_t>(w.probability));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Lexicon load_lexicon(std::istream& in) {
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const Bytes data(raw.begin(), raw.end());
  std::span<const Byte> view(data);
  if (data.size() < 5 || !std::equal(std::begin(kLexiconMagic), std::end(kLexiconMagic), data.begin())) {
    throw DataError("not a lexicon file");
  }
  if (data[4] != kLexiconVersion) throw DataError("unsupported lexicon version");
  std::size_t pos = 5;
  const std::uint64_t bound = get_varint(view, pos);
  const std::uint64_t live = get_varint(view, pos);
  if (bound < kTerminalCount || live > bound) throw DataError("bad lexicon header");

  Lexicon lex;
  std::vector<double> probabilities(bound, 0.0);
  for (std::uint64_t n = 0; n < live; ++n) {
    const std::uint64_t id = get_varint(view, pos);
    if (id >= bound) throw DataError("word id out of range");
    const std::uint64_t ncomp = get_varint(view, pos);
    if (ncomp > bound) throw DataError("bad component count");
    std::vector<WordId> comps(ncomp);
    for (auto& c : comps) c = static_cast<WordId>(get_varint(view, pos));
    const double count = std::bit_cast<double>(get_u64(view, pos));
    probabilities[id] = std::bit_cast<double>(get_u64(view, pos));
    lex.restore(static_cast<WordId>(id), std::move(comps), count);
  }
  if (pos != data.size()) throw DataError("trailing bytes in lexicon file");
  lex.restore_tail(bound, probabilities);
  return lex;
}

void save_lexicon_file(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  save_lexicon(lexicon, out);
}

Lexicon load_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return load_lexicon(in);
}

}  // namespace mdllex
