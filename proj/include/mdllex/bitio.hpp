#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mdllex/corpus.hpp"
#include "mdllex/error.hpp"

namespace mdllex {

// MSB-first bit writer appending to a byte vector.
class BitWriter {
 public:
  explicit BitWriter(Bytes& out) : out_(out) {}

  void write_bit(bool bit) {
    acc_ = static_cast<Byte>((acc_ << 1) | (bit ? 1 : 0));
    if (++fill_ == 8) flush_byte();
  }

  // Writes the low `length` bits of `bits`, most significant first.
  void write_bits(std::uint64_t bits, unsigned length) {
    for (unsigned i = length; i > 0; --i) write_bit((bits >> (i - 1)) & 1u);
  }

  // Elias gamma code for value >= 1.
  void write_gamma(std::uint64_t value) {
    const unsigned width = static_cast<unsigned>(std::bit_width(value));
    write_bits(0, width - 1);
    write_bits(value, width);
  }

  // Pads with zero bits to the next byte boundary; returns the pad count.
  unsigned align() {
    const unsigned pad = fill_ == 0 ? 0 : 8 - fill_;
    for (unsigned i = 0; i < pad; ++i) write_bit(false);
    return pad;
  }

  std::uint64_t bits_written() const { return bits_ + fill_; }

 private:
  void flush_byte() {
    out_.push_back(acc_);
    acc_ = 0;
    fill_ = 0;
    bits_ += 8;
  }

  Bytes& out_;
  Byte acc_ = 0;
  unsigned fill_ = 0;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const Byte> in, std::size_t byte_offset = 0)
      : in_(in), pos_(byte_offset * 8) {}

  bool read_bit() {
    if (pos_ >= in_.size() * 8) throw DataError("truncated bit stream");
    const Byte b = in_[pos_ >> 3];
    const bool bit = (b >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }

  std::uint64_t read_bits(unsigned length) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < length; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
    return v;
  }

  std::uint64_t read_gamma() {
    unsigned zeros = 0;
    while (!read_bit()) {
      if (++zeros > 63) throw DataError("malformed gamma code");
    }
    std::uint64_t v = 1;
    for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
    return v;
  }

  void align() { pos_ = (pos_ + 7) & ~std::size_t{7}; }
  std::size_t bit_position() const { return pos_; }
  std::size_t byte_position() const { return (pos_ + 7) / 8; }

 private:
  std::span<const Byte> in_;
  std::size_t pos_;
};

// LEB128-style unsigned varints on byte vectors.
inline void put_varint(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<Byte>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<Byte>(v));
}

inline std::uint64_t get_varint(std::span<const Byte> in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (unsigned shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) throw DataError("truncated varint");
    const Byte b = in[pos++];
    v |= std::uint64_t{b & 0x7fu} << shift;
    if ((b & 0x80) == 0) return v;
  }
  throw DataError("varint too long");
}

inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<Byte>(v >> (8 * i)));
}

inline std::uint64_t get_u64(std::span<const Byte> in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw DataError("truncated u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{in[pos + i]} << (8 * i);
  pos += 8;
  return v;
}

}  // namespace mdllex
