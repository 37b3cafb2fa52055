#pragma once

#include <cstdint>

#include "treespace/errors.hpp"
#include "treespace/word.hpp"

namespace treespace {

// Fixed-capacity reduced word for enumeration inner loops: letter codes in
// 4-bit nibbles (rank up to 8), lowest nibble first, at most 31 letters.
struct PackedWord {
  unsigned __int128 bits = 0;
  std::uint8_t len = 0;

  static constexpr int kMaxLen = 31;

  bool empty() const { return len == 0; }
  int last() const { return static_cast<int>((bits >> (4 * (len - 1))) & 0xF); }

  // Multiply on the right by one letter, cancelling an inverse pair.
  void push(int code) {
    if (len > 0 && last() == (code ^ 1)) {
      bits &= ~(static_cast<unsigned __int128>(0xF) << (4 * (len - 1)));
      --len;
    } else {
      bits |= static_cast<unsigned __int128>(code & 0xF) << (4 * len);
      ++len;
    }
  }

  bool operator==(const PackedWord& o) const { return len == o.len && bits == o.bits; }
};

inline PackedWord pack_word(const Word& w) {
  if (w.length() > PackedWord::kMaxLen)
    throw ResourceError("word too long for packed enumeration (max 31 letters)");
  if (w.max_index() > 8)
    throw ResourceError("packed enumeration supports rank n <= 8");
  PackedWord p;
  for (int i = 0; i < w.length(); ++i)
    p.bits |= static_cast<unsigned __int128>(w.code_at(i) & 0xF) << (4 * i);
  p.len = static_cast<std::uint8_t>(w.length());
  return p;
}

inline Word unpack_word(const PackedWord& p) {
  std::vector<Letter> letters;
  letters.reserve(p.len);
  for (int i = 0; i < p.len; ++i)
    letters.push_back(code_letter(static_cast<LetterCode>((p.bits >> (4 * i)) & 0xF)));
  return Word::from_letters(letters);
}

// 64-bit digest of a packed word, stable across platforms.
inline std::uint64_t packed_hash(const PackedWord& p) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };
  std::uint64_t lo = static_cast<std::uint64_t>(p.bits);
  std::uint64_t hi = static_cast<std::uint64_t>(p.bits >> 64);
  return mix(lo ^ mix(hi ^ (0x100 + p.len)));
}

}  // namespace treespace
