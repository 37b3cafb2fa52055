#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace treespace {

// A signed generator of the free group F_n.  `index` runs 1..n; positive sign
// means the letter belongs to the chosen non-symmetric generating set, so the
// Cayley edge w -> w*letter is outgoing and labelled by `index`.
struct Letter {
  int index = 1;
  int sign = +1;

  Letter inverse() const { return {index, -sign}; }
  bool operator==(const Letter&) const = default;
};

// Internal letter code: 2*(index-1) for positive, 2*(index-1)+1 for negative.
// Ascending code order is exactly the canonical letter order (index first,
// positive before negative), which shortlex comparison relies on.
using LetterCode = std::int8_t;

inline LetterCode letter_code(const Letter& l) {
  return static_cast<LetterCode>(2 * (l.index - 1) + (l.sign < 0 ? 1 : 0));
}
inline Letter code_letter(LetterCode c) {
  return Letter{c / 2 + 1, (c & 1) ? -1 : +1};
}
inline LetterCode code_inverse(LetterCode c) { return static_cast<LetterCode>(c ^ 1); }

// Element of F_n as a reduced word over signed generators; doubles as a vertex
// of the Cayley tree.  Always stored reduced: appending a letter cancels
// eagerly, so the length equals the tree distance from the identity.
class Word {
 public:
  Word() = default;

  static Word from_letters(const std::vector<Letter>& letters);
  // Parses the token form "1.2.-1"; "e" is the empty word.
  static Word parse(const std::string& text);

  int length() const { return static_cast<int>(codes_.size()); }
  bool empty() const { return codes_.empty(); }
  LetterCode code_at(int i) const { return codes_[static_cast<size_t>(i)]; }
  Letter letter_at(int i) const { return code_letter(codes_[static_cast<size_t>(i)]); }
  const std::vector<LetterCode>& codes() const { return codes_; }

  // Largest generator index used; 0 for the empty word.
  int max_index() const;

  void push(LetterCode c);  // multiply on the right by one letter, cancelling
  void push(const Letter& l) { push(letter_code(l)); }

  Word inverse() const;
  Word parent() const;  // drop the last letter; empty word unchanged
  bool is_prefix_of(const Word& other) const;

  std::string str() const;

  bool operator==(const Word&) const = default;
  // Plain lexicographic-by-codes order (used only as a tie-break container
  // order); shortlex_less is the canonical order.
  std::strong_ordering operator<=>(const Word&) const = default;

 private:
  std::vector<LetterCode> codes_;
};

Word multiply(const Word& a, const Word& b);

// Total order: length first, then letter codes (index first, positive sign
// before negative).  Reproducible across runs and thread counts.
bool shortlex_less(const Word& a, const Word& b);
int shortlex_compare(const Word& a, const Word& b);

struct ShortlexLess {
  bool operator()(const Word& a, const Word& b) const { return shortlex_less(a, b); }
};

// The 2n words at tree distance 1 from w, in canonical letter order.
// Requires n >= 2 and n at least every index used in w.
std::vector<Word> neighbors(const Word& w, int n);

}  // namespace treespace
