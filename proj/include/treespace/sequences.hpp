#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace treespace {

// A deterministic two-sided symbol sequence over a finite alphabet; symbols
// are reported as indices 0..alphabet_size()-1.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  virtual int alphabet_size() const = 0;
  virtual int letter(std::int64_t k) const = 0;
  virtual std::string describe() const = 0;
};

using SequencePtr = std::shared_ptr<const SequenceSource>;

// letter(k) = word[k mod |word|] with the Euclidean remainder, so the
// periodicity identity holds on all of Z.
SequencePtr periodic_source(const std::string& word);

// Shifted view: letter(k) = base.letter(k + shift).
SequencePtr shifted_source(SequencePtr base, std::int64_t shift);

// Seeded uniform source; same seed gives the identical sequence everywhere.
SequencePtr seeded_source(std::uint64_t seed, int alphabet_size);

// Two-sided fixed point of a primitive non-erasing substitution.  The right
// half expands a letter L with s^p(L) starting in L, the left half a letter
// whose s^p image ends in it; p is the smallest power making both exist.
// Rejects non-primitive or erasing rule sets.
SequencePtr substitution_source(const std::map<char, std::string>& rules);

// The fixed point of 0 -> 01, 1 -> 10 seeded at 0.
SequencePtr thue_morse_source();

}  // namespace treespace
