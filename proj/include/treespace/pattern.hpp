#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treespace/word.hpp"

namespace treespace {

// Finite prefix-closed vertex set containing the identity: the radius-m ball
// of a pointed tree in canonical form.  Vertices are kept shortlex-sorted, so
// two patterns are equal (as labelled pointed subtrees) iff their vertex lists
// are equal.
class Pattern {
 public:
  Pattern() = default;

  // Validates: non-empty, contains the identity, prefix-closed, every index
  // within 1..n.  Sorts and dedups.
  static Pattern from_vertices(int n, std::vector<Word> vertices);
  // Trusted path for callers that already guarantee the invariants.
  static Pattern from_sorted_unchecked(int n, std::vector<Word> vertices);

  static Pattern identity_only(int n);
  static Pattern parse_json(const std::string& text);

  int rank() const { return n_; }
  int radius() const;  // max vertex length
  int size() const { return static_cast<int>(verts_.size()); }
  const std::vector<Word>& vertices() const { return verts_; }
  bool contains(const Word& w) const;

  // Number of pattern vertices adjacent to w (w must be a vertex).
  int valence(const Word& w) const;
  // Vertices at length exactly radius().
  std::vector<Word> boundary() const;

  Pattern truncate(int m) const;
  // Moves the basepoint to g (which must be a vertex): left-translates every
  // vertex by g^{-1}.  Throws UsageError if g is not a vertex.
  Pattern rebase(const Word& g) const;

  // Canonical newline-free serialization {"n":2,"vertices":["e","1","1.2"]}.
  std::string json() const;
  // FNV-1a 64 over the canonical serialization.
  std::uint64_t content_hash() const;

  bool operator==(const Pattern&) const = default;

 private:
  int n_ = 2;
  std::vector<Word> verts_;  // shortlex-sorted, unique
};

// Orders patterns by (serialization length, serialization bytes).
bool serialization_shortlex_less(const Pattern& a, const Pattern& b);

// In-place sort into that canonical order; serializes each pattern once.
void sort_canonical(std::vector<Pattern>& patterns);

// A radius-m pattern read as the clopen set of all pointed trees whose
// radius-m ball equals it.  Requires the pattern to have a vertex at length
// exactly m (so some infinite tree realizes it).
struct ClopenBall {
  Pattern pattern;

  ClopenBall() = default;
  explicit ClopenBall(Pattern p) : pattern(std::move(p)) {}
  int radius() const { return pattern.radius(); }

  bool operator==(const ClopenBall&) const = default;
};

// True iff inner is a subset of outer (as sets of trees): inner has the
// smaller or equal diameter and its pattern truncates onto outer's.
bool ball_contains(const ClopenBall& outer, const ClopenBall& inner);

// Subcollection with the same union whose members are pairwise disjoint.
// In an ultrametric two balls either nest or are disjoint, so dropping every
// ball contained in another one preserves the union.
std::vector<ClopenBall> partition_reduce(const std::vector<ClopenBall>& cover);

// Anything that can produce its radius-m ball for every m up to some cap.
using BallSource = std::function<Pattern(int)>;

// Largest r <= cap such that the two radius-r balls coincide; always >= 0
// (radius-0 balls are both {e}).  Returning cap means "at least cap".
int agreement_radius(const BallSource& a, const BallSource& b, int cap);

// The ball-metric exponent: d = e^{-r}.  Kept as an integer plus an explicit
// truncation flag; e^{-r} is materialized only for display.
struct MetricResult {
  int exponent = 0;
  bool at_least_cap = false;

  bool operator==(const MetricResult&) const = default;
};

MetricResult distance_exponent(const BallSource& a, const BallSource& b, int cap);

}  // namespace treespace
