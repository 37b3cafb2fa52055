#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "treespace/packed.hpp"
#include "treespace/pattern.hpp"
#include "treespace/sequences.hpp"
#include "treespace/word.hpp"

namespace treespace {

// A lazily evaluated infinite pointed tree: an element of the space of
// pointed trees over F_n, queried through its balls.  Vertex sets of such
// trees are automatically prefix-closed (a connected subgraph of a tree is
// geodesically convex), which the generic ball computation exploits.
//
// Models are immutable descriptions; ball memoization is synchronized, so a
// model can be shared freely across workers.
class TreeModel {
 public:
  explicit TreeModel(int n) : n_(n) {}
  virtual ~TreeModel() = default;

  int rank() const { return n_; }
  virtual bool contains(const Word& w) const = 0;
  // Hot-path membership on packed words; default unpacks.
  virtual bool contains_packed(const PackedWord& p) const { return contains(unpack_word(p)); }
  virtual std::string describe() const = 0;

  // Radius-m ball around the basepoint, memoized.
  const Pattern& ball(int m) const;
  ClopenBall clopen_ball(int m) const { return ClopenBall(ball(m)); }
  BallSource ball_source() const;

 protected:
  // Default: depth-first expansion over non-backtracking extensions filtered
  // by contains().
  virtual Pattern compute_ball(int m) const;

 private:
  int n_;
  mutable std::mutex mu_;
  mutable std::map<int, Pattern> cache_;  // radius -> ball (references stay valid)
};

using TreePtr = std::shared_ptr<const TreeModel>;

// The full Cayley tree of F_n: every reduced word is a vertex; every finite
// ball is homogeneous, so the orbit is a single point at each radius.
TreePtr full_cayley(int n);

// The branch of the rank-2 Cayley tree hanging below the first positive
// generator: the identity plus every reduced word starting with it.  The
// basepoint has valence 1; every other vertex has valence 4.
TreePtr branch_tree();

// Pattern P with one branch grafted at boundary vertex v: the new edge leaves
// v in direction `dir` (not in P, non-backtracking) and continues with every
// non-backtracking word.  v keeps its P-valence plus one.
TreePtr grafted_tree(const Pattern& p, const Word& v, const Letter& dir);

// Bi-infinite path carrying the sequence: vertex(k) = vertex(k-1) * gen(src(k-1))
// for all integer k, vertex(0) = identity.  `gens` maps symbol index to a
// positive generator index, injectively.  Balls of radius m are determined by
// the letters on the window [-m, m-1].
TreePtr shift_path_tree(SequencePtr src, const std::vector<int>& gens, int n);

// Rank-2 tree with every vertex of valence exactly 3, drawn from a splittable
// deterministic generator: the basepoint keeps 3 of its 4 directions, every
// deeper vertex keeps 2 of its 3 outward directions.
TreePtr seeded_valence3_tree(std::uint64_t seed);

// One tree whose orbit closure approximates both inputs: an infinite spine of
// positive-a edges with, at spine vertex j >= 1, a guard path and a grafted
// copy of ball_j of t1 (j even) or t2 (j odd), attached through one of the
// copy's boundary vertices so the copy's center sees exactly the copy within
// radius j.  For every k <= K both radius-k balls occur as rebased balls.
TreePtr fusion_tree(TreePtr t1, TreePtr t2, int K);

// View of `base` with the basepoint moved to g (g must be a vertex).
TreePtr rebased_tree(TreePtr base, const Word& g);

// Pattern of radius `radius` around vertex g, rebased to g.
Pattern pattern_at(const TreeModel& tree, const Word& g, int radius);

int agreement_radius(const TreeModel& a, const TreeModel& b, int cap);
MetricResult distance_exponent(const TreeModel& a, const TreeModel& b, int cap);

}  // namespace treespace
