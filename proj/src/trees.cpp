#include "treespace/trees.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "treespace/errors.hpp"

namespace treespace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

const Pattern& TreeModel::ball(int m) const {
  if (m < 0) throw UsageError("ball radius must be >= 0");
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(m);
  if (it == cache_.end()) it = cache_.emplace(m, compute_ball(m)).first;
  return it->second;
}

BallSource TreeModel::ball_source() const {
  return [this](int m) { return ball(m); };
}

Pattern TreeModel::compute_ball(int m) const {
  std::vector<Word> verts;
  std::vector<Word> stack;
  stack.push_back(Word());
  while (!stack.empty()) {
    Word w = std::move(stack.back());
    stack.pop_back();
    if (w.length() < m) {
      int avoid = w.empty() ? -1 : code_inverse(w.code_at(w.length() - 1));
      for (int c = 2 * rank() - 1; c >= 0; --c) {
        if (c == avoid) continue;
        Word child = w;
        child.push(static_cast<LetterCode>(c));
        if (contains(child)) stack.push_back(std::move(child));
      }
    }
    verts.push_back(std::move(w));
  }
  std::sort(verts.begin(), verts.end(), ShortlexLess{});
  return Pattern::from_sorted_unchecked(rank(), std::move(verts));
}

int agreement_radius(const TreeModel& a, const TreeModel& b, int cap) {
  if (cap < 0) throw UsageError("agreement cap must be >= 0");
  int r = 0;
  while (r < cap && a.ball(r + 1) == b.ball(r + 1)) ++r;
  return r;
}

MetricResult distance_exponent(const TreeModel& a, const TreeModel& b, int cap) {
  int r = agreement_radius(a, b, cap);
  return MetricResult{r, r == cap};
}

Pattern pattern_at(const TreeModel& tree, const Word& g, int radius) {
  if (!tree.contains(g))
    throw UsageError("pattern_at: " + g.str() + " is not a vertex of the tree");
  std::vector<Word> verts;
  // DFS over rebased words; the actual position g*u is carried alongside.
  std::vector<std::pair<Word, Word>> stack;
  stack.emplace_back(Word(), g);
  while (!stack.empty()) {
    auto [u, actual] = std::move(stack.back());
    stack.pop_back();
    if (u.length() < radius) {
      int avoid = u.empty() ? -1 : code_inverse(u.code_at(u.length() - 1));
      for (int c = 2 * tree.rank() - 1; c >= 0; --c) {
        if (c == avoid) continue;
        Word u2 = u;
        u2.push(static_cast<LetterCode>(c));
        Word a2 = actual;
        a2.push(static_cast<LetterCode>(c));
        if (tree.contains(a2)) stack.emplace_back(std::move(u2), std::move(a2));
      }
    }
    verts.push_back(std::move(u));
  }
  std::sort(verts.begin(), verts.end(), ShortlexLess{});
  return Pattern::from_sorted_unchecked(tree.rank(), std::move(verts));
}

namespace {

class FullCayleyTree final : public TreeModel {
 public:
  explicit FullCayleyTree(int n) : TreeModel(n) {
    if (n < 2) throw UsageError("cayley tree needs rank n >= 2");
  }
  bool contains(const Word& w) const override { return w.max_index() <= rank(); }
  bool contains_packed(const PackedWord& p) const override {
    for (int i = 0; i < p.len; ++i)
      if (static_cast<int>((p.bits >> (4 * i)) & 0xF) >= 2 * rank()) return false;
    return true;
  }
  std::string describe() const override { return "cayley:n=" + std::to_string(rank()); }
};

class BranchTree final : public TreeModel {
 public:
  BranchTree() : TreeModel(2) {}
  bool contains(const Word& w) const override {
    if (w.max_index() > 2) return false;
    return w.empty() || w.code_at(0) == 0;
  }
  bool contains_packed(const PackedWord& p) const override {
    for (int i = 0; i < p.len; ++i)
      if (((p.bits >> (4 * i)) & 0xF) >= 4) return false;
    return p.len == 0 || (p.bits & 0xF) == 0;
  }
  std::string describe() const override { return "branch:l2"; }
};

class GraftedTree final : public TreeModel {
 public:
  GraftedTree(Pattern p, Word v, Letter dir)
      : TreeModel(p.rank()), base_(std::move(p)), v_(std::move(v)) {
    if (v_.length() != base_.radius())
      throw UsageError("graft vertex must lie on the metric boundary of the pattern");
    if (!base_.contains(v_)) throw UsageError("graft vertex is not in the pattern");
    if (dir.index < 1 || dir.index > rank()) throw UsageError("graft direction out of rank");
    stem_ = v_;
    int before = stem_.length();
    stem_.push(dir);
    if (stem_.length() != before + 1)
      throw UsageError("graft direction backtracks into the pattern");
    if (base_.contains(stem_)) throw UsageError("graft direction is already occupied");
    for (const Word& w : base_.vertices()) packed_.push_back(pack_word(w));
    std::sort(packed_.begin(), packed_.end(), packed_less);
    stem_packed_ = pack_word(stem_);
  }

  bool contains(const Word& w) const override {
    if (stem_.is_prefix_of(w)) return true;
    return base_.contains(w);
  }

  bool contains_packed(const PackedWord& p) const override {
    if (p.len >= stem_packed_.len) {
      unsigned __int128 mask =
          (static_cast<unsigned __int128>(1) << (4 * stem_packed_.len)) - 1;
      if ((p.bits & mask) == stem_packed_.bits) return true;
    }
    return std::binary_search(packed_.begin(), packed_.end(), p, packed_less);
  }

  std::string describe() const override {
    Letter d = stem_.letter_at(stem_.length() - 1);
    std::string tok = (d.sign < 0 ? "-" : "") + std::to_string(d.index);
    return "graft:" + v_.str() + ":" + tok;
  }

 private:
  static bool packed_less(const PackedWord& a, const PackedWord& b) {
    if (a.len != b.len) return a.len < b.len;
    return a.bits < b.bits;
  }

  Pattern base_;
  Word v_;
  Word stem_;  // v with the grafting direction appended
  PackedWord stem_packed_;
  std::vector<PackedWord> packed_;
};

class ShiftPathTree final : public TreeModel {
 public:
  ShiftPathTree(SequencePtr src, std::vector<int> gens, int n)
      : TreeModel(n), src_(std::move(src)), gens_(std::move(gens)) {
    if (n < 2) throw UsageError("shift path tree needs rank n >= 2");
    if (static_cast<int>(gens_.size()) != src_->alphabet_size())
      throw UsageError("generator map must cover the source alphabet");
    std::vector<int> sorted = gens_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw UsageError("generator map must be injective");
    for (int g : gens_)
      if (g < 1 || g > n) throw UsageError("generator map value out of 1..n");
  }

  bool contains(const Word& w) const override {
    if (w.empty()) return true;
    if (w.letter_at(0).sign > 0) {
      for (int i = 0; i < w.length(); ++i) {
        Letter l = w.letter_at(i);
        if (l.sign < 0 || l.index != gens_[static_cast<size_t>(src_->letter(i))]) return false;
      }
    } else {
      for (int i = 0; i < w.length(); ++i) {
        Letter l = w.letter_at(i);
        if (l.sign > 0 || l.index != gens_[static_cast<size_t>(src_->letter(-(i + 1)))])
          return false;
      }
    }
    return true;
  }

  std::string describe() const override {
    std::string out = "shiftpath:" + src_->describe() + ":";
    for (size_t i = 0; i < gens_.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(gens_[i]);
    }
    return out;
  }

 private:
  SequencePtr src_;
  std::vector<int> gens_;
};

class SeededValence3Tree final : public TreeModel {
 public:
  explicit SeededValence3Tree(std::uint64_t seed)
      : TreeModel(2), seed_(seed), root_state_(splitmix64(seed ^ 0x7453f5a7a2a0d325ull)) {}

  bool contains(const Word& w) const override {
    if (w.max_index() > 2) return false;
    std::uint64_t state = root_state_;
    int in_code = -1;
    for (int i = 0; i < w.length(); ++i) {
      int c = w.code_at(i);
      if (!allowed(state, in_code, c)) return false;
      state = step(state, c);
      in_code = c;
    }
    return true;
  }

  bool contains_packed(const PackedWord& p) const override {
    std::uint64_t state = root_state_;
    int in_code = -1;
    for (int i = 0; i < p.len; ++i) {
      int c = static_cast<int>((p.bits >> (4 * i)) & 0xF);
      if (c >= 4) return false;
      if (!allowed(state, in_code, c)) return false;
      state = step(state, c);
      in_code = c;
    }
    return true;
  }

  std::string describe() const override { return "valence3:seed=" + std::to_string(seed_); }

 private:
  static std::uint64_t step(std::uint64_t state, int code) {
    return splitmix64(state ^ (0x2545f4914f6cdd1dull + static_cast<std::uint64_t>(code)));
  }

  // The kept outward directions at a vertex: 3 of 4 at the root, 2 of the 3
  // non-backtracking ones elsewhere.
  static bool allowed(std::uint64_t state, int in_code, int c) {
    if (in_code < 0) return c != static_cast<int>(state % 4);
    int back = in_code ^ 1;
    if (c == back) return false;
    int outs[3];
    int k = 0;
    for (int d = 0; d < 4; ++d)
      if (d != back) outs[k++] = d;
    int omit = outs[state % 3];
    return c != omit;
  }

  std::uint64_t seed_;
  std::uint64_t root_state_;
};

class RebasedTree final : public TreeModel {
 public:
  RebasedTree(TreePtr base, Word g) : TreeModel(base->rank()), base_(std::move(base)), g_(std::move(g)) {
    if (!base_->contains(g_))
      throw UsageError("rebase undefined: " + g_.str() + " is not a vertex");
  }
  bool contains(const Word& w) const override { return base_->contains(multiply(g_, w)); }
  std::string describe() const override {
    return base_->describe() + "@" + g_.str();
  }

 protected:
  Pattern compute_ball(int m) const override { return pattern_at(*base_, g_, m); }

 private:
  TreePtr base_;
  Word g_;
};

class FusionTree final : public TreeModel {
 public:
  FusionTree(TreePtr t1, TreePtr t2, int K)
      : TreeModel(t1->rank()), t1_(std::move(t1)), t2_(std::move(t2)) {
    if (K < 1) throw UsageError("fusion needs K >= 1");
    if (t1_->rank() != t2_->rank())
      throw UsageError("fusion inputs must share the same rank");
    k_ = K;
  }

  bool contains(const Word& w) const override {
    int len = w.length();
    int j = 0;
    while (j < len && w.code_at(j) == 0) ++j;  // leading positive-a spine run
    if (j == len) return true;
    if (j < 1 || w.code_at(j) != 2) return false;  // must leave the spine via +b
    const Graft& gr = graft(j);
    int i = j + 1;
    int run = 0;
    while (i < len && run < gr.guard_len && w.code_at(i) == gr.h_code) {
      ++i;
      ++run;
    }
    if (run < gr.guard_len) return i == len;  // proper guard prefix
    Word x = gr.boundary;
    for (; i < len; ++i) x.push(w.code_at(i));
    return x.length() <= gr.radius && gr.ball.contains(x);
  }

  std::string describe() const override {
    return "fuse:" + t1_->describe() + "|" + t2_->describe() + ":K=" + std::to_string(k_);
  }

 private:
  struct Graft {
    int radius = 0;
    int guard_len = 0;
    int h_code = 0;
    Word boundary;  // the copy vertex the guard attaches through
    Pattern ball;   // radius-j ball of the alternating input tree
  };

  // Spine vertex j carries ball_j of t1 for even j, t2 for odd j.
  const Graft& graft(int j) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = grafts_.find(j);
    if (it != grafts_.end()) return it->second;
    Graft g;
    g.radius = j;
    g.guard_len = j;
    const TreeModel& src = (j % 2 == 0) ? *t1_ : *t2_;
    g.ball = src.ball(j);
    for (const Word& w : g.ball.vertices()) {
      if (w.length() == j) {
        g.boundary = w;
        break;
      }
    }
    if (g.boundary.empty())
      throw std::logic_error("fusion input ball has no boundary vertex at radius " +
                             std::to_string(j));
    // Guard letters must differ from the boundary word's last letter so the
    // copy keeps its position, and from -b so the run after +b stays reduced.
    Letter last = g.boundary.letter_at(g.boundary.length() - 1);
    g.h_code = (letter_code(last) == 0) ? 1 : 0;
    return grafts_.emplace(j, std::move(g)).first->second;
  }

  TreePtr t1_, t2_;
  int k_ = 1;
  mutable std::mutex mu_;
  mutable std::map<int, Graft> grafts_;
};

}  // namespace

TreePtr full_cayley(int n) { return std::make_shared<FullCayleyTree>(n); }

TreePtr branch_tree() { return std::make_shared<BranchTree>(); }

TreePtr grafted_tree(const Pattern& p, const Word& v, const Letter& dir) {
  return std::make_shared<GraftedTree>(p, v, dir);
}

TreePtr shift_path_tree(SequencePtr src, const std::vector<int>& gens, int n) {
  return std::make_shared<ShiftPathTree>(std::move(src), gens, n);
}

TreePtr seeded_valence3_tree(std::uint64_t seed) {
  return std::make_shared<SeededValence3Tree>(seed);
}

TreePtr fusion_tree(TreePtr t1, TreePtr t2, int K) {
  return std::make_shared<FusionTree>(std::move(t1), std::move(t2), K);
}

TreePtr rebased_tree(TreePtr base, const Word& g) {
  return std::make_shared<RebasedTree>(std::move(base), g);
}

}  // namespace treespace
