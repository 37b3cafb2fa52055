#include <atomic>
#include <cstring>
#include <thread>
#include <unordered_map>

#include "treespace/census.hpp"
#include "treespace/errors.hpp"
#include "treespace/packed.hpp"

// Exact enumeration of rebased-ball patterns over all vertices up to a depth.
// Per vertex g we walk the radius-l ball around g once, in a fixed preorder;
// the visit sequence of rebased words is a canonical serialization of the
// pattern (equal patterns produce identical sequences, unequal ones cannot).
// Dedup goes through a 128-bit streaming hash with full sequence comparison
// on every hit, so counts stay exact; sequences are cached verbatim up to a
// byte budget and recomputed from their first witness after that.

namespace treespace {

namespace {

constexpr int kMaxPackedRadius = 14;  // rebased words live in one uint64

// Rebased word: nibbles in the low 56 bits, length in the top 8.
inline std::uint64_t seq_entry(std::uint64_t bits, int len) {
  return bits | (static_cast<std::uint64_t>(len) << 56);
}

struct Distinct {
  std::uint64_t h1 = 0, h2 = 0;
  std::uint32_t size = 0;
  int min_depth = 0;
  PackedWord first_g;
  std::vector<std::uint64_t> seq;  // empty when the confirm cache was full
  bool cached = false;
};

class BallWalker {
 public:
  BallWalker(const TreeModel& tree, int radius, std::atomic<bool>* abort)
      : tree_(tree), radius_(radius), twice_n_(2 * tree.rank()), abort_(abort) {}

  long long visits() const { return visits_; }
  void reset_visits() { visits_ = 0; }

  void walk(const PackedWord& g, std::vector<std::uint64_t>& seq) {
    seq.clear();
    seq.push_back(0);
    bump();
    if (radius_ > 0) expand(0, 0, g, seq);
  }

 private:
  void bump() {
    if ((++visits_ & 0xFFFFF) == 0 && abort_ && abort_->load(std::memory_order_relaxed))
      throw ResourceError("orbit enumeration exceeded the visit budget");
  }

  void expand(std::uint64_t bits, int len, const PackedWord& at,
              std::vector<std::uint64_t>& seq) {
    int avoid = len ? static_cast<int>((bits >> (4 * (len - 1))) & 0xF) ^ 1 : -1;
    for (int c = 0; c < twice_n_; ++c) {
      if (c == avoid) continue;
      PackedWord next = at;
      next.push(c);
      if (!tree_.contains_packed(next)) continue;
      std::uint64_t b2 = bits | (static_cast<std::uint64_t>(c) << (4 * len));
      seq.push_back(seq_entry(b2, len + 1));
      bump();
      if (len + 1 < radius_) expand(b2, len + 1, next, seq);
    }
  }

  const TreeModel& tree_;
  int radius_;
  int twice_n_;
  std::atomic<bool>* abort_;
  long long visits_ = 0;
};

void hash_seq(const std::vector<std::uint64_t>& seq, std::uint64_t& h1, std::uint64_t& h2) {
  std::uint64_t a = 0xcbf29ce484222325ull, b = 0x9e3779b97f4a7c15ull;
  for (std::uint64_t e : seq) {
    a = (a ^ e) * 0x100000001b3ull;
    b = (b ^ ((e << 29) | (e >> 35))) * 0xff51afd7ed558ccdull;
  }
  h1 = a;
  h2 = b;
}

struct WorkerState {
  std::vector<Distinct> patterns;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  std::size_t cache_left = 0;
  long long local_visits = 0;
};

// Inserts the walked sequence, confirming equality against the stored
// sequence whenever the 128-bit hash and size match.
void absorb(WorkerState& ws, BallWalker& walker, const std::vector<std::uint64_t>& seq,
            const PackedWord& g, std::vector<std::uint64_t>& scratch) {
  std::uint64_t h1, h2;
  hash_seq(seq, h1, h2);
  auto size = static_cast<std::uint32_t>(seq.size());
  auto& bucket = ws.buckets[h1];
  for (std::uint32_t idx : bucket) {
    Distinct& d = ws.patterns[idx];
    if (d.h2 != h2 || d.size != size) continue;
    const std::vector<std::uint64_t>* other = &d.seq;
    if (!d.cached) {
      walker.walk(d.first_g, scratch);
      other = &scratch;
    }
    if (std::memcmp(other->data(), seq.data(), seq.size() * 8) == 0) {
      if (g.len < d.min_depth) d.min_depth = g.len;
      return;
    }
  }
  Distinct d;
  d.h1 = h1;
  d.h2 = h2;
  d.size = size;
  d.min_depth = g.len;
  d.first_g = g;
  std::size_t bytes = seq.size() * 8;
  if (bytes <= ws.cache_left) {
    d.seq = seq;
    d.cached = true;
    ws.cache_left -= bytes;
  }
  bucket.push_back(static_cast<std::uint32_t>(ws.patterns.size()));
  ws.patterns.push_back(std::move(d));
}

struct CensusOutcome {
  std::vector<Distinct> merged;
};

CensusOutcome run_census(const TreeModel& tree, int l, int R, const EnumOptions& opts) {
  if (l < 0) throw UsageError("orbit pattern radius must be >= 0");
  if (R < l) throw UsageError("orbit exploration depth must be at least the radius");
  int bound = opts.bound_override >= 0 ? opts.bound_override : 9;
  if (l > bound)
    throw ResourceError("orbit radius " + std::to_string(l) + " exceeds the bound " +
                        std::to_string(bound) +
                        " (cover counts grow geometrically; override to raise)");
  if (l > kMaxPackedRadius)
    throw ResourceError("orbit radius beyond packed capacity (max 14)");
  if (R + l > PackedWord::kMaxLen)
    throw ResourceError("orbit depth plus radius beyond packed capacity (max 31)");
  if (tree.rank() > 8) throw ResourceError("orbit enumeration supports rank n <= 8");

  const Pattern& base = tree.ball(R);
  std::vector<PackedWord> gs;
  gs.reserve(static_cast<size_t>(base.size()));
  for (const Word& w : base.vertices()) gs.push_back(pack_word(w));

  int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(gs.size())));
  std::vector<WorkerState> states(static_cast<size_t>(workers));
  std::atomic<bool> abort{false};
  std::atomic<long long> budget{opts.visit_budget};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));

  auto work = [&](int wi) {
    WorkerState& ws = states[static_cast<size_t>(wi)];
    ws.cache_left = opts.confirm_cache_bytes / static_cast<size_t>(workers);
    BallWalker walker(tree, l, &abort);
    std::vector<std::uint64_t> seq, scratch;
    size_t lo = gs.size() * static_cast<size_t>(wi) / static_cast<size_t>(workers);
    size_t hi = gs.size() * static_cast<size_t>(wi + 1) / static_cast<size_t>(workers);
    try {
      for (size_t i = lo; i < hi; ++i) {
        walker.walk(gs[i], seq);
        absorb(ws, walker, seq, gs[i], scratch);
        if (walker.visits() >= (1 << 22)) {
          if (budget.fetch_sub(walker.visits()) - walker.visits() < 0) abort.store(true);
          ws.local_visits += walker.visits();
          walker.reset_visits();
          if (abort.load(std::memory_order_relaxed))
            throw ResourceError("orbit enumeration exceeded the visit budget");
        }
      }
    } catch (...) {
      errors[static_cast<size_t>(wi)] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers));
    for (int wi = 0; wi < workers; ++wi) threads.emplace_back(work, wi);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::size_t best = 0;
      for (auto& ws : states) best = std::max(best, ws.patterns.size());
      try {
        std::rethrow_exception(e);
      } catch (const ResourceError& re) {
        throw ResourceError(std::string(re.what()) + " (distinct patterns so far: at least " +
                                std::to_string(best) + ")",
                            std::to_string(best));
      }
    }
  }

  // Merge workers: group by hash and size, then confirm with full sequences.
  CensusOutcome out;
  BallWalker walker(tree, l, nullptr);
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  std::vector<std::uint64_t> seq_a, seq_b;
  for (WorkerState& ws : states) {
    for (Distinct& d : ws.patterns) {
      bool matched = false;
      for (std::uint32_t idx : buckets[d.h1]) {
        Distinct& m = out.merged[idx];
        if (m.h2 != d.h2 || m.size != d.size) continue;
        const std::vector<std::uint64_t>* sa = &m.seq;
        if (!m.cached) {
          walker.walk(m.first_g, seq_a);
          sa = &seq_a;
        }
        const std::vector<std::uint64_t>* sb = &d.seq;
        if (!d.cached) {
          walker.walk(d.first_g, seq_b);
          sb = &seq_b;
        }
        if (std::memcmp(sa->data(), sb->data(), m.size * 8ull) == 0) {
          m.min_depth = std::min(m.min_depth, d.min_depth);
          matched = true;
          break;
        }
      }
      if (!matched) {
        buckets[d.h1].push_back(static_cast<std::uint32_t>(out.merged.size()));
        out.merged.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace

OrbitResult orbit_cover_count(const TreeModel& tree, int l, int R, const EnumOptions& opts) {
  CensusOutcome outcome = run_census(tree, l, R, opts);
  OrbitResult res;
  res.l = l;
  res.exploration_depth = R;
  res.count = BigCount(static_cast<unsigned long>(outcome.merged.size()));
  res.stabilized = true;
  for (const Distinct& d : outcome.merged) {
    if (d.min_depth >= R) res.stabilized = false;
  }
  return res;
}

std::vector<Pattern> orbit_patterns(const TreeModel& tree, int l, int R,
                                    const EnumOptions& opts) {
  CensusOutcome outcome = run_census(tree, l, R, opts);
  BallWalker walker(tree, l, nullptr);
  std::vector<std::uint64_t> seq;
  std::vector<Pattern> out;
  out.reserve(outcome.merged.size());
  for (const Distinct& d : outcome.merged) {
    const std::vector<std::uint64_t>* s = &d.seq;
    if (!d.cached) {
      walker.walk(d.first_g, seq);
      s = &seq;
    }
    std::vector<Word> verts;
    verts.reserve(s->size());
    for (std::uint64_t e : *s) {
      std::uint64_t bits = e & ((1ull << 56) - 1);
      int len = static_cast<int>(e >> 56);
      std::vector<Letter> letters;
      letters.reserve(static_cast<size_t>(len));
      for (int i = 0; i < len; ++i)
        letters.push_back(code_letter(static_cast<LetterCode>((bits >> (4 * i)) & 0xF)));
      verts.push_back(Word::from_letters(letters));
    }
    std::sort(verts.begin(), verts.end(), ShortlexLess{});
    out.push_back(Pattern::from_sorted_unchecked(tree.rank(), std::move(verts)));
  }
  std::sort(out.begin(), out.end(), serialization_shortlex_less);
  return out;
}

}  // namespace treespace
