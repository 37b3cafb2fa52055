#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treespace/bigcount.hpp"
#include "treespace/pattern.hpp"
#include "treespace/sequences.hpp"
#include "treespace/trees.hpp"

namespace treespace {

// An invariant subset of the space of pointed trees whose radius-m patterns
// can be enumerated exactly.
class SpaceSpec {
 public:
  enum class Kind {
    Full,       // every pointed tree over F_n
    Valence3,   // rank-2 trees with every vertex of valence exactly 3
    Shift,      // image of the shift space embedding (paths, k symbols)
    Orbit,      // closure of one tree's orbit, explored to depth R
  };

  static SpaceSpec full(int n);
  static SpaceSpec valence3();
  static SpaceSpec shift_image(int k, std::vector<int> gens, int n);
  static SpaceSpec orbit_closure(TreePtr tree, int exploration_depth);

  Kind kind() const { return kind_; }
  int rank() const { return n_; }
  int symbols() const { return k_; }
  const std::vector<int>& gens() const { return gens_; }
  const TreePtr& tree() const { return tree_; }
  int exploration_depth() const { return R_; }
  std::string str() const;

  // Largest m enumerated by default; growth beyond it is superexponential.
  int default_bound() const;

 private:
  SpaceSpec() = default;
  Kind kind_ = Kind::Full;
  int n_ = 2;
  int k_ = 0;
  std::vector<int> gens_;
  TreePtr tree_;
  int R_ = 0;
};

struct EnumOptions {
  int workers = 1;
  // -1 keeps the per-space default radius bound.
  int bound_override = -1;
  // Abort orbit enumeration after this many vertex visits.
  long long visit_budget = 6'000'000'000;
  // Bytes of canonical sequences kept verbatim for exact dedup confirmation.
  std::size_t confirm_cache_bytes = 256u << 20;
  std::string cache_dir;
};

// All distinct radius-m ball patterns realized by trees of the space, in
// serialization-shortlex order.  Refuses loudly past the resource bound.
std::vector<Pattern> enumerate_patterns(const SpaceSpec& spec, int m,
                                        const EnumOptions& opts = {});

// All radius-(r+1) patterns of the space whose truncation to r is p.
std::vector<Pattern> refine(const Pattern& p, const SpaceSpec& spec);

// Independent brute-force route: include/exclude search over the vertices of
// the ambient Cayley ball with per-space filters; no refinement recursion.
std::vector<Pattern> oracle_enumerate(const SpaceSpec& spec, int m);

struct CountRow {
  int m = 0;
  BigCount count;
  std::string method;  // recursive | oracle | closed-form
};

struct CountTable {
  std::string space;
  std::vector<CountRow> rows;
};

CountRow count_covers(const SpaceSpec& spec, int m, const EnumOptions& opts = {});

// Exact closed form where one is known (valence-3, shift image); throws
// UsageError otherwise.
BigCount closed_form_count(const SpaceSpec& spec, int m);

// The branch-orbit cover count claimed in closed form, (3^(l-1)+1)/2, kept
// for side-by-side reporting; direct enumeration gives one more.
BigCount branch_cover_closed_form(int l);

struct DimensionEstimate {
  std::vector<int> ms;
  std::vector<double> per_m;  // ln(count)/m
  double value_min = 0, value_max = 0, value_last = 0;
  double slope = 0;     // least-squares fit of ln(count) against m
  double residual = 0;  // rms residual of the fit
};

DimensionEstimate box_dim_estimates(const CountTable& table);

struct GrowthDiagnostic {
  double alpha = 0;
  std::optional<int> first_failure_m;  // first m with count >= e^(m*alpha)
  std::vector<double> log_ratios;      // ln(N_{m+1}/N_m)
  bool ratios_strictly_increasing = false;
};

GrowthDiagnostic growth_diagnostic(const CountTable& table, double alpha);

struct OrbitResult {
  int l = 0;
  int exploration_depth = 0;
  BigCount count;
  bool stabilized = false;  // count unchanged between depths R-1 and R
};

// Number of distinct radius-l patterns of the tree rebased at vertices within
// distance R of the basepoint.
OrbitResult orbit_cover_count(const TreeModel& tree, int l, int R,
                              const EnumOptions& opts = {});
std::vector<Pattern> orbit_patterns(const TreeModel& tree, int l, int R,
                                    const EnumOptions& opts = {});

// Letterwise relabeling along an injection of generator indices; an isometry
// onto its image.
Pattern relabel_embed(const Pattern& p, const std::vector<int>& iota, int n_target);

struct HoelderReport {
  int sequence_agreement = 0;  // -1 when the sequences differ at index 0
  bool sequence_at_cap = false;
  int tree_agreement = 0;
  bool tree_at_cap = false;
  bool within_one = false;
};

// Compares the symbol metric with the ball metric of the embedded paths; the
// exponents differ by at most one (balls of radius m read the letters on
// [-m, m-1], sequences are compared on [-m, m]).
HoelderReport hoelder_check(const SequencePtr& s1, const SequencePtr& s2,
                            const std::vector<int>& gens, int n, int cap);

}  // namespace treespace
