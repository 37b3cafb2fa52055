#include "treespace/census.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "treespace/errors.hpp"

namespace treespace {

namespace {

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

bool is_valence3_ball(const Pattern& p) {
  if (p.rank() != 2) return false;
  int r = p.radius();
  for (const Word& w : p.vertices())
    if (w.length() < r && p.valence(w) != 3) return false;
  return true;
}

// A shift-image ball: one all-positive and one all-negative chain per length,
// letters drawn from the generator image.
bool is_shift_path_ball(const Pattern& p, const std::vector<int>& gens) {
  int r = p.radius();
  if (p.size() != 2 * r + 1) return false;
  std::vector<int> pos_count(static_cast<size_t>(r) + 1, 0);
  std::vector<int> neg_count(static_cast<size_t>(r) + 1, 0);
  auto in_gens = [&](int idx) {
    return std::find(gens.begin(), gens.end(), idx) != gens.end();
  };
  for (const Word& w : p.vertices()) {
    if (w.empty()) continue;
    int sign = w.letter_at(0).sign;
    for (int i = 0; i < w.length(); ++i) {
      Letter l = w.letter_at(i);
      if (l.sign != sign || !in_gens(l.index)) return false;
    }
    (sign > 0 ? pos_count : neg_count)[static_cast<size_t>(w.length())] += 1;
  }
  for (int t = 1; t <= r; ++t)
    if (pos_count[static_cast<size_t>(t)] != 1 || neg_count[static_cast<size_t>(t)] != 1)
      return false;
  return true;
}

void require_realizable(const Pattern& p, const SpaceSpec& spec) {
  if (p.rank() != spec.rank())
    throw UsageError("pattern rank does not match the space");
  switch (spec.kind()) {
    case SpaceSpec::Kind::Full:
      return;
    case SpaceSpec::Kind::Valence3:
      if (!is_valence3_ball(p)) throw UsageError("pattern is not a valence-3 ball");
      return;
    case SpaceSpec::Kind::Shift:
      if (!is_shift_path_ball(p, spec.gens()))
        throw UsageError("pattern is not a shift-image path ball");
      return;
    case SpaceSpec::Kind::Orbit: {
      auto all = enumerate_patterns(spec, p.radius());
      if (std::find(all.begin(), all.end(), p) == all.end())
        throw UsageError("pattern is not realized in the orbit closure");
      return;
    }
  }
}

// Child vertices of a boundary vertex, in canonical letter order.
std::vector<Word> child_candidates(const Word& v, int n) {
  std::vector<Word> out;
  int avoid = v.empty() ? -1 : code_inverse(v.code_at(v.length() - 1));
  for (int c = 0; c < 2 * n; ++c) {
    if (c == avoid) continue;
    Word w = v;
    w.push(static_cast<LetterCode>(c));
    out.push_back(std::move(w));
  }
  return out;
}

void append_subsets(const std::vector<Word>& kids, bool exactly, int need,
                    std::vector<std::vector<Word>>& out) {
  int s = static_cast<int>(kids.size());
  for (unsigned mask = 0; mask < (1u << s); ++mask) {
    if (exactly && std::popcount(mask) != need) continue;
    std::vector<Word> sel;
    for (int i = 0; i < s; ++i)
      if (mask & (1u << i)) sel.push_back(kids[static_cast<size_t>(i)]);
    out.push_back(std::move(sel));
  }
}

std::vector<Pattern> refine_by_children(const Pattern& p, const SpaceSpec& spec) {
  int n = spec.rank();
  std::vector<Word> boundary = p.boundary();
  std::vector<std::vector<std::vector<Word>>> choices;  // per boundary vertex
  for (const Word& v : boundary) {
    std::vector<Word> kids = child_candidates(v, n);
    std::vector<std::vector<Word>> sets;
    if (spec.kind() == SpaceSpec::Kind::Valence3) {
      append_subsets(kids, true, v.empty() ? 3 : 2, sets);
    } else {
      append_subsets(kids, false, 0, sets);
    }
    choices.push_back(std::move(sets));
  }
  std::vector<Pattern> out;
  std::vector<size_t> odo(choices.size(), 0);
  while (true) {
    std::vector<Word> verts = p.vertices();
    size_t added = 0;
    for (size_t i = 0; i < choices.size(); ++i) {
      const auto& sel = choices[i][odo[i]];
      added += sel.size();
      verts.insert(verts.end(), sel.begin(), sel.end());
    }
    if (added > 0) {  // the refined ball must reach the next radius
      std::sort(verts.begin(), verts.end(), ShortlexLess{});
      out.push_back(Pattern::from_sorted_unchecked(n, std::move(verts)));
    }
    size_t d = 0;
    while (d < odo.size() && ++odo[d] == choices[d].size()) odo[d++] = 0;
    if (d == odo.size()) break;
  }
  return out;
}

std::vector<Pattern> refine_shift(const Pattern& p, const SpaceSpec& spec) {
  int r = p.radius();
  Word right, left;
  for (const Word& w : p.vertices()) {
    if (w.length() != r) continue;
    if (w.empty() || w.letter_at(0).sign > 0) right = w;
    if (w.empty() || w.letter_at(0).sign < 0) left = w;
  }
  std::vector<Pattern> out;
  for (int gp : spec.gens()) {
    for (int gm : spec.gens()) {
      std::vector<Word> verts = p.vertices();
      Word r2 = right;
      r2.push(Letter{gp, +1});
      Word l2 = left;
      l2.push(Letter{gm, -1});
      verts.push_back(std::move(r2));
      verts.push_back(std::move(l2));
      std::sort(verts.begin(), verts.end(), ShortlexLess{});
      out.push_back(Pattern::from_sorted_unchecked(spec.rank(), std::move(verts)));
    }
  }
  return out;
}

// ---- enumeration cache ------------------------------------------------

constexpr int kCacheFormatVersion = 1;

std::filesystem::path cache_file(const std::string& dir, const std::string& space, int m) {
  std::string key = "treespace-cache-v" + std::to_string(kCacheFormatVersion) + "|" + space +
                    "|" + std::to_string(m);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv64(key)));
  return std::filesystem::path(dir) / (std::string(buf) + ".json");
}

std::optional<std::vector<Pattern>> cache_load(const std::string& dir,
                                               const std::string& space, int m) {
  std::ifstream in(cache_file(dir, space, m));
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
    if (doc.value("format_version", -1) != kCacheFormatVersion) return std::nullopt;
    if (doc.value("space", "") != space || doc.value("m", -1) != m) return std::nullopt;
    std::vector<Pattern> out;
    for (const auto& s : doc.at("patterns")) out.push_back(Pattern::parse_json(s));
    return out;
  } catch (...) {
    return std::nullopt;  // unreadable entries are ignored
  }
}

void cache_store(const std::string& dir, const std::string& space, int m,
                 const std::vector<Pattern>& pats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  nlohmann::ordered_json doc;
  doc["format_version"] = kCacheFormatVersion;
  doc["space"] = space;
  doc["m"] = m;
  doc["count"] = std::to_string(pats.size());
  auto arr = nlohmann::ordered_json::array();
  for (const Pattern& p : pats) arr.push_back(p.json());
  doc["patterns"] = std::move(arr);
  std::ofstream out(cache_file(dir, space, m));
  out << doc.dump();
}

}  // namespace

// ---- SpaceSpec ---------------------------------------------------------

SpaceSpec SpaceSpec::full(int n) {
  if (n < 2) throw UsageError("full space needs rank n >= 2");
  SpaceSpec s;
  s.kind_ = Kind::Full;
  s.n_ = n;
  return s;
}

SpaceSpec SpaceSpec::valence3() {
  SpaceSpec s;
  s.kind_ = Kind::Valence3;
  s.n_ = 2;
  return s;
}

SpaceSpec SpaceSpec::shift_image(int k, std::vector<int> gens, int n) {
  if (k < 1) throw UsageError("shift image needs at least one symbol");
  if (n < 2 || n < k) throw UsageError("shift image needs rank n >= max(2, symbols)");
  if (gens.empty()) {
    for (int i = 1; i <= k; ++i) gens.push_back(i);
  }
  if (static_cast<int>(gens.size()) != k)
    throw UsageError("shift image generator map must cover the alphabet");
  std::vector<int> sorted = gens;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("shift image generator map must be injective");
  for (int g : gens)
    if (g < 1 || g > n) throw UsageError("shift image generator out of 1..n");
  SpaceSpec s;
  s.kind_ = Kind::Shift;
  s.n_ = n;
  s.k_ = k;
  s.gens_ = std::move(gens);
  return s;
}

SpaceSpec SpaceSpec::orbit_closure(TreePtr tree, int exploration_depth) {
  if (!tree) throw UsageError("orbit closure needs a tree");
  if (exploration_depth < 1) throw UsageError("orbit closure needs exploration depth >= 1");
  SpaceSpec s;
  s.kind_ = Kind::Orbit;
  s.n_ = tree->rank();
  s.tree_ = std::move(tree);
  s.R_ = exploration_depth;
  return s;
}

std::string SpaceSpec::str() const {
  switch (kind_) {
    case Kind::Full:
      return "full:n=" + std::to_string(n_);
    case Kind::Valence3:
      return "valence3";
    case Kind::Shift: {
      std::string out = "shift:k=" + std::to_string(k_) + ":gens=";
      for (size_t i = 0; i < gens_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(gens_[i]);
      }
      return out + ":n=" + std::to_string(n_);
    }
    case Kind::Orbit:
      return "orbit:" + tree_->describe() + ":R=" + std::to_string(R_);
  }
  return "?";
}

int SpaceSpec::default_bound() const {
  switch (kind_) {
    case Kind::Full:
      return 2;
    case Kind::Valence3:
      return 3;
    case Kind::Shift:
      return 5;
    case Kind::Orbit:
      return 9;
  }
  return 0;
}

// ---- refinement and enumeration -----------------------------------------

std::vector<Pattern> refine(const Pattern& p, const SpaceSpec& spec) {
  require_realizable(p, spec);
  switch (spec.kind()) {
    case SpaceSpec::Kind::Full:
    case SpaceSpec::Kind::Valence3:
      return refine_by_children(p, spec);
    case SpaceSpec::Kind::Shift:
      return refine_shift(p, spec);
    case SpaceSpec::Kind::Orbit: {
      std::vector<Pattern> out;
      for (Pattern& q : enumerate_patterns(spec, p.radius() + 1)) {
        if (q.truncate(p.radius()) == p) out.push_back(std::move(q));
      }
      return out;
    }
  }
  return {};
}

std::vector<Pattern> enumerate_patterns(const SpaceSpec& spec, int m,
                                        const EnumOptions& opts) {
  if (m < 0) throw UsageError("pattern radius must be >= 0");
  int bound = opts.bound_override >= 0 ? opts.bound_override : spec.default_bound();
  if (m > bound) {
    // Counts are monotone in the radius, so the closed form at m (when known)
    // or the exact count at the bound is a certified lower bound.
    std::string lower;
    if (spec.kind() != SpaceSpec::Kind::Orbit) {
      try {
        lower = to_decimal(closed_form_count(spec, m));
      } catch (const UsageError&) {
        lower = to_decimal(count_covers(spec, bound, opts).count);
      } catch (const ResourceError&) {
      }
    }
    std::string msg = "radius " + std::to_string(m) + " exceeds the bound " +
                      std::to_string(bound) + " for space " + spec.str() +
                      " (pattern counts grow superexponentially";
    if (!lower.empty()) msg += "; the count is at least " + lower;
    throw ResourceError(msg + ")", lower);
  }
  if (spec.kind() == SpaceSpec::Kind::Orbit)
    return orbit_patterns(*spec.tree(), m, spec.exploration_depth(), opts);

  if (!opts.cache_dir.empty()) {
    if (auto hit = cache_load(opts.cache_dir, spec.str(), m)) return std::move(*hit);
  }

  std::vector<Pattern> frontier{Pattern::identity_only(spec.rank())};
  for (int level = 1; level <= m; ++level) {
    int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(frontier.size())));
    std::vector<std::vector<Pattern>> parts(static_cast<size_t>(workers));
    auto work = [&](int wi) {
      size_t lo = frontier.size() * static_cast<size_t>(wi) / static_cast<size_t>(workers);
      size_t hi = frontier.size() * static_cast<size_t>(wi + 1) / static_cast<size_t>(workers);
      for (size_t i = lo; i < hi; ++i) {
        auto kids = refine(frontier[i], spec);
        auto& dst = parts[static_cast<size_t>(wi)];
        dst.insert(dst.end(), std::make_move_iterator(kids.begin()),
                   std::make_move_iterator(kids.end()));
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (int wi = 0; wi < workers; ++wi) threads.emplace_back(work, wi);
      for (auto& t : threads) t.join();
    }
    std::vector<Pattern> next;
    for (auto& part : parts)
      next.insert(next.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
    std::sort(next.begin(), next.end(), serialization_shortlex_less);
    for (size_t i = 1; i < next.size(); ++i)
      if (next[i] == next[i - 1])
        throw std::logic_error("refinement produced a duplicate pattern");
    frontier = std::move(next);
  }

  if (!opts.cache_dir.empty()) cache_store(opts.cache_dir, spec.str(), m, frontier);
  return frontier;
}

// ---- independent oracle --------------------------------------------------

namespace {

struct OracleSearch {
  const SpaceSpec& spec;
  int m;
  std::vector<Word> candidates;         // ambient ball minus the identity
  std::vector<int> parent;              // index into candidates, -1 for identity
  std::vector<char> chosen;
  std::vector<Pattern> found;

  struct Block {
    int parent;  // -1 for the identity
    int begin, end;
  };
  std::vector<Block> blocks;

  void run() {
    build();
    descend(0);
    std::sort(found.begin(), found.end(), serialization_shortlex_less);
  }

  void build() {
    TreePtr ambient = full_cayley(spec.rank());
    const Pattern& ball = ambient->ball(m);
    for (const Word& w : ball.vertices())
      if (!w.empty()) candidates.push_back(w);
    chosen.assign(candidates.size(), 0);
    auto index_of = [&](const Word& w) -> int {
      auto it = std::lower_bound(candidates.begin(), candidates.end(), w, ShortlexLess{});
      return static_cast<int>(it - candidates.begin());
    };
    parent.resize(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
      Word p = candidates[i].parent();
      parent[i] = p.empty() ? -1 : index_of(p);
    }
    for (size_t i = 0; i < candidates.size();) {
      size_t j = i;
      while (j < candidates.size() && parent[j] == parent[i]) ++j;
      blocks.push_back({parent[i], static_cast<int>(i), static_cast<int>(j)});
      i = j;
    }
  }

  void descend(size_t bi) {
    if (bi == blocks.size()) {
      emit();
      return;
    }
    const Block& b = blocks[bi];
    bool parent_in = b.parent < 0 || chosen[static_cast<size_t>(b.parent)];
    if (!parent_in) {
      descend(bi + 1);  // the whole sibling set is forced out
      return;
    }
    int s = b.end - b.begin;
    bool exact = spec.kind() == SpaceSpec::Kind::Valence3;
    int need = b.parent < 0 ? 3 : 2;
    for (unsigned mask = 0; mask < (1u << s); ++mask) {
      if (exact && std::popcount(mask) != need) continue;
      for (int i = 0; i < s; ++i)
        chosen[static_cast<size_t>(b.begin + i)] = (mask >> i) & 1;
      descend(bi + 1);
    }
    for (int i = 0; i < s; ++i) chosen[static_cast<size_t>(b.begin + i)] = 0;
  }

  void emit() {
    std::vector<Word> verts{Word()};
    for (size_t i = 0; i < candidates.size(); ++i)
      if (chosen[i]) verts.push_back(candidates[i]);
    Pattern p = Pattern::from_sorted_unchecked(spec.rank(), std::move(verts));
    if (p.radius() != m) return;
    if (spec.kind() == SpaceSpec::Kind::Valence3 && !is_valence3_ball(p)) return;
    if (spec.kind() == SpaceSpec::Kind::Shift && !is_shift_path_ball(p, spec.gens())) return;
    found.push_back(std::move(p));
  }
};

}  // namespace

std::vector<Pattern> oracle_enumerate(const SpaceSpec& spec, int m) {
  if (m < 0) throw UsageError("pattern radius must be >= 0");
  if (spec.kind() == SpaceSpec::Kind::Orbit)
    throw UsageError("the subset-search oracle does not cover orbit closures");
  if (m == 0) return {Pattern::identity_only(spec.rank())};
  size_t ambient = static_cast<size_t>(full_cayley(spec.rank())->ball(m).size()) - 1;
  bool feasible = ambient <= 16 || (spec.kind() == SpaceSpec::Kind::Valence3 && m <= 3);
  if (!feasible)
    throw ResourceError("oracle subset search infeasible: " + std::to_string(ambient) +
                        " free vertices (bound 16; valence-3 constrained search allows m <= 3)");
  OracleSearch search{spec, m, {}, {}, {}, {}, {}};
  search.run();
  return std::move(search.found);
}

// ---- counts and estimates -------------------------------------------------

CountRow count_covers(const SpaceSpec& spec, int m, const EnumOptions& opts) {
  if (spec.kind() == SpaceSpec::Kind::Orbit) {
    OrbitResult r = orbit_cover_count(*spec.tree(), m, spec.exploration_depth(), opts);
    return CountRow{m, r.count, "recursive"};
  }
  auto pats = enumerate_patterns(spec, m, opts);
  return CountRow{m, BigCount(static_cast<unsigned long>(pats.size())), "recursive"};
}

BigCount closed_form_count(const SpaceSpec& spec, int m) {
  if (m < 0) throw UsageError("radius must be >= 0");
  if (m == 0) return 1;
  switch (spec.kind()) {
    case SpaceSpec::Kind::Valence3:
      if (m > 20) throw ResourceError("valence-3 closed form too large to materialize past m=20");
      // 4 * 3^(3*(2^(m-1)-1))
      return 4 * pow_big(3, 3 * ((1ull << (m - 1)) - 1));
    case SpaceSpec::Kind::Shift:
      if (m > 100000) throw ResourceError("shift closed form too large to materialize");
      return pow_big(static_cast<unsigned long>(spec.symbols()),
                     2ull * static_cast<unsigned long>(m));
    default:
      throw UsageError("no closed form known for space " + spec.str());
  }
}

BigCount branch_cover_closed_form(int l) {
  if (l < 1) throw UsageError("branch cover closed form needs l >= 1");
  return (pow_big(3, static_cast<unsigned long>(l - 1)) + 1) / 2;
}

DimensionEstimate box_dim_estimates(const CountTable& table) {
  if (table.rows.size() < 2)
    throw UsageError("dimension estimate needs at least two count rows");
  DimensionEstimate est;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const CountRow& r : table.rows) {
    if (r.m < 1) throw UsageError("dimension estimate needs radii m >= 1");
    if (r.count <= 0) throw UsageError("counts must be positive");
    double y = log_natural(r.count);
    double v = y / r.m;
    est.ms.push_back(r.m);
    est.per_m.push_back(v);
    sx += r.m;
    sy += y;
    sxx += static_cast<double>(r.m) * r.m;
    sxy += r.m * y;
  }
  double n = static_cast<double>(table.rows.size());
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw UsageError("dimension estimate needs two distinct radii");
  est.slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - est.slope * sx) / n;
  double ss = 0;
  for (const CountRow& r : table.rows) {
    double y = log_natural(r.count);
    double d = y - (est.slope * r.m + intercept);
    ss += d * d;
  }
  est.residual = std::sqrt(ss / n);
  est.value_min = *std::min_element(est.per_m.begin(), est.per_m.end());
  est.value_max = *std::max_element(est.per_m.begin(), est.per_m.end());
  est.value_last = est.per_m.back();
  return est;
}

GrowthDiagnostic growth_diagnostic(const CountTable& table, double alpha) {
  if (!(alpha >= 0) && !std::isinf(alpha))
    throw UsageError("growth diagnostic needs alpha >= 0");
  GrowthDiagnostic diag;
  diag.alpha = alpha;
  for (const CountRow& r : table.rows) {
    if (r.count <= 0) throw UsageError("counts must be positive");
    if (!diag.first_failure_m && !std::isinf(alpha) &&
        log_natural(r.count) >= alpha * r.m) {
      diag.first_failure_m = r.m;
    }
  }
  for (size_t i = 0; i + 1 < table.rows.size(); ++i) {
    diag.log_ratios.push_back(log_natural(table.rows[i + 1].count) -
                              log_natural(table.rows[i].count));
  }
  diag.ratios_strictly_increasing = true;
  for (size_t i = 0; i + 1 < diag.log_ratios.size(); ++i)
    if (diag.log_ratios[i + 1] <= diag.log_ratios[i]) diag.ratios_strictly_increasing = false;
  return diag;
}

// ---- relabeling and the Hoelder comparison --------------------------------

Pattern relabel_embed(const Pattern& p, const std::vector<int>& iota, int n_target) {
  if (n_target < 2) throw UsageError("relabel target rank must be >= 2");
  std::vector<int> sorted = iota;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("relabel map must be injective");
  for (int g : iota)
    if (g < 1 || g > n_target) throw UsageError("relabel image out of 1..n");
  std::vector<Word> verts;
  verts.reserve(static_cast<size_t>(p.size()));
  for (const Word& w : p.vertices()) {
    std::vector<Letter> letters;
    for (int i = 0; i < w.length(); ++i) {
      Letter l = w.letter_at(i);
      if (l.index > static_cast<int>(iota.size()))
        throw UsageError("relabel map does not cover index " + std::to_string(l.index));
      letters.push_back(Letter{iota[static_cast<size_t>(l.index - 1)], l.sign});
    }
    verts.push_back(Word::from_letters(letters));
  }
  return Pattern::from_vertices(n_target, std::move(verts));
}

HoelderReport hoelder_check(const SequencePtr& s1, const SequencePtr& s2,
                            const std::vector<int>& gens, int n, int cap) {
  if (cap < 0) throw UsageError("cap must be >= 0");
  if (s1->alphabet_size() != s2->alphabet_size())
    throw UsageError("sequences must share an alphabet");
  HoelderReport rep;
  if (s1->letter(0) != s2->letter(0)) {
    rep.sequence_agreement = -1;
  } else {
    int k = 0;
    while (k < cap && s1->letter(k + 1) == s2->letter(k + 1) &&
           s1->letter(-(k + 1)) == s2->letter(-(k + 1)))
      ++k;
    rep.sequence_agreement = k;
    rep.sequence_at_cap = (k == cap);
  }
  auto t1 = shift_path_tree(s1, gens, n);
  auto t2 = shift_path_tree(s2, gens, n);
  MetricResult r = distance_exponent(*t1, *t2, cap);
  rep.tree_agreement = r.exponent;
  rep.tree_at_cap = r.at_least_cap;
  rep.within_one = std::abs(rep.tree_agreement - rep.sequence_agreement) <= 1;
  return rep;
}

}  // namespace treespace
