#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "treespace/census.hpp"
#include "treespace/errors.hpp"

using namespace treespace;

namespace {

Word W(const std::string& s) { return Word::parse(s); }

Pattern P(int n, std::initializer_list<const char*> words) {
  std::vector<Word> v;
  for (const char* s : words) v.push_back(W(s));
  return Pattern::from_vertices(n, std::move(v));
}

CountTable table_for(const SpaceSpec& spec, int lo, int hi) {
  CountTable t;
  t.space = spec.str();
  for (int m = lo; m <= hi; ++m) t.rows.push_back(count_covers(spec, m));
  return t;
}

}  // namespace

TEST_CASE("valence-3 census counts") {
  auto spec = SpaceSpec::valence3();
  CHECK(enumerate_patterns(spec, 1).size() == 4);
  CHECK(enumerate_patterns(spec, 2).size() == 108);
  CHECK(enumerate_patterns(spec, 3).size() == 78732);
  CHECK(count_covers(spec, 3).count == BigCount(78732));
  CHECK(closed_form_count(spec, 1) == 4);
  CHECK(closed_form_count(spec, 2) == 108);
  CHECK(closed_form_count(spec, 3) == 78732);
  // Exactly the closed form at every enumerated radius.
  for (int m = 1; m <= 3; ++m)
    CHECK(BigCount(static_cast<unsigned long>(enumerate_patterns(spec, m).size())) ==
          closed_form_count(spec, m));
}

TEST_CASE("full-space census counts") {
  auto spec = SpaceSpec::full(2);
  CHECK(enumerate_patterns(spec, 1).size() == 15);
  // Refinement recurrence sum_b C(4,b)*(8^b-1) = 6545; the oracle below is
  // the authoritative check.
  CHECK(enumerate_patterns(spec, 2).size() == 6545);
}

TEST_CASE("shift-image census counts") {
  auto spec = SpaceSpec::shift_image(2, {}, 2);
  for (int m = 1; m <= 5; ++m) {
    auto pats = enumerate_patterns(spec, m);
    unsigned long expect = 1;
    for (int i = 0; i < 2 * m; ++i) expect *= 2;
    CHECK(pats.size() == expect);  // |A|^(2m) label windows
    for (const Pattern& p : pats) CHECK(p.size() == 2 * m + 1);
  }
}

TEST_CASE("oracle agrees with recursive enumeration wherever feasible") {
  auto valence3 = SpaceSpec::valence3();
  auto full2 = SpaceSpec::full(2);
  auto shift2 = SpaceSpec::shift_image(2, {}, 2);
  for (int m = 0; m <= 2; ++m) {
    CHECK(oracle_enumerate(full2, m) == enumerate_patterns(full2, m));
    CHECK(oracle_enumerate(valence3, m) == enumerate_patterns(valence3, m));
    CHECK(oracle_enumerate(shift2, m) == enumerate_patterns(shift2, m));
  }
  CHECK(oracle_enumerate(valence3, 3) == enumerate_patterns(valence3, 3));
  CHECK(oracle_enumerate(shift2, 1).size() == 4);
  CHECK_THROWS_AS(oracle_enumerate(full2, 3), ResourceError);
}

TEST_CASE("refinement law") {
  auto valence3 = SpaceSpec::valence3();
  // Radius-1 valence-3 patterns refine 27 ways; radius-2 patterns 729 ways.
  for (const Pattern& p : enumerate_patterns(valence3, 1)) {
    CHECK(p.boundary().size() == 3);
    CHECK(refine(p, valence3).size() == 27);
  }
  for (const Pattern& p : enumerate_patterns(valence3, 2)) {
    CHECK(p.boundary().size() == 6);
    CHECK(refine(p, valence3).size() == 729);
  }
  auto full2 = SpaceSpec::full(2);
  CHECK(refine(P(2, {"e", "1"}), full2).size() == 7);

  CHECK_THROWS_AS(refine(P(2, {"e", "1"}), valence3), UsageError);  // not realizable
}

TEST_CASE("refinement partitions the next level") {
  for (auto spec : {SpaceSpec::valence3(), SpaceSpec::full(2), SpaceSpec::shift_image(2, {}, 2)}) {
    int m = 2;
    auto coarse = enumerate_patterns(spec, m - 1);
    std::vector<Pattern> refined;
    for (const Pattern& p : coarse) {
      for (Pattern& q : refine(p, spec)) {
        CHECK(q.truncate(m - 1) == p);  // refinements stay inside their ball
        refined.push_back(std::move(q));
      }
    }
    std::sort(refined.begin(), refined.end(), serialization_shortlex_less);
    CHECK(refined == enumerate_patterns(spec, m));
  }
}

TEST_CASE("enumeration is deterministic across worker counts") {
  auto spec = SpaceSpec::valence3();
  EnumOptions w1, w4;
  w1.workers = 1;
  w4.workers = 4;
  CHECK(enumerate_patterns(spec, 3, w1) == enumerate_patterns(spec, 3, w4));
}

TEST_CASE("resource refusal carries the bound and a lower bound") {
  auto full2 = SpaceSpec::full(2);
  try {
    enumerate_patterns(full2, 9);
    CHECK(false);
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("bound 2") != std::string::npos);
    CHECK(e.lower_bound() == "6545");
  }
  EnumOptions raised;
  raised.bound_override = 3;
  CHECK_THROWS_AS(enumerate_patterns(SpaceSpec::valence3(), 4, raised), ResourceError);
  raised.bound_override = 4;  // legal but big: do not run here
}

TEST_CASE("orbit cover counts for the branch tree") {
  auto l2 = branch_tree();
  OrbitResult r1 = orbit_cover_count(*l2, 1, 3);
  CHECK(r1.count == 2);
  CHECK(r1.stabilized);
  OrbitResult r2 = orbit_cover_count(*l2, 2, 4);
  CHECK(r2.count == 3);
  CHECK(r2.stabilized);
  // Direct enumeration exceeds the closed form (3^(l-1)+1)/2 by exactly one.
  for (int l = 1; l <= 4; ++l) {
    OrbitResult r = orbit_cover_count(*l2, l, l + 2);
    CHECK(r.count == branch_cover_closed_form(l) + 1);
  }
  // Homogeneous tree: a single pattern at every radius.
  auto cayley = full_cayley(2);
  for (int l = 1; l <= 3; ++l) {
    OrbitResult r = orbit_cover_count(*cayley, l, l);
    CHECK(r.count == 1);
  }
  CHECK_THROWS_AS(orbit_cover_count(*l2, 3, 2), UsageError);  // depth below radius
}

TEST_CASE("orbit patterns are canonical and deduplicated") {
  auto l2 = branch_tree();
  auto pats = orbit_patterns(*l2, 2, 4);
  CHECK(pats.size() == 3);
  for (size_t i = 1; i < pats.size(); ++i) CHECK(!(pats[i] == pats[i - 1]));
  // The basepoint ball itself is among them.
  CHECK(std::find(pats.begin(), pats.end(), l2->ball(2)) != pats.end());

  EnumOptions w8;
  w8.workers = 8;
  CHECK(orbit_patterns(*l2, 2, 4, w8) == pats);
  // Worker split and confirm-cache starvation do not change results.
  EnumOptions tiny;
  tiny.workers = 3;
  tiny.confirm_cache_bytes = 64;
  CHECK(orbit_patterns(*l2, 2, 4, tiny) == pats);
  OrbitResult starved = orbit_cover_count(*l2, 3, 5, tiny);
  CHECK(starved.count == orbit_cover_count(*l2, 3, 5).count);
}

TEST_CASE("orbit enumeration respects the visit budget") {
  EnumOptions opts;
  opts.visit_budget = 1000;
  CHECK_THROWS_AS(orbit_cover_count(*branch_tree(), 6, 8, opts), ResourceError);
}

TEST_CASE("orbit closure space plugs into the census surface") {
  auto spec = SpaceSpec::orbit_closure(branch_tree(), 4);
  CHECK(enumerate_patterns(spec, 2).size() == 3);
  CHECK(count_covers(spec, 2).count == 3);
  auto pats = enumerate_patterns(spec, 2);
  auto kids = refine(pats[0], spec);
  for (const Pattern& q : kids) CHECK(q.truncate(2) == pats[0]);
}

TEST_CASE("box dimension estimates") {
  // Exact exponential counts k^(2m): slope is exactly 2 ln 2.
  auto shift2 = SpaceSpec::shift_image(2, {}, 2);
  auto est = box_dim_estimates(table_for(shift2, 1, 5));
  CHECK(est.slope == doctest::Approx(2 * std::log(2.0)).epsilon(1e-13));
  CHECK(est.residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(est.per_m.back() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-13));

  // Valence-3 per-m values increase and pass 3 by m=3.
  auto v3 = box_dim_estimates(table_for(SpaceSpec::valence3(), 1, 3));
  CHECK(v3.per_m[0] < v3.per_m[1]);
  CHECK(v3.per_m[1] < v3.per_m[2]);
  CHECK(v3.per_m[2] > 3.0);
  CHECK(v3.value_max == v3.per_m[2]);

  CountTable tiny;
  tiny.rows.push_back(CountRow{1, BigCount(4), "recursive"});
  CHECK_THROWS_AS(box_dim_estimates(tiny), UsageError);
}

TEST_CASE("log of huge exact counts stays accurate") {
  // ln(3^400) against 400*ln(3).
  BigCount huge = pow_big(3, 400);
  CHECK(log_natural(huge) == doctest::Approx(400 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("growth diagnostic") {
  auto v3 = table_for(SpaceSpec::valence3(), 1, 3);
  auto d2 = growth_diagnostic(v3, 2.0);
  CHECK(d2.first_failure_m == 2);  // 108 >= e^4
  CHECK(d2.log_ratios.size() == 2);
  CHECK(d2.log_ratios[0] == doctest::Approx(std::log(27.0)));
  CHECK(d2.log_ratios[1] == doctest::Approx(std::log(729.0)));
  CHECK(d2.ratios_strictly_increasing);

  auto d10 = growth_diagnostic(v3, 10.0);
  CHECK(!d10.first_failure_m.has_value());  // ln 78732 < 30

  auto dinf = growth_diagnostic(v3, INFINITY);
  CHECK(!dinf.first_failure_m.has_value());

  auto shift2 = table_for(SpaceSpec::shift_image(2, {}, 2), 1, 5);
  CHECK(!growth_diagnostic(shift2, 1.5).first_failure_m.has_value());  // 1.5 > 2 ln 2
  CHECK(growth_diagnostic(shift2, 1.0).first_failure_m == 2);
}

TEST_CASE("relabeling is an isometry onto its image") {
  Pattern p = P(2, {"e", "1", "-2"});
  CHECK(relabel_embed(p, {1, 2}, 2) == p);
  Pattern q = relabel_embed(p, {2, 3}, 3);
  CHECK(q.rank() == 3);
  CHECK(q.radius() == p.radius());
  CHECK(q.contains(W("2")));
  CHECK(q.contains(W("-3")));
  CHECK_THROWS_AS(relabel_embed(p, {1, 1}, 2), UsageError);

  // Agreement radii are preserved pairwise on random seeded trees.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto t1 = seeded_valence3_tree(rng());
    auto t2 = seeded_valence3_tree(rng());
    int cap = 6;
    int before = agreement_radius(*t1, *t2, cap);
    std::vector<int> iota{2, 3};
    auto src1 = [&](int m) { return relabel_embed(t1->ball(m), iota, 3); };
    auto src2 = [&](int m) { return relabel_embed(t2->ball(m), iota, 3); };
    int after = agreement_radius(BallSource(src1), BallSource(src2), cap);
    CHECK(before == after);
  }

  // Valence-3 patterns stay valence-3 after relabeling.
  auto b = seeded_valence3_tree(5)->ball(3);
  Pattern rb = relabel_embed(b, {3, 1}, 3);
  for (const Word& w : rb.vertices())
    if (w.length() < 3) CHECK(rb.valence(w) == 3);
}

TEST_CASE("hoelder comparison of sequence and ball metrics") {
  auto tm = thue_morse_source();
  std::vector<int> gens{1, 2};

  auto same = hoelder_check(tm, tm, gens, 2, 8);
  CHECK(same.sequence_at_cap);
  CHECK(same.tree_at_cap);
  CHECK(same.within_one);

  auto shifted = hoelder_check(tm, shifted_source(tm, 1), gens, 2, 10);
  CHECK(shifted.within_one);

  auto opposite = hoelder_check(periodic_source("xy"), periodic_source("yx"), gens, 2, 10);
  CHECK(opposite.sequence_agreement == -1);  // the symbols already differ at 0
  CHECK(opposite.tree_agreement == 0);
  CHECK(opposite.within_one);

  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto s1 = seeded_source(rng(), 2);
    auto s2 = seeded_source(rng(), 2);
    CHECK(hoelder_check(s1, s2, gens, 2, 8).within_one);
  }
}

TEST_CASE("ultrametric laws on seeded trees") {
  std::mt19937_64 rng(7);
  int cap = 8;
  for (int trial = 0; trial < 300; ++trial) {
    auto t1 = seeded_valence3_tree(rng() % 64);
    auto t2 = seeded_valence3_tree(rng() % 64);
    auto t3 = seeded_valence3_tree(rng() % 64);
    int r12 = agreement_radius(*t1, *t2, cap);
    int r23 = agreement_radius(*t2, *t3, cap);
    int r13 = agreement_radius(*t1, *t3, cap);
    CHECK(r13 >= std::min(r12, r23));
    if (r12 != r23) CHECK(r13 == std::min(r12, r23));
  }
}

TEST_CASE("generator maps are Lipschitz with slack one") {
  std::mt19937_64 rng(17);
  int cap = 8;
  int done = 0;
  while (done < 100) {
    auto t1 = seeded_valence3_tree(rng() % 256);
    auto t2 = seeded_valence3_tree(rng() % 256);
    // A unit translation defined on both trees.
    Word h;
    bool found = false;
    for (int c = 0; c < 4 && !found; ++c) {
      Word cand;
      cand.push(static_cast<LetterCode>(c));
      if (t1->contains(cand) && t2->contains(cand)) {
        h = cand;
        found = true;
      }
    }
    REQUIRE(found);
    int before = agreement_radius(*t1, *t2, cap);
    auto m1 = rebased_tree(t1, h);
    auto m2 = rebased_tree(t2, h);
    int after = agreement_radius(*m1, *m2, cap - 1);
    CHECK(after >= std::min(before, cap - 1) - 1);
    ++done;
  }
}
