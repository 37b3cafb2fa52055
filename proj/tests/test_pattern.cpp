#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "treespace/errors.hpp"
#include "treespace/pattern.hpp"

using namespace treespace;

namespace {

Word W(const std::string& s) { return Word::parse(s); }

Pattern P(int n, std::initializer_list<const char*> words) {
  std::vector<Word> v;
  for (const char* s : words) v.push_back(W(s));
  return Pattern::from_vertices(n, std::move(v));
}

// Random prefix-closed pattern grown vertex by vertex.
Pattern random_pattern(std::mt19937_64& rng, int n, int max_size) {
  std::vector<Word> verts{Word()};
  std::uniform_int_distribution<size_t> pick(0, 1u << 30);
  int target = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_size));
  while (static_cast<int>(verts.size()) < target) {
    const Word& base = verts[pick(rng) % verts.size()];
    Word child = base;
    child.push(static_cast<LetterCode>(rng() % (2 * static_cast<unsigned>(n))));
    if (child.length() == base.length() + 1 &&
        std::find(verts.begin(), verts.end(), child) == verts.end())
      verts.push_back(child);
  }
  return Pattern::from_vertices(n, std::move(verts));
}

void check_invariants(const Pattern& p) {
  CHECK(p.contains(Word()));
  for (const Word& w : p.vertices())
    if (!w.empty()) CHECK(p.contains(w.parent()));
}

std::multiset<int> valence_multiset(const Pattern& p) {
  std::multiset<int> out;
  for (const Word& w : p.vertices()) out.insert(p.valence(w));
  return out;
}

}  // namespace

TEST_CASE("construction validates") {
  CHECK_THROWS_AS(Pattern::from_vertices(2, {W("1")}), UsageError);          // no identity
  CHECK_THROWS_AS(Pattern::from_vertices(2, {W("e"), W("1.2")}), UsageError);  // gap
  CHECK_THROWS_AS(Pattern::from_vertices(2, {W("e"), W("3")}), UsageError);  // index > n
  Pattern p = P(2, {"e", "1", "1.2"});
  CHECK(p.radius() == 2);
  CHECK(p.size() == 3);
}

TEST_CASE("truncate") {
  Pattern p = P(2, {"e", "1", "1.2"});
  CHECK(p.truncate(1) == P(2, {"e", "1"}));
  CHECK(p.truncate(p.radius()) == p);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Pattern q = random_pattern(rng, 2, 20);
    int m = static_cast<int>(rng() % 5), k = static_cast<int>(rng() % 5);
    CHECK(q.truncate(m).truncate(k) == q.truncate(std::min(m, k)));
    check_invariants(q.truncate(m));
  }
}

TEST_CASE("rebase") {
  CHECK(P(2, {"e", "1"}).rebase(W("1")) == P(2, {"e", "-1"}));
  Pattern p = P(2, {"e", "1", "2", "1.1"});
  CHECK(p.rebase(W("e")) == p);
  CHECK_THROWS_AS(p.rebase(W("-2")), UsageError);

  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    Pattern q = random_pattern(rng, 2, 16);
    const auto& verts = q.vertices();
    Word g = verts[rng() % verts.size()];
    Word h = verts[rng() % verts.size()];

    // Pseudogroup composition law, verified against direct set computation.
    Pattern via_g = q.rebase(g).rebase(multiply(g.inverse(), h));
    Pattern direct = q.rebase(h);
    CHECK(via_g == direct);
    std::set<Word> expect;
    for (const Word& w : q.vertices()) expect.insert(multiply(h.inverse(), w));
    std::set<Word> got(direct.vertices().begin(), direct.vertices().end());
    CHECK(got == expect);

    // Rebasing preserves size and the valence multiset.
    CHECK(q.rebase(g).size() == q.size());
    CHECK(valence_multiset(q.rebase(g)) == valence_multiset(q));
    check_invariants(q.rebase(g));
  }
}

TEST_CASE("canonical serialization and hash") {
  Pattern p = P(2, {"e", "1", "1.2"});
  CHECK(p.json() == R"({"n":2,"vertices":["e","1","1.2"]})");
  CHECK(Pattern::parse_json(p.json()) == p);
  CHECK(p.content_hash() == Pattern::parse_json(p.json()).content_hash());
  CHECK(p.content_hash() != P(2, {"e", "1"}).content_hash());
}

TEST_CASE("ball containment") {
  ClopenBall b1(P(2, {"e", "1"}));
  ClopenBall b2(P(2, {"e", "1", "1.1", "1.2"}));
  CHECK(ball_contains(b1, b1));
  CHECK(ball_contains(b1, b2));   // finer ball sits inside the coarser one
  CHECK(!ball_contains(b2, b1));
  ClopenBall c(P(2, {"e", "2"}));
  CHECK(!ball_contains(b1, c));
  CHECK(!ball_contains(c, b1));
}

TEST_CASE("partition_reduce") {
  ClopenBall b1(P(2, {"e", "1"}));
  ClopenBall b2(P(2, {"e", "1", "1.1", "1.2"}));
  CHECK(partition_reduce({b1, b1}) == std::vector<ClopenBall>{b1});
  CHECK(partition_reduce({b1, b2}) == std::vector<ClopenBall>{b1});
  CHECK(partition_reduce({b2, b1}) == std::vector<ClopenBall>{b1});

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    // Random nested family: balls at several radii along random patterns.
    std::vector<ClopenBall> cover;
    for (int i = 0; i < 12; ++i) {
      Pattern q = random_pattern(rng, 2, 14);
      cover.emplace_back(q);
      if (q.radius() > 0) cover.emplace_back(q.truncate(q.radius() - 1));
    }
    auto reduced = partition_reduce(cover);
    // Pairwise disjoint: no containment either way among kept balls.
    for (size_t i = 0; i < reduced.size(); ++i)
      for (size_t j = 0; j < reduced.size(); ++j)
        if (i != j) CHECK(!ball_contains(reduced[i], reduced[j]));
    // Union preserved: every dropped ball is inside some kept ball.
    for (const ClopenBall& b : cover) {
      bool covered = false;
      for (const ClopenBall& k : reduced)
        if (ball_contains(k, b)) covered = true;
      CHECK(covered);
    }
    // Output is a subcollection.
    for (const ClopenBall& k : reduced)
      CHECK(std::find(cover.begin(), cover.end(), k) != cover.end());
  }
}

TEST_CASE("agreement radius on ball sources") {
  Pattern big = P(2, {"e", "1", "2", "1.1"});
  auto source_of = [](Pattern p) {
    return [p](int m) { return p.truncate(m); };
  };
  CHECK(agreement_radius(source_of(big), source_of(big), 10) == 10);
  Pattern other = P(2, {"e", "1", "2", "1.2"});
  CHECK(agreement_radius(source_of(big), source_of(other), 10) == 1);
  CHECK(agreement_radius(source_of(big), source_of(P(2, {"e", "1"})), 10) == 0);

  MetricResult r = distance_exponent(source_of(big), source_of(other), 10);
  CHECK(r == MetricResult{1, false});
  CHECK(distance_exponent(source_of(big), source_of(big), 10) == MetricResult{10, true});
}
