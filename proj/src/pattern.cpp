#include "treespace/pattern.hpp"

#include <algorithm>

#include "treespace/errors.hpp"

namespace treespace {

Pattern Pattern::from_vertices(int n, std::vector<Word> vertices) {
  if (n < 2) throw UsageError("pattern rank must be >= 2");
  std::sort(vertices.begin(), vertices.end(), ShortlexLess{});
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  if (vertices.empty() || !vertices.front().empty())
    throw UsageError("pattern must contain the identity vertex");
  Pattern p;
  p.n_ = n;
  p.verts_ = std::move(vertices);
  for (const Word& w : p.verts_) {
    if (w.max_index() > n) throw UsageError("pattern vertex uses index above rank n");
    if (!w.empty() && !p.contains(w.parent()))
      throw UsageError("pattern is not prefix-closed at vertex " + w.str());
  }
  return p;
}

Pattern Pattern::from_sorted_unchecked(int n, std::vector<Word> vertices) {
  Pattern p;
  p.n_ = n;
  p.verts_ = std::move(vertices);
  return p;
}

Pattern Pattern::identity_only(int n) {
  return from_sorted_unchecked(n, {Word()});
}

int Pattern::radius() const {
  return verts_.empty() ? 0 : verts_.back().length();
}

bool Pattern::contains(const Word& w) const {
  return std::binary_search(verts_.begin(), verts_.end(), w, ShortlexLess{});
}

int Pattern::valence(const Word& w) const {
  int count = 0;
  if (!w.empty() && contains(w.parent())) ++count;
  for (int c = 0; c < 2 * n_; ++c) {
    if (!w.empty() && code_inverse(w.code_at(w.length() - 1)) == c) continue;
    Word child = w;
    child.push(static_cast<LetterCode>(c));
    if (contains(child)) ++count;
  }
  return count;
}

std::vector<Word> Pattern::boundary() const {
  int r = radius();
  std::vector<Word> out;
  for (const Word& w : verts_)
    if (w.length() == r) out.push_back(w);
  return out;
}

Pattern Pattern::truncate(int m) const {
  if (m < 0) throw UsageError("truncation radius must be >= 0");
  std::vector<Word> kept;
  for (const Word& w : verts_) {
    if (w.length() <= m) kept.push_back(w);
  }
  return from_sorted_unchecked(n_, std::move(kept));
}

Pattern Pattern::rebase(const Word& g) const {
  if (!contains(g))
    throw UsageError("rebase undefined: " + g.str() + " is not a vertex of the pattern");
  Word ginv = g.inverse();
  std::vector<Word> moved;
  moved.reserve(verts_.size());
  for (const Word& w : verts_) moved.push_back(multiply(ginv, w));
  std::sort(moved.begin(), moved.end(), ShortlexLess{});
  return from_sorted_unchecked(n_, std::move(moved));
}

std::string Pattern::json() const {
  std::string out = "{\"n\":" + std::to_string(n_) + ",\"vertices\":[";
  for (size_t i = 0; i < verts_.size(); ++i) {
    if (i) out += ',';
    out += '"';
    out += verts_[i].str();
    out += '"';
  }
  out += "]}";
  return out;
}

std::uint64_t Pattern::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : json()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

Pattern Pattern::parse_json(const std::string& text) {
  // Minimal strict parser for the canonical form; avoids dragging a JSON
  // library into the core for a two-field document.
  auto fail = [&]() -> Pattern { throw UsageError("malformed pattern JSON: " + text); };
  size_t pos = text.find("\"n\":");
  if (pos == std::string::npos) return fail();
  pos += 4;
  int n = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9')
    n = n * 10 + (text[pos++] - '0');
  size_t open = text.find('[', pos);
  size_t close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) return fail();
  std::vector<Word> verts;
  size_t at = open + 1;
  while (at < close) {
    size_t q1 = text.find('"', at);
    if (q1 == std::string::npos || q1 > close) break;
    size_t q2 = text.find('"', q1 + 1);
    if (q2 == std::string::npos || q2 > close) return fail();
    verts.push_back(Word::parse(text.substr(q1 + 1, q2 - q1 - 1)));
    at = q2 + 1;
  }
  return from_vertices(n, std::move(verts));
}

bool serialization_shortlex_less(const Pattern& a, const Pattern& b) {
  std::string sa = a.json(), sb = b.json();
  if (sa.size() != sb.size()) return sa.size() < sb.size();
  return sa < sb;
}

void sort_canonical(std::vector<Pattern>& patterns) {
  std::vector<std::pair<std::string, size_t>> keys;
  keys.reserve(patterns.size());
  for (size_t i = 0; i < patterns.size(); ++i) keys.emplace_back(patterns[i].json(), i);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  std::vector<Pattern> out;
  out.reserve(patterns.size());
  for (const auto& [key, idx] : keys) out.push_back(std::move(patterns[idx]));
  patterns = std::move(out);
}

bool ball_contains(const ClopenBall& outer, const ClopenBall& inner) {
  if (inner.radius() < outer.radius()) return false;
  return inner.pattern.truncate(outer.radius()) == outer.pattern;
}

std::vector<ClopenBall> partition_reduce(const std::vector<ClopenBall>& cover) {
  // Largest balls (smallest radius) first; canonical tie-break keeps the
  // result independent of input order.
  std::vector<ClopenBall> sorted = cover;
  std::sort(sorted.begin(), sorted.end(), [](const ClopenBall& a, const ClopenBall& b) {
    if (a.radius() != b.radius()) return a.radius() < b.radius();
    return serialization_shortlex_less(a.pattern, b.pattern);
  });
  std::vector<ClopenBall> kept;
  for (const ClopenBall& b : sorted) {
    bool covered = false;
    for (const ClopenBall& k : kept) {
      if (ball_contains(k, b)) {
        covered = true;
        break;
      }
    }
    if (!covered) kept.push_back(b);
  }
  return kept;
}

int agreement_radius(const BallSource& a, const BallSource& b, int cap) {
  if (cap < 0) throw UsageError("agreement cap must be >= 0");
  int r = 0;
  while (r < cap && a(r + 1) == b(r + 1)) ++r;
  return r;
}

MetricResult distance_exponent(const BallSource& a, const BallSource& b, int cap) {
  int r = agreement_radius(a, b, cap);
  return MetricResult{r, r == cap};
}

}  // namespace treespace
