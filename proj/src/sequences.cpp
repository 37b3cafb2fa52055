#include "treespace/sequences.hpp"

#include <algorithm>
#include <mutex>
#include <set>

#include "treespace/errors.hpp"

namespace treespace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class PeriodicSource final : public SequenceSource {
 public:
  explicit PeriodicSource(std::string word) : word_(std::move(word)) {
    if (word_.empty()) throw UsageError("periodic source needs a non-empty word");
    std::set<char> uniq(word_.begin(), word_.end());
    alphabet_.assign(uniq.begin(), uniq.end());
    for (char c : word_)
      indices_.push_back(static_cast<int>(
          std::lower_bound(alphabet_.begin(), alphabet_.end(), c) - alphabet_.begin()));
  }

  int alphabet_size() const override { return static_cast<int>(alphabet_.size()); }
  int letter(std::int64_t k) const override {
    std::int64_t p = static_cast<std::int64_t>(word_.size());
    std::int64_t r = k % p;
    if (r < 0) r += p;
    return indices_[static_cast<size_t>(r)];
  }
  std::string describe() const override { return "periodic:" + word_; }

 private:
  std::string word_;
  std::vector<char> alphabet_;
  std::vector<int> indices_;
};

class ShiftedSource final : public SequenceSource {
 public:
  ShiftedSource(SequencePtr base, std::int64_t shift) : base_(std::move(base)), shift_(shift) {}
  int alphabet_size() const override { return base_->alphabet_size(); }
  int letter(std::int64_t k) const override { return base_->letter(k + shift_); }
  std::string describe() const override {
    return base_->describe() + "<<" + std::to_string(shift_);
  }

 private:
  SequencePtr base_;
  std::int64_t shift_;
};

class SeededSource final : public SequenceSource {
 public:
  SeededSource(std::uint64_t seed, int k) : seed_(seed), k_(k) {
    if (k < 1) throw UsageError("seeded source needs alphabet size >= 1");
  }
  int alphabet_size() const override { return k_; }
  int letter(std::int64_t k) const override {
    std::uint64_t z = static_cast<std::uint64_t>(k);
    return static_cast<int>(splitmix64(seed_ ^ splitmix64(z)) % static_cast<std::uint64_t>(k_));
  }
  std::string describe() const override { return "seeded:" + std::to_string(seed_); }

 private:
  std::uint64_t seed_;
  int k_;
};

class SubstitutionSource final : public SequenceSource {
 public:
  explicit SubstitutionSource(const std::map<char, std::string>& rules) : rules_(rules) {
    if (rules_.empty()) throw UsageError("substitution needs at least one rule");
    for (auto& [c, img] : rules_) {
      alphabet_.push_back(c);
      if (img.empty()) throw UsageError("substitution rule for '" + std::string(1, c) + "' is erasing");
      for (char x : img)
        if (!rules_.count(x))
          throw UsageError("substitution image uses letter '" + std::string(1, x) +
                           "' without a rule");
    }
    check_primitive();
    find_seeds();
    // Pre-expand both halves far enough for any realistic query; extended on
    // demand in letter().
    grow_right(64);
    grow_left(64);
  }

  int alphabet_size() const override { return static_cast<int>(alphabet_.size()); }

  int letter(std::int64_t k) const override {
    std::lock_guard<std::mutex> lock(mu_);
    if (k >= 0) {
      grow_right(static_cast<size_t>(k) + 1);
      return index_of(right_[static_cast<size_t>(k)]);
    }
    size_t need = static_cast<size_t>(-(k + 1)) + 1;
    grow_left(need);
    return index_of(left_[static_cast<size_t>(-(k + 1))]);
  }

  std::string describe() const override {
    std::string out = "subst:";
    for (auto& [c, img] : rules_) {
      out += c;
      out += ">";
      out += img;
      out += ";";
    }
    return out;
  }

 private:
  int index_of(char c) const {
    return static_cast<int>(std::lower_bound(alphabet_.begin(), alphabet_.end(), c) -
                            alphabet_.begin());
  }

  std::string apply(const std::string& s) const {
    std::string out;
    for (char c : s) out += rules_.at(c);
    return out;
  }

  std::string apply_power(char c, int p) const {
    std::string s(1, c);
    for (int i = 0; i < p; ++i) s = apply(s);
    return s;
  }

  void check_primitive() {
    // Primitive: some power of the incidence relation reaches every letter
    // from every letter.  (|A|-1)^2 + 1 iterations suffice.
    size_t a = alphabet_.size();
    std::vector<std::vector<bool>> reach(a, std::vector<bool>(a, false));
    for (size_t i = 0; i < a; ++i)
      for (char c : rules_.at(alphabet_[i])) reach[i][static_cast<size_t>(index_of(c))] = true;
    int steps = static_cast<int>((a - 1) * (a - 1) + 1);
    std::vector<std::vector<bool>> cur = reach;
    for (int s = 1; s < steps; ++s) {
      std::vector<std::vector<bool>> next(a, std::vector<bool>(a, false));
      for (size_t i = 0; i < a; ++i)
        for (size_t j = 0; j < a; ++j)
          if (cur[i][j])
            for (size_t k = 0; k < a; ++k)
              if (reach[j][k]) next[i][k] = true;
      cur = std::move(next);
    }
    for (size_t i = 0; i < a; ++i)
      for (size_t j = 0; j < a; ++j)
        if (!cur[i][j])
          throw UsageError("substitution is not primitive: '" + std::string(1, alphabet_[i]) +
                           "' does not reach '" + std::string(1, alphabet_[j]) + "'");
  }

  void find_seeds() {
    for (int p = 1; p <= 8; ++p) {
      char r = 0, l = 0;
      for (char c : alphabet_) {
        std::string img = apply_power(c, p);
        if (img.size() < 2) continue;  // need strict growth to extend
        if (!r && img.front() == c) r = c;
        if (!l && img.back() == c) l = c;
      }
      if (r && l) {
        power_ = p;
        right_seed_ = r;
        left_seed_ = l;
        return;
      }
    }
    throw UsageError("substitution has no two-sided fixed point seed within power 8");
  }

  void grow_right(size_t need) const {
    if (right_.empty()) right_ = std::string(1, right_seed_);
    while (right_.size() < need) right_ = apply_power_string(right_);
  }

  void grow_left(size_t need) const {
    if (left_.empty()) left_ = std::string(1, left_seed_);
    while (left_.size() < need) {
      std::string img;
      // left_ stores ... sigma(-2) sigma(-1) reversed; expand the unreversed
      // tail and re-reverse.
      std::string plain(left_.rbegin(), left_.rend());
      plain = apply_power_string(plain);
      left_.assign(plain.rbegin(), plain.rend());
    }
  }

  std::string apply_power_string(const std::string& s) const {
    std::string out = s;
    for (int i = 0; i < power_; ++i) out = apply(out);
    return out;
  }

  std::map<char, std::string> rules_;
  std::vector<char> alphabet_;
  int power_ = 1;
  char right_seed_ = 0, left_seed_ = 0;
  mutable std::mutex mu_;
  mutable std::string right_;  // sigma(0) sigma(1) ...
  mutable std::string left_;   // sigma(-1) sigma(-2) ... (reversed order)
};

}  // namespace

SequencePtr periodic_source(const std::string& word) {
  return std::make_shared<PeriodicSource>(word);
}

SequencePtr shifted_source(SequencePtr base, std::int64_t shift) {
  return std::make_shared<ShiftedSource>(std::move(base), shift);
}

SequencePtr seeded_source(std::uint64_t seed, int alphabet_size) {
  return std::make_shared<SeededSource>(seed, alphabet_size);
}

SequencePtr substitution_source(const std::map<char, std::string>& rules) {
  return std::make_shared<SubstitutionSource>(rules);
}

SequencePtr thue_morse_source() {
  return substitution_source({{'0', "01"}, {'1', "10"}});
}

}  // namespace treespace
