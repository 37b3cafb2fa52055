#include "treespace/word.hpp"

#include <algorithm>

#include "treespace/errors.hpp"

namespace treespace {

Word Word::from_letters(const std::vector<Letter>& letters) {
  Word w;
  for (const Letter& l : letters) {
    if (l.index < 1) throw UsageError("generator index must be >= 1");
    if (l.sign != 1 && l.sign != -1) throw UsageError("letter sign must be +1 or -1");
    w.push(l);
  }
  return w;
}

Word Word::parse(const std::string& text) {
  if (text == "e" || text.empty()) return Word();
  Word w;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t dot = text.find('.', pos);
    std::string tok = text.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (tok.empty()) throw UsageError("empty token in word '" + text + "'");
    int sign = +1;
    size_t at = 0;
    if (tok[0] == '-') {
      sign = -1;
      at = 1;
    }
    if (at >= tok.size()) throw UsageError("bad token '" + tok + "' in word '" + text + "'");
    int idx = 0;
    for (; at < tok.size(); ++at) {
      if (tok[at] < '0' || tok[at] > '9')
        throw UsageError("bad token '" + tok + "' in word '" + text + "'");
      idx = idx * 10 + (tok[at] - '0');
    }
    if (idx < 1) throw UsageError("generator index must be >= 1 in '" + text + "'");
    w.push(Letter{idx, sign});
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return w;
}

int Word::max_index() const {
  int m = 0;
  for (LetterCode c : codes_) m = std::max(m, c / 2 + 1);
  return m;
}

void Word::push(LetterCode c) {
  if (!codes_.empty() && codes_.back() == code_inverse(c)) {
    codes_.pop_back();
  } else {
    codes_.push_back(c);
  }
}

Word Word::inverse() const {
  Word w;
  w.codes_.reserve(codes_.size());
  for (auto it = codes_.rbegin(); it != codes_.rend(); ++it)
    w.codes_.push_back(code_inverse(*it));
  return w;
}

Word Word::parent() const {
  Word w = *this;
  if (!w.codes_.empty()) w.codes_.pop_back();
  return w;
}

bool Word::is_prefix_of(const Word& other) const {
  if (codes_.size() > other.codes_.size()) return false;
  return std::equal(codes_.begin(), codes_.end(), other.codes_.begin());
}

std::string Word::str() const {
  if (codes_.empty()) return "e";
  std::string out;
  for (size_t i = 0; i < codes_.size(); ++i) {
    if (i) out += '.';
    Letter l = code_letter(codes_[i]);
    if (l.sign < 0) out += '-';
    out += std::to_string(l.index);
  }
  return out;
}

Word multiply(const Word& a, const Word& b) {
  Word w = a;
  for (LetterCode c : b.codes()) w.push(c);
  return w;
}

int shortlex_compare(const Word& a, const Word& b) {
  if (a.length() != b.length()) return a.length() < b.length() ? -1 : 1;
  for (int i = 0; i < a.length(); ++i) {
    if (a.code_at(i) != b.code_at(i)) return a.code_at(i) < b.code_at(i) ? -1 : 1;
  }
  return 0;
}

bool shortlex_less(const Word& a, const Word& b) { return shortlex_compare(a, b) < 0; }

std::vector<Word> neighbors(const Word& w, int n) {
  if (n < 2) throw UsageError("the space of pointed trees needs rank n >= 2");
  if (w.max_index() > n) throw UsageError("word uses a generator index above rank n");
  std::vector<Word> out;
  out.reserve(2 * static_cast<size_t>(n));
  for (int c = 0; c < 2 * n; ++c) {
    Word v = w;
    v.push(static_cast<LetterCode>(c));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace treespace
