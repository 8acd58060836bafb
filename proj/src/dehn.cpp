#include "hypsft/dehn.hpp"

#include <algorithm>
#include <set>

namespace hypsft {

DehnReducer::DehnReducer(const Presentation& p) : pres_(p) {
  std::set<Word> seen;
  for (const auto& r : p.relators()) {
    for (const Word& base : {r, p.invert(r)}) {
      for (std::size_t i = 0; i < base.size(); ++i) {
        Word rot(base.begin() + static_cast<long>(i), base.end());
        rot.insert(rot.end(), base.begin(), base.begin() + static_cast<long>(i));
        if (seen.insert(rot).second) symmetrized_.push_back(std::move(rot));
      }
    }
  }
  by_first_.resize(static_cast<std::size_t>(p.num_generators()));
  for (std::size_t i = 0; i < symmetrized_.size(); ++i)
    by_first_[static_cast<std::size_t>(symmetrized_[i][0])].push_back(static_cast<int>(i));
}

bool DehnReducer::reduce_once(Word& w) const {
  for (std::size_t pos = 0; pos < w.size(); ++pos) {
    for (int ri : by_first_[static_cast<std::size_t>(w[pos])]) {
      const Word& r = symmetrized_[static_cast<std::size_t>(ri)];
      std::size_t len = 0;
      while (len < r.size() && pos + len < w.size() && w[pos + len] == r[len]) ++len;
      if (2 * len <= r.size()) continue;
      // w[pos, pos+len) == r[0, len) and r = u v == 1, so u == v^-1.
      Word replacement;
      for (std::size_t j = r.size(); j > len; --j) replacement.push_back(pres_.inverse(r[j - 1]));
      Word out(w.begin(), w.begin() + static_cast<long>(pos));
      out.insert(out.end(), replacement.begin(), replacement.end());
      out.insert(out.end(), w.begin() + static_cast<long>(pos + len), w.end());
      w = pres_.free_reduce(out);
      return true;
    }
  }
  return false;
}

Word DehnReducer::reduce(std::span<const Letter> input) const {
  Word w = pres_.free_reduce(input);
  while (reduce_once(w)) {
  }
  return w;
}

bool DehnReducer::equal(std::span<const Letter> u, std::span<const Letter> v) const {
  Word w(u.begin(), u.end());
  Word vi = pres_.invert(v);
  w.insert(w.end(), vi.begin(), vi.end());
  return is_identity(w);
}

PieceReport DehnReducer::piece_report() const {
  PieceReport rep;
  rep.shortest_relator = pres_.max_relator_length();
  for (const auto& r : symmetrized_)
    rep.shortest_relator = std::min(rep.shortest_relator, static_cast<int>(r.size()));
  for (std::size_t i = 0; i < symmetrized_.size(); ++i) {
    for (std::size_t j = 0; j < symmetrized_.size(); ++j) {
      if (i == j) continue;
      const Word& a = symmetrized_[i];
      const Word& b = symmetrized_[j];
      std::size_t len = 0;
      while (len < a.size() && len < b.size() && a[len] == b[len]) ++len;
      rep.max_piece = std::max(rep.max_piece, static_cast<int>(len));
      if (6 * len >= a.size()) rep.small_cancellation = false;
    }
  }
  return rep;
}

}  // namespace hypsft
