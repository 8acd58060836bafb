#include "hypsft/ball.hpp"

#include <algorithm>

#include "hypsft/dehn.hpp"
#include "hypsft/errors.hpp"

namespace hypsft {

int BallTable::size_upto(int n) const {
  if (n < 0) return 0;
  if (n >= static_cast<int>(level_end_.size())) return size();
  return level_end_[static_cast<std::size_t>(n)];
}

Word BallTable::word(int id) const {
  Word w;
  while (id > 0) {
    w.push_back(last(id));
    id = parent(id);
  }
  std::reverse(w.begin(), w.end());
  return w;
}

int BallTable::walk(int from, std::span<const Letter> w) const {
  int cur = from;
  for (Letter s : w) {
    if (cur < 0) return -1;
    cur = neighbor(cur, s);
  }
  return cur;
}

int BallTable::find_shortlex(std::span<const Letter> w) const {
  int cur = 0;
  for (Letter s : w) {
    int nxt = neighbor(cur, s);
    if (!is_tree_child(cur, s, nxt)) return -1;
    cur = nxt;
  }
  return cur;
}

BallTable BallTable::truncated(int r) const {
  if (r >= radius_) return *this;
  BallTable t;
  t.radius_ = r;
  t.ngen_ = ngen_;
  const int n = size_upto(r);
  t.level_.assign(level_.begin(), level_.begin() + n);
  t.parent_.assign(parent_.begin(), parent_.begin() + n);
  t.last_.assign(last_.begin(), last_.begin() + n);
  t.neighbor_.assign(neighbor_.begin(), neighbor_.begin() + static_cast<long>(n) * ngen_);
  for (int& x : t.neighbor_)
    if (x >= n) x = -1;
  t.sphere_sizes_.assign(sphere_sizes_.begin(), sphere_sizes_.begin() + r + 1);
  t.level_end_.assign(level_end_.begin(), level_end_.begin() + r + 1);
  return t;
}

BallTable BallBuilder::build(int radius, std::size_t max_elements) const {
  if (radius < 0) throw InputError("group-core", "radius must be nonnegative");
  const int ng = pres_.num_generators();
  BallTable t;
  t.ngen_ = ng;

  auto add_element = [&](int level, int parent, Letter last) {
    t.level_.push_back(level);
    t.parent_.push_back(parent);
    t.last_.push_back(last);
    t.neighbor_.insert(t.neighbor_.end(), static_cast<std::size_t>(ng), -1);
    return t.size() - 1;
  };
  auto link = [&](int g, Letter s, int y) {
    auto& fwd = t.neighbor_[static_cast<std::size_t>(g) * ng + s];
    auto& back = t.neighbor_[static_cast<std::size_t>(y) * ng + pres_.inverse(s)];
    if ((fwd >= 0 && fwd != y) || (back >= 0 && back != g))
      throw Error("group-core", "inconsistent Cayley graph edge during ball construction");
    fwd = y;
    back = g;
  };

  // symmetrized relators keyed by first letter, each stored as the walk
  // t^-1 for r = s t
  std::vector<std::vector<Word>> closers(static_cast<std::size_t>(ng));
  for (const Word& r : dehn_.symmetrized()) {
    Word tail(r.begin() + 1, r.end());
    closers[static_cast<std::size_t>(r[0])].push_back(pres_.invert(tail));
  }

  add_element(0, -1, -1);
  t.level_end_.push_back(1);
  for (int n = 0; n < radius; ++n) {
    const int begin = t.size_upto(n - 1);
    const int end = t.size();
    for (int g = begin; g < end; ++g) {
      for (Letter s = 0; s < ng; ++s) {
        if (t.neighbor(g, s) >= 0) continue;
        int y = -1;
        for (const Word& path : closers[static_cast<std::size_t>(s)]) {
          y = t.walk(g, path);
          if (y >= 0) break;
        }
        if (y < 0) {
          Word w = t.word(g);
          w.push_back(s);
          Word d = dehn_.reduce(w);
          if (d != w) {
            y = t.walk(0, d);
            if (y < 0 && static_cast<int>(d.size()) <= n)
              throw Error("group-core",
                          "relator closure missed a coincidence at radius " + std::to_string(n + 1));
          }
        }
        if (y < 0) {
          if (static_cast<std::size_t>(t.size()) >= max_elements)
            throw ResourceError("group-core",
                                "ball exceeds element budget of " + std::to_string(max_elements) +
                                    "; complete up to radius " + std::to_string(n),
                                n);
          y = add_element(n + 1, g, s);
        }
        link(g, s, y);
      }
    }
    t.level_end_.push_back(t.size());
  }
  t.radius_ = radius;
  for (int n = 0; n <= radius; ++n)
    t.sphere_sizes_.push_back(t.size_upto(n) - t.size_upto(n - 1));
  return t;
}

}  // namespace hypsft
