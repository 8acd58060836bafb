#include "hypsft/oracle.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "group-core";
constexpr std::size_t kBootstrapBudget = 30000;

// a^-1 * e * b evaluated in the ball; -1 when the product is not in B(k).
int conjugate_step(const BallTable& ball, const Presentation& p, int e, int a, int b, int k) {
  const int pad = p.num_generators();
  int x = e;
  if (a != pad) {
    x = ball.walk(ball.neighbor(0, p.inverse(a)), ball.word(e));
    if (x < 0) return -1;
  }
  if (b != pad) {
    x = ball.neighbor(x, b);
    if (x < 0) return -1;
  }
  return ball.level(x) <= k ? x : -1;
}

}  // namespace

GroupOracle::GroupOracle(Presentation p, OracleMode mode, OracleOptions options)
    : pres_(std::move(p)), mode_(mode), options_(options), dehn_(pres_) {
  pieces_ = dehn_.piece_report();
  if (mode_ == OracleMode::DehnSmallCancellation && !pieces_.small_cancellation)
    throw ConfigError(kStage, "presentation fails the C'(1/6) piece-length check (max piece " +
                                  std::to_string(pieces_.max_piece) +
                                  "); supply an external shortlex automaton");

  BallBuilder builder(pres_, dehn_);
  int r0 = options_.bootstrap_radius;
  if (r0 <= 0) {
    r0 = 2;
    while (r0 < 7) {
      BallTable next = builder.build(r0 + 1, options_.max_elements);
      if (static_cast<std::size_t>(next.size()) > kBootstrapBudget) break;
      ++r0;
    }
  }
  bootstrap_ = builder.build(r0, options_.max_elements);

  // Largest synchronous difference between shortlex forms of g and gs seen
  // on the bootstrap ball.
  const int ng = pres_.num_generators();
  const int pad = ng;
  wd_observed_ = 0;
  const int inner = bootstrap_.size_upto(r0 - 1);
  for (int g = 0; g < inner && wd_observed_ < r0; ++g) {
    const Word u = bootstrap_.word(g);
    for (Letter s = 0; s < ng; ++s) {
      const Word z = bootstrap_.word(bootstrap_.neighbor(g, s));
      const std::size_t T = std::max(u.size(), z.size());
      int e = 0;
      for (std::size_t t = 0; t < T && e >= 0; ++t) {
        const int a = t < u.size() ? u[t] : pad;
        const int b = t < z.size() ? z[t] : pad;
        e = conjugate_step(bootstrap_, pres_, e, a, b, r0);
        if (e >= 0) wd_observed_ = std::max(wd_observed_, bootstrap_.level(e));
      }
      if (e < 0) wd_observed_ = r0;
    }
  }
  wd_bound_ = options_.word_difference_bound > 0 ? options_.word_difference_bound
                                                  : std::max(1, wd_observed_);
  if (wd_bound_ > r0 - 1)
    throw ConfigError(kStage, "word-difference bound " + std::to_string(wd_bound_) +
                                  " needs a bootstrap ball of radius >= " +
                                  std::to_string(wd_bound_ + 1));

  num_diffs_ = bootstrap_.size_upto(wd_bound_);
  const int w = ng + 1;
  diff_table_.assign(static_cast<std::size_t>(num_diffs_) * w * w, -1);
  for (int e = 0; e < num_diffs_; ++e)
    for (int a = 0; a <= ng; ++a)
      for (int b = 0; b <= ng; ++b)
        diff_table_[(static_cast<std::size_t>(e) * w + a) * w + b] =
            conjugate_step(bootstrap_, pres_, e, a, b, wd_bound_);
}

void GroupOracle::load_fsa(ShortlexFsa fsa) {
  if (fsa.num_generators() != pres_.num_generators())
    throw InputError("shortlex-fsa", "automaton alphabet does not match the presentation");
  fsa_ = std::move(fsa);
}

void GroupOracle::check_ready() const {
  if (mode_ == OracleMode::ExternalFsa && !fsa_)
    throw ConfigError(kStage, "external-fsa oracle has no automaton loaded");
}

bool GroupOracle::try_length(std::span<const Letter> v, Letter s, int m, const ShortlexFsa* acc,
                             Word& out) const {
  const int ng = pres_.num_generators();
  const int pad = ng;
  const int w = ng + 1;
  const int n = static_cast<int>(v.size());
  const int T = std::max(n, m);
  const int nq = acc ? acc->num_states() : 1;
  const int nstates = num_diffs_ * nq;
  const int target = bootstrap_.neighbor(0, s);  // ids of B(k) coincide with diff indices

  auto step = [&](int x, int a, int b) -> int {
    const int e = x / nq;
    int q = x % nq;
    const int e2 = diff_table_[(static_cast<std::size_t>(e) * w + a) * w + b];
    if (e2 < 0) return -1;
    if (acc && b != pad) {
      q = acc->next(q, b);
      if (q < 0) return -1;
    }
    return e2 * nq + q;
  };
  auto letter_at = [&](int t) { return t < n ? v[static_cast<std::size_t>(t)] : pad; };

  // forward reachability, layer t holds states after t letters
  thread_local std::vector<std::vector<int>> layers;
  thread_local std::vector<int> stamp;
  thread_local int epoch = 0;
  layers.resize(static_cast<std::size_t>(T) + 1);
  if (static_cast<int>(stamp.size()) < nstates * (T + 1)) stamp.assign(static_cast<std::size_t>(nstates) * (T + 1), 0);
  ++epoch;
  auto mark = [&](int t, int x) -> int& { return stamp[static_cast<std::size_t>(t) * nstates + x]; };

  const int start = acc ? acc->start() : 0;
  layers[0].assign(1, start);
  for (int t = 1; t <= T; ++t) {
    auto& cur = layers[static_cast<std::size_t>(t)];
    cur.clear();
    const int a = letter_at(t - 1);
    for (int x : layers[static_cast<std::size_t>(t) - 1]) {
      if (t <= m) {
        for (int b = 0; b < ng; ++b) {
          int y = step(x, a, b);
          if (y >= 0 && mark(t, y) != epoch) {
            mark(t, y) = epoch;
            cur.push_back(y);
          }
        }
      } else {
        int y = step(x, a, pad);
        if (y >= 0 && mark(t, y) != epoch) {
          mark(t, y) = epoch;
          cur.push_back(y);
        }
      }
    }
    if (cur.empty()) return false;
  }

  // backward: states that can still reach the target; reuse stamps with a
  // second epoch value
  const int good = ++epoch;
  bool any = false;
  for (int x : layers[static_cast<std::size_t>(T)])
    if (x / nq == target) {
      mark(T, x) = good;
      any = true;
    }
  if (!any) return false;
  for (int t = T - 1; t >= 0; --t) {
    const int a = letter_at(t);
    for (int x : layers[static_cast<std::size_t>(t)]) {
      bool ok = false;
      if (t + 1 <= m) {
        for (int b = 0; b < ng && !ok; ++b) {
          int y = step(x, a, b);
          ok = y >= 0 && mark(t + 1, y) == good;
        }
      } else {
        int y = step(x, a, pad);
        ok = y >= 0 && mark(t + 1, y) == good;
      }
      if (ok) mark(t, x) = good;
    }
  }
  if (mark(0, start) != good) return false;

  out.clear();
  int x = start;
  for (int t = 1; t <= T; ++t) {
    const int a = letter_at(t - 1);
    if (t <= m) {
      for (int b = 0; b < ng; ++b) {
        int y = step(x, a, b);
        if (y >= 0 && mark(t, y) == good) {
          out.push_back(b);
          x = y;
          break;
        }
      }
    } else {
      x = step(x, a, pad);
    }
  }
  return true;
}

Word GroupOracle::right_multiply(std::span<const Letter> v, Letter s) const {
  return right_multiply(v, s, nullptr);
}

Word GroupOracle::right_multiply(std::span<const Letter> v, Letter s, const ShortlexFsa* acc) const {
  check_ready();
  if (!acc) acc = fsa();
  if (s < 0 || s >= pres_.num_generators()) throw InputError(kStage, "unknown generator");
  const int n = static_cast<int>(v.size());
  if (n > 0 && v.back() == pres_.inverse(s)) return Word(v.begin(), v.end() - 1);
  Word out;
  for (int m = std::max(0, n - 1); m <= n + 1; ++m) {
    if (m > options_.validated_radius)
      throw OutOfRange(kStage, "element beyond validated radius " +
                                   std::to_string(options_.validated_radius));
    if (try_length(v, s, m, acc, out)) return out;
  }
  throw Error(kStage, "no shortlex form within word-difference bound " +
                          std::to_string(wd_bound_) +
                          (acc ? " accepted by the automaton" : "") + " (raise the bound)");
}

Word GroupOracle::normal_form(std::span<const Letter> w) const { return normal_form(w, nullptr); }

Word GroupOracle::normal_form(std::span<const Letter> w, const ShortlexFsa* acc) const {
  check_ready();
  for (Letter s : w)
    if (s < 0 || s >= pres_.num_generators()) throw InputError(kStage, "unknown generator");
  // Dehn first keeps intermediate words short
  const Word d = dehn_.reduce(w);
  Word v;
  for (Letter s : d) v = right_multiply(v, s, acc);
  return v;
}

Word GroupOracle::reduce_word(std::span<const Letter> w) const {
  check_ready();
  for (Letter s : w)
    if (s < 0 || s >= pres_.num_generators()) throw InputError(kStage, "unknown generator");
  return normal_form(w);
}

BallTable GroupOracle::build_ball(int radius) const {
  if (radius <= bootstrap_.radius()) return bootstrap_.truncated(radius);
  return BallBuilder(pres_, dehn_).build(radius, options_.max_elements);
}

int GroupOracle::estimate_delta(int radius) const {
  if (radius < 2) throw InputError(kStage, "delta estimation needs radius >= 2");
  // No point of a side is farther than half its length from an endpoint.
  const int cap = (radius + 1) / 2;
  // Geodesics between points of B(radius) at distance <= radius stay in
  // B(radius + cap); distances up to cap from those points need cap/2 more.
  const BallTable ball = build_ball(radius + cap + (cap + 1) / 2);

  auto bfs = [&](int src, int limit) {
    std::unordered_map<int, int> dist{{src, 0}};
    std::deque<int> queue{src};
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      int dx = dist[x];
      if (dx == limit) continue;
      for (Letter s = 0; s < ball.num_generators(); ++s) {
        int y = ball.neighbor(x, s);
        if (y >= 0 && dist.emplace(y, dx + 1).second) queue.push_back(y);
      }
    }
    return dist;
  };

  const int nr = ball.size_upto(radius);
  std::unordered_map<int, std::unordered_map<int, int>> vertex_cache, point_cache;
  auto vertex_dist = [&](int v) -> const std::unordered_map<int, int>& {
    auto it = vertex_cache.find(v);
    if (it == vertex_cache.end()) it = vertex_cache.emplace(v, bfs(v, radius)).first;
    return it->second;
  };
  auto dist_from = [&](int p) -> const std::unordered_map<int, int>& {
    auto it = point_cache.find(p);
    if (it == point_cache.end()) it = point_cache.emplace(p, bfs(p, cap)).first;
    return it->second;
  };

  struct Side {
    int from, to, length;
    std::vector<std::pair<int, int>> points;  // (distance from `from`, id)
  };
  auto make_side = [&](int a, int b) {
    const auto& da = vertex_dist(a);
    const auto& db = vertex_dist(b);
    Side side{a, b, da.at(b), {}};
    for (auto [q, d] : da) {
      auto it = db.find(q);
      if (it != db.end() && d + it->second == side.length) side.points.emplace_back(d, q);
    }
    std::sort(side.points.begin(), side.points.end());
    return side;
  };
  // over all geodesics of the side, the largest possible distance from p
  // (capped): widest-path recursion along the geodesic interval
  auto bottleneck = [&](const Side& side, const std::unordered_map<int, int>& dp) {
    std::unordered_map<int, int> best;
    const auto& dfrom = vertex_dist(side.from);
    for (auto [d, q] : side.points) {
      auto it = dp.find(q);
      int f = it == dp.end() ? cap + 1 : it->second;
      int incoming = d == 0 ? f : -1;
      if (d > 0)
        for (Letter s = 0; s < ball.num_generators(); ++s) {
          int y = ball.neighbor(q, s);
          if (y < 0) continue;
          auto jt = best.find(y);
          auto kt = dfrom.find(y);
          if (jt != best.end() && kt != dfrom.end() && kt->second == d - 1) incoming = std::max(incoming, jt->second);
        }
      best[q] = std::min(f, incoming);
    }
    return best.at(side.to);
  };

  // Triangles (1, x, y) with x, y in the ball and d(x, y) <= radius; x == y
  // gives bigons.  Every geodesic triangle of that size is a translate of
  // one of these.
  int delta = 0;
  for (int x = nr - 1; x >= 0 && delta < cap; --x) {
    std::vector<int> partners;
    for (auto [y, dxy] : vertex_dist(x))
      if (y >= x && y < nr) partners.push_back(y);
    std::sort(partners.begin(), partners.end());
    for (int y : partners) {
      Side sides[3] = {make_side(0, x), make_side(0, y), make_side(x, y)};
      for (int i = 0; i < 3 && delta < cap; ++i) {
        const Side& other1 = sides[(i + 1) % 3];
        const Side& other2 = sides[(i + 2) % 3];
        for (auto [d, p] : sides[i].points) {
          const auto& dp = dist_from(p);
          delta = std::max(delta, std::min({bottleneck(other1, dp), bottleneck(other2, dp), cap}));
          if (delta >= cap) break;
        }
      }
      if (delta >= cap) break;
    }
    if (vertex_cache.size() > 4096) vertex_cache.clear();
    if (point_cache.size() > 65536) point_cache.clear();
  }
  return delta;
}

}  // namespace hypsft
