#include "hypsft/shelling.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "shelling-engine";

std::string format_hash(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

// Letters of one window pattern, appended to a byte string.
void put(std::string& key, int v) {
  key.push_back(static_cast<char>(v & 0xff));
  key.push_back(static_cast<char>((v >> 8) & 0xff));
}

int dp_code(const BallTable& window, int x, Letter dP) {
  if (dP == kSelf) return -2;
  if (dP < 0) return -1;
  return window.neighbor(x, dP) >= 0 ? dP : -1;
}

// Shared encoding: `cell_of(x)` maps window ids to a cell, `height`,
// `state`, `pred` and `step` read the underlying configuration.
template <class CellOf, class Height, class State, class Pred, class Step>
std::string encode_window(const BallTable& window, CellOf cell_of, Height height, State state, Pred pred,
                          Step step) {
  std::string key;
  const int ng = window.num_generators();
  const int rho = window.radius();
  key.reserve(static_cast<std::size_t>(window.size()) * (4 + 2 * static_cast<std::size_t>(ng)));
  for (int x = 0; x < window.size(); ++x) {
    const int c = cell_of(x);
    put(key, state(c));
    put(key, dp_code(window, x, pred(c)));
    for (Letter s = 0; s < ng; ++s) {
      const int y = window.neighbor(x, s);
      // edges along the window's outer sphere are skipped: ball tables do
      // not always resolve them
      if (y < 0 || (window.level(x) == rho && window.level(y) == rho)) continue;
      put(key, height(step(c, s)) - height(c));
    }
  }
  return key;
}

}  // namespace

int rule_radius(int delta) { return std::max(1, 2 * delta); }

int ShellingPatch::predecessor(int cell) const {
  const Letter d = dP[static_cast<std::size_t>(cell)];
  if (d == kSelf) return cell;
  if (d < 0) return -1;
  return domain.neighbor(cell, d);
}

bool ShellingPatch::is_interior(int cell) const { return domain.level(cell) + rule_radius(delta) <= radius; }

ShellingPatch model_shelling(const GroupOracle& oracle, const ShortlexFsa& fsa, int radius, int delta) {
  if (radius < 0) throw InputError(kStage, "radius must be nonnegative");
  if (radius > oracle.options().validated_radius)
    throw OutOfRange(kStage, "domain exceeds the validated radius");
  ShellingPatch p;
  p.presentation_hash = oracle.presentation().hash();
  p.delta = delta;
  p.radius = radius;
  p.domain = oracle.build_ball(radius);
  const int n = p.domain.size();
  p.h.resize(static_cast<std::size_t>(n));
  p.state.resize(static_cast<std::size_t>(n));
  p.dP.resize(static_cast<std::size_t>(n));
  p.pop.assign(static_cast<std::size_t>(n), -1);
  p.pop_delta.assign(static_cast<std::size_t>(n), -1);
  for (int x = 0; x < n; ++x) {
    p.h[static_cast<std::size_t>(x)] = p.domain.level(x);
    if (x == 0) {
      p.state[0] = fsa.start();
      p.dP[0] = kSelf;
      continue;
    }
    const int par = p.domain.parent(x);
    const int st = fsa.next(p.state[static_cast<std::size_t>(par)], p.domain.last(x));
    if (st < 0) throw Error(kStage, "automaton rejects a shortlex word of the ball");
    p.state[static_cast<std::size_t>(x)] = st;
    p.dP[static_cast<std::size_t>(x)] = oracle.presentation().inverse(p.domain.last(x));
  }
  return p;
}

Word random_shortlex_word(const ShortlexFsa& fsa, int length, std::mt19937_64& rng) {
  // suffix counts: paths[k][q] = number of accepted continuations of length k from q
  std::vector<std::vector<double>> paths(static_cast<std::size_t>(length) + 1,
                                         std::vector<double>(static_cast<std::size_t>(fsa.num_states()), 0));
  std::fill(paths[0].begin(), paths[0].end(), 1.0);
  for (int k = 1; k <= length; ++k)
    for (int q = 0; q < fsa.num_states(); ++q)
      for (Letter s = 0; s < fsa.num_generators(); ++s)
        if (int t = fsa.next(q, s); t >= 0)
          paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)] += paths[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(t)];
  if (paths[static_cast<std::size_t>(length)][static_cast<std::size_t>(fsa.start())] == 0)
    throw InputError(kStage, "no shortlex word of length " + std::to_string(length));
  Word w;
  int q = fsa.start();
  for (int k = length; k > 0; --k) {
    std::uniform_real_distribution<double> u(0.0, paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)]);
    double r = u(rng);
    for (Letter s = 0; s < fsa.num_generators(); ++s) {
      int t = fsa.next(q, s);
      if (t < 0) continue;
      const double c = paths[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(t)];
      if (r < c || s == fsa.num_generators() - 1) {
        w.push_back(s);
        q = t;
        break;
      }
      r -= c;
    }
  }
  // floating-point slack in the last comparison can pick a dead letter
  if (static_cast<int>(w.size()) != length || !fsa.accepts(w))
    throw Error(kStage, "random word sampling failed");
  return w;
}

ShellingPatch generate_shelling_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, int R,
                                      const Word& basepoint, int delta) {
  if (R < 0) throw InputError(kStage, "radius must be nonnegative");
  const Word g0 = oracle.normal_form(basepoint, &fsa);
  const int D = static_cast<int>(g0.size());
  if (D < R + 1) throw InputError(kStage, "basepoint distance must be at least R + 1");
  if (D + R > oracle.options().validated_radius)
    throw OutOfRange(kStage, "D + R exceeds the validated radius");
  const Presentation& pres = oracle.presentation();
  ShellingPatch p;
  p.presentation_hash = pres.hash();
  p.delta = delta;
  p.radius = R;
  p.basepoint = g0;
  p.domain = oracle.build_ball(R);
  const int n = p.domain.size();
  p.h.resize(static_cast<std::size_t>(n));
  p.state.resize(static_cast<std::size_t>(n));
  p.dP.resize(static_cast<std::size_t>(n));
  p.pop.assign(static_cast<std::size_t>(n), -1);
  p.pop_delta.assign(static_cast<std::size_t>(n), -1);
  std::vector<Word> z(static_cast<std::size_t>(n));
  z[0] = g0;
  for (int x = 0; x < n; ++x) {
    if (x > 0)
      z[static_cast<std::size_t>(x)] =
          oracle.right_multiply(z[static_cast<std::size_t>(p.domain.parent(x))], p.domain.last(x), &fsa);
    const Word& zx = z[static_cast<std::size_t>(x)];
    p.h[static_cast<std::size_t>(x)] = static_cast<int>(zx.size()) - D;
    p.state[static_cast<std::size_t>(x)] = fsa.run(zx);
    if (zx.empty()) {
      p.dP[static_cast<std::size_t>(x)] = kSelf;
    } else {
      const Letter d = pres.inverse(zx.back());
      p.dP[static_cast<std::size_t>(x)] = p.domain.neighbor(x, d) >= 0 ? d : kBoundary;
    }
    // words of the outer sphere are never extended
    if (p.domain.level(x) == R) z[static_cast<std::size_t>(x)].clear(), z[static_cast<std::size_t>(x)].shrink_to_fit();
  }
  return p;
}

ShellingPatch generate_shelling_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, int R, int D, int delta,
                                      std::mt19937_64& rng) {
  return generate_shelling_patch(oracle, fsa, R, random_shortlex_word(fsa, D, rng), delta);
}

LocalData local_data(const ShellingPatch& patch) {
  LocalData d;
  const int ng = patch.domain.num_generators();
  d.num_generators = ng;
  d.state = patch.state;
  d.dP = patch.dP;
  d.dh.assign(static_cast<std::size_t>(patch.num_cells()) * static_cast<std::size_t>(ng), kUndefined);
  for (int c = 0; c < patch.num_cells(); ++c)
    for (Letter s = 0; s < ng; ++s)
      if (int y = patch.domain.neighbor(c, s); y >= 0)
        d.dh[static_cast<std::size_t>(c) * static_cast<std::size_t>(ng) + static_cast<std::size_t>(s)] =
            patch.h[static_cast<std::size_t>(y)] - patch.h[static_cast<std::size_t>(c)];
  return d;
}

long integrate_derivative(const LocalData& data, const BallTable& domain, const std::vector<int>& path) {
  long sum = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const int a = path[i], b = path[i + 1];
    if (a == b) continue;
    Letter step = -1;
    for (Letter s = 0; s < domain.num_generators() && step < 0; ++s)
      if (domain.neighbor(a, s) == b) step = s;
    if (step < 0) throw InputError(kStage, "path cells " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
    const int v = data.derivative(a, step);
    if (v == kUndefined) throw InputError(kStage, "derivative undefined along the path");
    sum += v;
  }
  return sum;
}

std::vector<int> integrate(const LocalData& data, const BallTable& domain) {
  std::vector<int> h(static_cast<std::size_t>(domain.size()), 0);
  for (int x = 1; x < domain.size(); ++x)
    h[static_cast<std::size_t>(x)] = h[static_cast<std::size_t>(domain.parent(x))] + data.derivative(domain.parent(x), domain.last(x));
  return h;
}

std::vector<Violation> check_preshelling(const LocalData& data, const BallTable& domain, const Presentation& p) {
  std::vector<Violation> out;
  const int ng = p.num_generators();
  std::vector<Word> loops;
  for (const Word& r : p.relators()) {
    loops.push_back(r);
    loops.push_back(p.invert(r));
  }
  for (int c = 0; c < domain.size(); ++c) {
    bool open = false;
    for (Letter s = 0; s < ng; ++s) {
      const int v = data.derivative(c, s);
      const int y = domain.neighbor(c, s);
      if (y < 0) {
        open = true;
        continue;
      }
      if (v == kUndefined || v < -1 || v > 1) {
        out.push_back({"lipschitz", c, "dh along " + p.names()[static_cast<std::size_t>(s)] + " is " + std::to_string(v)});
        continue;
      }
      if (data.derivative(y, p.inverse(s)) != -v)
        out.push_back({"antisymmetry", c, "dh along " + p.names()[static_cast<std::size_t>(s)] + " disagrees with its reverse"});
    }
    for (const Word& loop : loops) {
      long sum = 0;
      int cur = c;
      bool inside = true;
      for (Letter s : loop) {
        const int y = domain.neighbor(cur, s);
        const int v = data.derivative(cur, s);
        if (y < 0 || v == kUndefined) {
          inside = false;
          break;
        }
        sum += v;
        cur = y;
      }
      if (inside && sum != 0)
        out.push_back({"relator-loop", c, "loop " + p.format_word(loop) + " integrates to " + std::to_string(sum)});
    }
    const Letter d = data.dP[static_cast<std::size_t>(c)];
    if (d == kSelf) {
      for (Letter s = 0; s < ng; ++s) {
        const int v = data.derivative(c, s);
        if (v != kUndefined && v <= 0) {
          out.push_back({"predecessor", c, "self predecessor at a cell that is not a local minimum of h"});
          break;
        }
      }
    } else if (d == kBoundary) {
      if (!open) out.push_back({"predecessor", c, "boundary marker on a cell with all neighbours in the domain"});
    } else if (d < 0 || d >= ng) {
      out.push_back({"predecessor", c, "invalid predecessor generator"});
    } else if (domain.neighbor(c, d) < 0) {
      out.push_back({"predecessor", c, "predecessor leaves the domain"});
    } else if (data.derivative(c, d) != -1) {
      out.push_back({"predecessor", c, "h(P(g)) != h(g) - 1"});
    }
  }
  return out;
}

std::vector<Violation> check_preshelling(const ShellingPatch& patch, const Presentation& p) {
  return check_preshelling(local_data(patch), patch.domain, p);
}

RuleDictionary build_rule_dictionary(const GroupOracle& oracle, const ShortlexFsa& fsa, int delta, int scan_radius,
                                     int rho) {
  RuleDictionary dict;
  dict.delta = delta;
  dict.rho = rho < 0 ? rule_radius(delta) : std::max(1, rho);
  dict.scan_radius = scan_radius;
  if (scan_radius <= dict.rho) throw InputError(kStage, "scan radius must exceed the rule radius");
  const BallTable ball = oracle.build_ball(scan_radius + dict.rho);
  const BallTable window = oracle.build_ball(dict.rho);
  const Presentation& pres = oracle.presentation();
  std::vector<int> st(static_cast<std::size_t>(ball.size()));
  st[0] = fsa.start();
  for (int x = 1; x < ball.size(); ++x) {
    const int q = st[static_cast<std::size_t>(ball.parent(x))];
    st[static_cast<std::size_t>(x)] = q < 0 ? -1 : fsa.next(q, ball.last(x));
    if (st[static_cast<std::size_t>(x)] < 0) throw Error(kStage, "automaton rejects a shortlex word of the ball");
  }
  std::vector<Word> wwords;
  for (int x = 0; x < window.size(); ++x) wwords.push_back(window.word(x));

  std::vector<int> cells(static_cast<std::size_t>(window.size()));
  for (int r = dict.rho + 1; r <= scan_radius; ++r) {
    for (int g0 = ball.size_upto(r - 1); g0 < ball.size_upto(r); ++g0) {
      for (int x = 0; x < window.size(); ++x) {
        // parents in the window tree come first
        cells[static_cast<std::size_t>(x)] = x == 0 ? g0 : ball.neighbor(cells[static_cast<std::size_t>(window.parent(x))], window.last(x));
      }
      auto key = encode_window(
          window, [&](int x) { return cells[static_cast<std::size_t>(x)]; },
          [&](int c) { return ball.level(c); }, [&](int c) { return st[static_cast<std::size_t>(c)]; },
          [&](int c) { return c == 0 ? kSelf : pres.inverse(ball.last(c)); },
          [&](int c, Letter s) { return ball.neighbor(c, s); });
      dict.patterns.insert(std::move(key));
    }
    dict.growth.push_back(dict.patterns.size());
  }
  return dict;
}

// ------------------------------------------------------- exact model windows

namespace {

// One column-synchronous reading of a pair (u, v) of padded shortlex words:
// automaton states, word difference u^-1 v, pad counts and v's last letter.
struct PairNode {
  int qu, qv, diff, vpad, upad, last;
  bool operator==(const PairNode&) const = default;
};

struct PairGraph {
  std::vector<PairNode> nodes;
  std::vector<std::vector<std::pair<int, int>>> succ;  // (u letter or pad, node)
};

PairGraph build_pair_graph(const GroupOracle& oracle, const ShortlexFsa& fsa, int rho) {
  const int ng = fsa.num_generators();
  const int pad = ng;
  PairGraph pg;
  std::unordered_map<std::uint64_t, int> ids;
  auto id_of = [&](const PairNode& n) {
    const std::uint64_t key =
        ((((static_cast<std::uint64_t>(n.qu) * 1024 + static_cast<std::uint64_t>(n.qv)) * 1'000'003 +
           static_cast<std::uint64_t>(n.diff)) * 16 + static_cast<std::uint64_t>(n.vpad)) * 16 +
         static_cast<std::uint64_t>(n.upad)) * 64 + static_cast<std::uint64_t>(n.last + 1);
    auto [it, fresh] = ids.emplace(key, static_cast<int>(pg.nodes.size()));
    if (fresh) {
      pg.nodes.push_back(n);
      pg.succ.emplace_back();
    }
    return it->second;
  };
  id_of({fsa.start(), fsa.start(), 0, 0, 0, -1});
  for (std::size_t i = 0; i < pg.nodes.size(); ++i) {
    const PairNode n = pg.nodes[i];
    std::vector<std::pair<int, int>> us, vs;  // (letter, next state)
    if (n.upad == 0)
      for (Letter a = 0; a < ng; ++a)
        if (int r = fsa.next(n.qu, a); r >= 0) us.push_back({a, r});
    if (n.upad < rho) us.push_back({pad, n.qu});
    if (n.vpad == 0)
      for (Letter b = 0; b < ng; ++b)
        if (int r = fsa.next(n.qv, b); r >= 0) vs.push_back({b, r});
    if (n.vpad < rho) vs.push_back({pad, n.qv});
    for (auto [a, qu] : us)
      for (auto [b, qv] : vs) {
        if (a == pad && b == pad) continue;
        // a padded u cannot meet a v that stopped earlier
        if (a == pad && n.vpad > 0) continue;
        const int e = oracle.diff_step(n.diff, a, b);
        if (e < 0) continue;
        const PairNode m{qu, qv, e, b == pad ? n.vpad + 1 : 0, a == pad ? n.upad + 1 : 0, b == pad ? n.last : b};
        const int j = id_of(m);
        pg.succ[i].push_back({a, j});
      }
  }
  return pg;
}

}  // namespace

std::vector<ModelWindow> enumerate_model_windows(const GroupOracle& oracle, const ShortlexFsa& fsa, int rho,
                                                 std::size_t max_states) {
  if (rho < 1) throw InputError(kStage, "window radius must be positive");
  const int ng = fsa.num_generators();
  const BallTable window = oracle.build_ball(rho);
  const BallTable& boot = oracle.bootstrap_ball();
  const int nw = window.size();
  std::vector<int> target(static_cast<std::size_t>(nw));
  for (int x = 0; x < nw; ++x) {
    target[static_cast<std::size_t>(x)] = boot.find_shortlex(window.word(x));
    if (target[static_cast<std::size_t>(x)] < 0 || target[static_cast<std::size_t>(x)] >= oracle.num_differences())
      throw ConfigError(kStage, "window radius exceeds the oracle's word-difference bound");
  }
  const PairGraph pg = build_pair_graph(oracle, fsa, rho);
  const std::size_t nn = pg.nodes.size();
  const std::size_t words = (static_cast<std::size_t>(nw) + 63) / 64;

  // live[n] bit x: some completion of the pair ends with difference x
  std::vector<std::uint64_t> live(nn * words, 0);
  std::vector<std::vector<int>> pred(nn);
  for (std::size_t i = 0; i < nn; ++i)
    for (auto [a, j] : pg.succ[i]) pred[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
  std::vector<int> work;
  for (std::size_t i = 0; i < nn; ++i)
    for (int x = 0; x < nw; ++x)
      if (pg.nodes[i].diff == target[static_cast<std::size_t>(x)]) {
        live[i * words + static_cast<std::size_t>(x) / 64] |= std::uint64_t{1} << (x % 64);
        work.push_back(static_cast<int>(i));
      }
  while (!work.empty()) {
    const std::size_t j = static_cast<std::size_t>(work.back());
    work.pop_back();
    for (int i : pred[j]) {
      bool grew = false;
      for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t merged = live[static_cast<std::size_t>(i) * words + w] | live[j * words + w];
        grew = grew || merged != live[static_cast<std::size_t>(i) * words + w];
        live[static_cast<std::size_t>(i) * words + w] = merged;
      }
      if (grew) work.push_back(i);
    }
  }
  auto is_live = [&](int n, int x) {
    return (live[static_cast<std::size_t>(n) * words + static_cast<std::size_t>(x) / 64] >> (x % 64)) & 1;
  };

  // Subset construction over u: per offset the live pairs still in play.
  using Joint = std::vector<std::vector<int>>;
  std::unordered_map<std::string, int> seen;
  std::vector<Joint> states;
  std::vector<int> qu_of, len_of;
  auto key_of = [&](int qu, int len, const Joint& j) {
    std::string k;
    put(k, qu);
    put(k, len);
    for (const auto& s : j) {
      put(k, static_cast<int>(s.size()));
      for (int n : s) {
        put(k, n);
        put(k, n >> 16);
      }
    }
    return k;
  };
  auto add = [&](int qu, int len, Joint j) {
    auto [it, fresh] = seen.emplace(key_of(qu, len, j), static_cast<int>(states.size()));
    if (fresh) {
      if (states.size() >= max_states)
        throw ResourceError(kStage, "model window enumeration exceeds " + std::to_string(max_states) + " states", -1);
      states.push_back(std::move(j));
      qu_of.push_back(qu);
      len_of.push_back(len);
    }
  };
  add(fsa.start(), 0, Joint(static_cast<std::size_t>(nw), std::vector<int>{0}));

  std::set<std::vector<int>> shapes;
  std::vector<ModelWindow> out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const Joint cur = states[s];
    const int qu = qu_of[s], len = len_of[s];
    if (len > rho) {
      ModelWindow mw;
      for (int x = 0; x < nw; ++x) {
        std::set<std::array<int, 3>> found;  // (state, offset, last)
        std::vector<int> stack(cur[static_cast<std::size_t>(x)].begin(), cur[static_cast<std::size_t>(x)].end());
        std::set<int> visited(stack.begin(), stack.end());
        while (!stack.empty()) {
          const int n = stack.back();
          stack.pop_back();
          const PairNode& node = pg.nodes[static_cast<std::size_t>(n)];
          if (node.diff == target[static_cast<std::size_t>(x)])
            found.insert({node.qv, node.vpad > 0 ? -node.vpad : node.upad, node.last});
          for (auto [a, j] : pg.succ[static_cast<std::size_t>(n)])
            if (a == ng && is_live(j, x) && visited.insert(j).second) stack.push_back(j);
        }
        if (found.size() != 1)
          throw Error(kStage, "offset " + oracle.presentation().format_word(window.word(x)) + " has " +
                                  std::to_string(found.size()) + " shortlex completions; word differences too small");
        const auto& f = *found.begin();
        mw.state.push_back(f[0]);
        mw.offset.push_back(f[1]);
        mw.last.push_back(f[2]);
      }
      std::vector<int> flat;
      for (int x = 0; x < nw; ++x) {
        flat.push_back(mw.state[static_cast<std::size_t>(x)]);
        flat.push_back(mw.offset[static_cast<std::size_t>(x)]);
        flat.push_back(mw.last[static_cast<std::size_t>(x)]);
      }
      if (shapes.insert(std::move(flat)).second) out.push_back(std::move(mw));
    }
    for (Letter a = 0; a < ng; ++a) {
      const int nq = fsa.next(qu, a);
      if (nq < 0) continue;
      Joint next(static_cast<std::size_t>(nw));
      bool dead = false;
      for (int x = 0; x < nw && !dead; ++x) {
        auto& t = next[static_cast<std::size_t>(x)];
        for (int n : cur[static_cast<std::size_t>(x)])
          for (auto [b, j] : pg.succ[static_cast<std::size_t>(n)])
            if (b == a && is_live(j, x)) t.push_back(j);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        dead = t.empty();
      }
      if (dead) throw Error(kStage, "no shortlex completion for a window offset; word differences too small");
      add(nq, std::min(len + 1, rho + 1), std::move(next));
    }
  }
  return out;
}

RuleDictionary build_exact_rule_dictionary(const GroupOracle& oracle, const ShortlexFsa& fsa, int delta, int rho) {
  RuleDictionary dict;
  dict.delta = delta;
  dict.rho = rho < 0 ? rule_radius(delta) : std::max(1, rho);
  dict.scan_radius = -1;
  const BallTable window = oracle.build_ball(dict.rho);
  const Presentation& pres = oracle.presentation();
  for (const ModelWindow& mw : enumerate_model_windows(oracle, fsa, dict.rho)) {
    dict.patterns.insert(encode_window(
        window, [](int x) { return x; }, [&](int x) { return mw.offset[static_cast<std::size_t>(x)]; },
        [&](int x) { return mw.state[static_cast<std::size_t>(x)]; },
        [&](int x) { return pres.inverse(mw.last[static_cast<std::size_t>(x)]); },
        [&](int x, Letter s) { return window.neighbor(x, s); }));
  }
  dict.growth.push_back(dict.patterns.size());
  return dict;
}

std::string window_pattern(const ShellingPatch& patch, const BallTable& window, int cell) {
  std::vector<int> cells(static_cast<std::size_t>(window.size()));
  for (int x = 0; x < window.size(); ++x)
    cells[static_cast<std::size_t>(x)] =
        x == 0 ? cell : patch.domain.neighbor(cells[static_cast<std::size_t>(window.parent(x))], window.last(x));
  return encode_window(
      window, [&](int x) { return cells[static_cast<std::size_t>(x)]; },
      [&](int c) { return patch.h[static_cast<std::size_t>(c)]; },
      [&](int c) { return patch.state[static_cast<std::size_t>(c)]; },
      [&](int c) { return patch.dP[static_cast<std::size_t>(c)]; },
      [&](int c, Letter s) { return patch.domain.neighbor(c, s); });
}

std::vector<Violation> check_shortlex_local_rules(const ShellingPatch& patch, const ShortlexFsa& fsa,
                                                  const RuleDictionary& dictionary) {
  if (dictionary.delta != patch.delta)
    throw ConfigError(kStage, "dictionary built for delta " + std::to_string(dictionary.delta) +
                                  ", patch uses " + std::to_string(patch.delta));
  std::vector<Violation> out;
  const int ng = patch.domain.num_generators();
  // a window is a ball of the same group, truncated from the domain itself
  if (patch.radius < dictionary.rho) return out;
  const BallTable window = patch.domain.truncated(dictionary.rho);
  for (int c = 0; c < patch.num_cells(); ++c) {
    const int q = patch.state[static_cast<std::size_t>(c)];
    if (q < 0 || q >= fsa.num_states()) {
      out.push_back({"transition", c, "state out of range"});
      continue;
    }
    const Letter d = patch.dP[static_cast<std::size_t>(c)];
    const int pc = patch.predecessor(c);
    if (d >= 0 && d < ng && pc >= 0) {
      const int pq = patch.state[static_cast<std::size_t>(pc)];
      // P(g) = g d, so g = P(g) d^-1
      const Letter back = [&] {
        for (Letter s = 0; s < ng; ++s)
          if (patch.domain.neighbor(pc, s) == c) return s;
        return Letter(-1);
      }();
      if (pq < 0 || pq >= fsa.num_states() || back < 0 || fsa.next(pq, back) != q)
        out.push_back({"transition", c, "state(P(g)) does not read to state(g)"});
    }
  }
  for (int c = 0; c < patch.num_cells(); ++c) {
    if (patch.domain.level(c) + dictionary.rho > patch.radius) continue;
    if (!dictionary.patterns.count(window_pattern(patch, window, c)))
      out.push_back({"dictionary", c, "window matches no model pattern"});
  }
  return out;
}

std::vector<std::pair<int, std::vector<int>>> horospheres(const ShellingPatch& patch) {
  std::map<int, std::vector<int>> levels;
  for (int c = 0; c < patch.num_cells(); ++c) levels[patch.h[static_cast<std::size_t>(c)]].push_back(c);
  return {levels.begin(), levels.end()};
}

std::vector<int> domain_distances(const BallTable& domain, int from, int limit) {
  std::vector<int> dist(static_cast<std::size_t>(domain.size()), -1);
  std::deque<int> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    if (limit >= 0 && dist[static_cast<std::size_t>(x)] >= limit) continue;
    for (Letter s = 0; s < domain.num_generators(); ++s) {
      const int y = domain.neighbor(x, s);
      if (y >= 0 && dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

DipReport check_dip(const ShellingPatch& patch, const GroupOracle& oracle, const std::vector<std::pair<int, int>>& pairs,
                    int x) {
  DipReport rep;
  const Presentation& pres = oracle.presentation();
  for (auto [g1, g2] : pairs) {
    if (patch.h[static_cast<std::size_t>(g1)] != patch.h[static_cast<std::size_t>(g2)]) {
      ++rep.pairs_vacuous;
      continue;
    }
    Word w = pres.invert(patch.domain.word(g1));
    const Word w2 = patch.domain.word(g2);
    w.insert(w.end(), w2.begin(), w2.end());
    const int d = static_cast<int>(oracle.normal_form(w).size());
    if (d <= 2 * x + 2 * patch.delta) {
      ++rep.pairs_vacuous;
      continue;
    }
    const auto d1 = domain_distances(patch.domain, g1, d);
    if (d1[static_cast<std::size_t>(g2)] != d) {  // some geodesic leaves the domain
      ++rep.pairs_vacuous;
      continue;
    }
    const auto d2 = domain_distances(patch.domain, g2, d);
    ++rep.pairs_checked;
    const int bound = patch.h[static_cast<std::size_t>(g1)] - (x - 2 * patch.delta);
    for (int c = 0; c < patch.num_cells(); ++c)
      if (d1[static_cast<std::size_t>(c)] == x && d2[static_cast<std::size_t>(c)] == d - x &&
          patch.h[static_cast<std::size_t>(c)] > bound) {
        rep.counterexamples.push_back({g1, g2, d, c, patch.h[static_cast<std::size_t>(c)]});
        break;
      }
  }
  return rep;
}

std::string write_patch(const ShellingPatch& patch, const Presentation& p) {
  std::ostringstream out;
  out << "# shelling patch\n";
  out << "presentation: " << format_hash(patch.presentation_hash) << "\n";
  out << "delta: " << patch.delta << "\n";
  out << "radius: " << patch.radius << "\n";
  out << "basepoint: " << p.format_word(patch.basepoint) << "\n";
  for (int c = 0; c < patch.num_cells(); ++c) {
    const Letter d = patch.dP[static_cast<std::size_t>(c)];
    out << "cell: " << p.format_word(patch.domain.word(c)) << " h=" << patch.h[static_cast<std::size_t>(c)]
        << " state=" << patch.state[static_cast<std::size_t>(c)] << " P="
        << (d == kBoundary ? std::string("boundary") : d == kSelf ? std::string("self") : p.names()[static_cast<std::size_t>(d)]);
    if (patch.pop[static_cast<std::size_t>(c)] >= 0) out << " pop=" << patch.pop[static_cast<std::size_t>(c)];
    if (patch.pop_delta[static_cast<std::size_t>(c)] >= 0) out << " delta=" << patch.pop_delta[static_cast<std::size_t>(c)];
    out << "\n";
  }
  return out.str();
}

ShellingPatch read_patch(const std::string& text, const GroupOracle& oracle) {
  const Presentation& pres = oracle.presentation();
  ShellingPatch p;
  p.presentation_hash = pres.hash();
  int radius = -1;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<char> seen;
  auto fail = [&](const std::string& msg) { throw InputError(kStage, "line " + std::to_string(lineno) + ": " + msg); };
  auto int_field = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      int r = std::stoi(v, &used);
      if (used != v.size()) fail("bad integer '" + v + "'");
      return r;
    } catch (const std::logic_error&) {
      fail("bad integer '" + v + "'");
    }
    return 0;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'");
    const std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (key == "presentation") {
      std::istringstream v(value);
      std::string hex;
      v >> hex;
      if (hex != format_hash(pres.hash())) fail("patch was written for a different presentation");
    } else if (key == "delta") {
      p.delta = int_field(value.substr(value.find_first_not_of(' ')));
    } else if (key == "radius") {
      radius = int_field(value.substr(value.find_first_not_of(' ')));
      if (radius < 0) fail("negative radius");
      p.radius = radius;
      p.domain = oracle.build_ball(radius);
      const auto n = static_cast<std::size_t>(p.domain.size());
      p.h.assign(n, 0);
      p.state.assign(n, 0);
      p.dP.assign(n, kBoundary);
      p.pop.assign(n, -1);
      p.pop_delta.assign(n, -1);
      seen.assign(n, 0);
    } else if (key == "basepoint") {
      p.basepoint = pres.parse_word(value);
    } else if (key == "cell") {
      if (radius < 0) fail("'cell' before 'radius'");
      const auto hpos = value.find(" h=");
      if (hpos == std::string::npos) fail("cell without h=");
      const Word w = pres.parse_word(value.substr(0, hpos));
      const int c = p.domain.find_shortlex(w);
      if (c < 0) fail("cell word is not a shortlex element of the domain");
      if (seen[static_cast<std::size_t>(c)]) fail("duplicate cell");
      seen[static_cast<std::size_t>(c)] = 1;
      std::istringstream fields(value.substr(hpos));
      std::string f;
      bool has_h = false, has_state = false, has_p = false;
      while (fields >> f) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) fail("bad field '" + f + "'");
        const std::string k = f.substr(0, eq), v = f.substr(eq + 1);
        if (k == "h") {
          p.h[static_cast<std::size_t>(c)] = int_field(v);
          has_h = true;
        } else if (k == "state") {
          p.state[static_cast<std::size_t>(c)] = int_field(v);
          has_state = true;
        } else if (k == "P") {
          has_p = true;
          if (v == "boundary") {
            p.dP[static_cast<std::size_t>(c)] = kBoundary;
          } else if (v == "self") {
            p.dP[static_cast<std::size_t>(c)] = kSelf;
          } else {
            const auto& names = pres.names();
            auto it = std::find(names.begin(), names.end(), v);
            if (it == names.end()) fail("unknown generator '" + v + "'");
            p.dP[static_cast<std::size_t>(c)] = static_cast<Letter>(it - names.begin());
          }
        } else if (k == "pop") {
          p.pop[static_cast<std::size_t>(c)] = int_field(v);
        } else if (k == "delta") {
          p.pop_delta[static_cast<std::size_t>(c)] = int_field(v);
        } else {
          fail("unknown field '" + k + "'");
        }
      }
      if (!has_h || !has_state || !has_p) fail("cell needs h, state and P");
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (radius < 0) throw InputError(kStage, "patch has no radius");
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InputError(kStage, "patch is missing cells");
  return p;
}

}  // namespace hypsft
