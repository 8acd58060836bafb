#include "hypsft/population.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "population";
constexpr long kInf = std::numeric_limits<long>::max() / 4;

// Dinic on small bipartite networks; paths have at most six nodes, so the
// recursive augmentation is shallow.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : adj_(static_cast<std::size_t>(n)) {}

  int add(int a, int b, long cap) {
    adj_[static_cast<std::size_t>(a)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({b, cap, cap});
    adj_[static_cast<std::size_t>(b)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({a, 0, 0});
    return static_cast<int>(edges_.size()) - 2;
  }

  long flow_on(int id) const { return edges_[static_cast<std::size_t>(id)].orig - edges_[static_cast<std::size_t>(id)].cap; }

  long run(int s, int t) {
    long total = 0;
    while (layer(s, t)) {
      it_.assign(adj_.size(), 0);
      while (long f = push(s, t, kInf)) total += f;
    }
    return total;
  }

  std::vector<char> reachable(int s) const {
    std::vector<char> seen(adj_.size(), 0);
    std::vector<int> stack{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int id : adj_[static_cast<std::size_t>(v)]) {
        const auto& e = edges_[static_cast<std::size_t>(id)];
        if (e.cap > 0 && !seen[static_cast<std::size_t>(e.to)]) {
          seen[static_cast<std::size_t>(e.to)] = 1;
          stack.push_back(e.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    long cap, orig;
  };

  bool layer(int s, int t) {
    dist_.assign(adj_.size(), -1);
    std::deque<int> queue{s};
    dist_[static_cast<std::size_t>(s)] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int id : adj_[static_cast<std::size_t>(v)]) {
        const auto& e = edges_[static_cast<std::size_t>(id)];
        if (e.cap > 0 && dist_[static_cast<std::size_t>(e.to)] < 0) {
          dist_[static_cast<std::size_t>(e.to)] = dist_[static_cast<std::size_t>(v)] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return dist_[static_cast<std::size_t>(t)] >= 0;
  }

  long push(int v, int t, long f) {
    if (v == t) return f;
    auto& i = it_[static_cast<std::size_t>(v)];
    for (; i < adj_[static_cast<std::size_t>(v)].size(); ++i) {
      const int id = adj_[static_cast<std::size_t>(v)][i];
      auto& e = edges_[static_cast<std::size_t>(id)];
      if (e.cap <= 0 || dist_[static_cast<std::size_t>(e.to)] != dist_[static_cast<std::size_t>(v)] + 1) continue;
      if (long got = push(e.to, t, std::min(f, e.cap))) {
        e.cap -= got;
        edges_[static_cast<std::size_t>(id ^ 1)].cap += got;
        return got;
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> dist_;
  std::vector<std::size_t> it_;
};

std::vector<std::vector<int>> reverse_edges(const TransportProblem& p) {
  std::vector<std::vector<int>> rev(p.right_cap.size());
  for (std::size_t i = 0; i < p.edges.size(); ++i)
    for (int j : p.edges[i]) rev[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
  for (auto& r : rev) std::sort(r.begin(), r.end());
  return rev;
}

// Hall certificate for saturating the required nodes of one side alone.
bool one_sided_certificate(const std::vector<long>& cap, const std::vector<char>& required,
                           const std::vector<long>& other_cap, const std::vector<std::vector<int>>& edges,
                           HallCertificate& cert) {
  const int n = static_cast<int>(cap.size()), m = static_cast<int>(other_cap.size());
  const int s = n + m, t = s + 1;
  MaxFlow mf(t + 1);
  long need = 0;
  for (int i = 0; i < n; ++i)
    if (required[static_cast<std::size_t>(i)]) {
      mf.add(s, i, cap[static_cast<std::size_t>(i)]);
      need += cap[static_cast<std::size_t>(i)];
    }
  for (int i = 0; i < n; ++i)
    for (int j : edges[static_cast<std::size_t>(i)]) mf.add(i, n + j, kInf);
  for (int j = 0; j < m; ++j) mf.add(n + j, t, other_cap[static_cast<std::size_t>(j)]);
  if (mf.run(s, t) == need) return false;
  const auto seen = mf.reachable(s);
  cert.villages.clear();
  std::set<int> nbrs;
  cert.demand = 0;
  for (int i = 0; i < n; ++i)
    if (required[static_cast<std::size_t>(i)] && seen[static_cast<std::size_t>(i)]) {
      cert.villages.push_back(i);
      cert.demand += cap[static_cast<std::size_t>(i)];
      nbrs.insert(edges[static_cast<std::size_t>(i)].begin(), edges[static_cast<std::size_t>(i)].end());
    }
  cert.supply = 0;
  for (int j : nbrs) cert.supply += other_cap[static_cast<std::size_t>(j)];
  return true;
}

long ipow(int q, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= q;
  return r;
}

long floor_long(const Real& x) { return static_cast<long>(boost::multiprecision::floor(x)); }

Real max_mu(const std::vector<Real>& mu) {
  Real m = 0;
  for (const auto& x : mu) m = std::max(m, x);
  return m;
}

int top_level(const ShellingPatch& patch) {
  return patch.h.empty() ? 0 : *std::max_element(patch.h.begin(), patch.h.end());
}

std::vector<char> positive_states(const std::vector<Real>& mu) {
  std::vector<char> pos;
  for (const auto& m : mu) pos.push_back(m > 0);
  return pos;
}

void build_graphs(PopulatedPatch& pp) {
  const auto pos = positive_states(pp.mu);
  const int top = top_level(pp.base);
  pp.graphs.clear();
  for (std::size_t i = 0; i < pp.levels.size(); ++i) {
    const int level = pp.levels[i];
    const int depth = std::min(pp.params.depth, top - level);
    pp.graphs.push_back(build_divergence_graph(pp.base, pos, level, std::max(0, depth)));
  }
}

}  // namespace

// ---------------------------------------------------------------- path covers

std::vector<int> graph_distances(const std::vector<std::vector<int>>& adj, int from, int limit) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (limit >= 0 && dist[static_cast<std::size_t>(v)] >= limit) continue;
    for (int w : adj[static_cast<std::size_t>(v)])
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

PathCover path_cover(const std::vector<std::vector<int>>& adj, int L) {
  if (L < 1) throw ConfigError(kStage, "path cover needs L >= 1");
  const int n = static_cast<int>(adj.size());
  PathCover pc;
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  std::vector<int> mark(static_cast<std::size_t>(n), -1);
  int epoch = 0, start = 0;
  while (true) {
    while (start < n && covered[static_cast<std::size_t>(start)]) ++start;
    if (start == n) break;
    std::vector<int> path{start};
    covered[static_cast<std::size_t>(start)] = 1;
    int cur = start;
    while (true) {
      ++epoch;
      std::vector<int> frontier{cur};
      mark[static_cast<std::size_t>(cur)] = epoch;
      int best = -1, best_d = 0;
      for (int d = 1; d <= L && !frontier.empty() && best < 0; ++d) {
        std::vector<int> next;
        for (int v : frontier)
          for (int w : adj[static_cast<std::size_t>(v)]) {
            if (mark[static_cast<std::size_t>(w)] == epoch) continue;
            mark[static_cast<std::size_t>(w)] = epoch;
            next.push_back(w);
            if (!covered[static_cast<std::size_t>(w)] && (best < 0 || w < best)) {
              best = w;
              best_d = d;
            }
          }
        frontier.swap(next);
      }
      if (best < 0) break;
      covered[static_cast<std::size_t>(best)] = 1;
      path.push_back(best);
      pc.defect = std::max(pc.defect, best_d);
      cur = best;
    }
    pc.paths.push_back(std::move(path));
    pc.origin.push_back(0);
  }
  return pc;
}

PathCover path_cover(const DivergenceGraph& graph, int L) {
  PathCover pc = path_cover(graph.adj, L);
  // components meeting the interior
  std::vector<int> comp(graph.vertices.size(), -1);
  int ncomp = 0, interior_comps = 0;
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    if (comp[v] >= 0) continue;
    bool inner = false;
    std::vector<int> stack{static_cast<int>(v)};
    comp[v] = ncomp;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      inner = inner || graph.interior[static_cast<std::size_t>(x)];
      for (int y : graph.adj[static_cast<std::size_t>(x)])
        if (comp[static_cast<std::size_t>(y)] < 0) {
          comp[static_cast<std::size_t>(y)] = ncomp;
          stack.push_back(y);
        }
    }
    ++ncomp;
    if (inner) ++interior_comps;
  }
  if (interior_comps > 1)
    pc.warnings.push_back("level " + std::to_string(graph.level) + ": interior meets " +
                          std::to_string(interior_comps) + " components, covered separately");
  return pc;
}

// ---------------------------------------------------------- balanced sequence

BalancedSequence balanced_sequence(const LambdaInterval& lambda, int q, const Real& A, const Real& nu0,
                                   std::size_t length) {
  if (q < 2) throw ConfigError(kStage, "q must be at least 2");
  if (A < 1) throw ConfigError(kStage, "A must be at least 1");
  if (lambda.lo < 1) throw ConfigError(kStage, "growth rate below 1");
  if (nu0 < A || nu0 >= q * A) throw InputError(kStage, "nu0 must lie in [A, qA)");
  BalancedSequence seq;
  seq.q = q;
  seq.A = A;
  int k = 0;
  Real pk = 1;
  while (pk * q <= lambda.lo) {
    pk *= q;
    ++k;
  }
  if (lambda.hi >= pk * q) throw PrecisionError(kStage, "lambda interval straddles a power of q", 0);
  seq.floor_log = k;
  const Real lam = lambda.mid();
  seq.threshold = lam / pk * A;
  const Real t_lo = lambda.lo / pk * A, t_hi = lambda.hi / pk * A;
  seq.nu.reserve(length);
  seq.delta.reserve(length);
  if (lambda.lo == lambda.hi && lambda.lo == pk) {
    // lambda = q^k: nothing below the threshold, nu never moves
    seq.nu.assign(length, nu0);
    seq.delta.assign(length, k);
    return seq;
  }
  const Real rel = lambda.width() / lambda.lo + Real("1e-45");
  Real nu = nu0, err = 0;
  for (std::size_t i = 0; i < length; ++i) {
    int d;
    if (nu + err < t_lo) {
      d = k + 1;
    } else if (nu - err >= t_hi) {
      d = k;
    } else {
      throw PrecisionError(kStage, "cannot place nu against the threshold", static_cast<long>(i));
    }
    seq.nu.push_back(nu);
    seq.delta.push_back(d);
    const Real r = Real(ipow(q, d)) / lam;
    nu *= r;
    err = err * r + nu * rel;
  }
  return seq;
}

void extend_backward(BalancedSequence& seq, const LambdaInterval& lambda, std::size_t count) {
  if (seq.nu.empty()) throw InputError(kStage, "cannot extend an empty sequence");
  const Real lam = lambda.mid();
  const Real qA = seq.A * seq.q;
  for (std::size_t i = 0; i < count; ++i) {
    const Real& nu = seq.nu.front();
    const Real below = lam * nu / ipow(seq.q, seq.floor_log + 1);
    const Real above = lam * nu / ipow(seq.q, seq.floor_log);
    Real prev;
    int d;
    if (below >= seq.A && below < seq.threshold) {
      prev = below;
      d = seq.floor_log + 1;
    } else if (above >= seq.threshold && above < qA) {
      prev = above;
      d = seq.floor_log;
    } else {
      throw PrecisionError(kStage, "no predecessor term in [A, qA)", -static_cast<long>(i) - 1);
    }
    seq.nu.insert(seq.nu.begin(), prev);
    seq.delta.insert(seq.delta.begin(), d);
  }
}

// ---------------------------------------------------------- density realization

std::vector<long> realize_density(const PathCover& cover, const std::vector<Real>& mu, const Real& nu,
                                  const Real& star) {
  if (nu <= 1) throw ConfigError(kStage, "density nu must exceed 1");
  std::vector<long> pop(mu.size(), 0);
  for (std::size_t p = 0; p < cover.paths.size(); ++p) {
    const auto& path = cover.paths[p];
    const int len = static_cast<int>(path.size());
    const int o = p < cover.origin.size() ? cover.origin[p] : 0;
    // S[i + 1] = S(i) for i = -1 .. len - 1, with S(o - 1) = 0
    std::vector<Real> S(static_cast<std::size_t>(len + 1));
    S[static_cast<std::size_t>(o)] = 0;
    for (int i = o; i < len; ++i)
      S[static_cast<std::size_t>(i + 1)] = S[static_cast<std::size_t>(i)] + mu[static_cast<std::size_t>(path[static_cast<std::size_t>(i)])];
    for (int i = o - 2; i >= -1; --i)
      S[static_cast<std::size_t>(i + 1)] = S[static_cast<std::size_t>(i + 2)] - mu[static_cast<std::size_t>(path[static_cast<std::size_t>(i + 1)])];
    for (int i = 0; i < len; ++i)
      pop[static_cast<std::size_t>(path[static_cast<std::size_t>(i)])] =
          floor_long(star + nu * S[static_cast<std::size_t>(i + 1)]) - floor_long(star + nu * S[static_cast<std::size_t>(i)]);
  }
  return pop;
}

// ------------------------------------------------------------------ transport

TransportResult solve_transport(const TransportProblem& p) {
  const int n = static_cast<int>(p.left_cap.size()), m = static_cast<int>(p.right_cap.size());
  if (p.edges.size() != p.left_cap.size() || p.left_required.size() != p.left_cap.size() ||
      p.right_required.size() != p.right_cap.size())
    throw InputError(kStage, "transport problem has inconsistent sizes");
  const int s = n + m, t = s + 1, ss = t + 1, tt = t + 2;
  MaxFlow mf(tt + 1);
  std::vector<long> excess(static_cast<std::size_t>(tt + 1), 0);
  TransportResult res;
  for (int i = 0; i < n; ++i) {
    const long c = p.left_cap[static_cast<std::size_t>(i)];
    if (p.left_required[static_cast<std::size_t>(i)]) {
      excess[static_cast<std::size_t>(i)] += c;
      excess[static_cast<std::size_t>(s)] -= c;
      res.interior_imbalance += c;
    } else {
      mf.add(s, i, c);
    }
  }
  for (int j = 0; j < m; ++j) {
    const long c = p.right_cap[static_cast<std::size_t>(j)];
    if (p.right_required[static_cast<std::size_t>(j)]) {
      excess[static_cast<std::size_t>(t)] += c;
      excess[static_cast<std::size_t>(n + j)] -= c;
      res.interior_imbalance -= c;
    } else {
      mf.add(n + j, t, c);
    }
  }
  std::vector<std::vector<int>> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j : p.edges[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= m) throw InputError(kStage, "transport edge to a missing village");
      ids[static_cast<std::size_t>(i)].push_back(mf.add(i, n + j, kInf));
    }
  mf.add(t, s, kInf);
  long need = 0;
  for (int x = 0; x <= t; ++x) {
    if (excess[static_cast<std::size_t>(x)] > 0) {
      mf.add(ss, x, excess[static_cast<std::size_t>(x)]);
      need += excess[static_cast<std::size_t>(x)];
    } else if (excess[static_cast<std::size_t>(x)] < 0) {
      mf.add(x, tt, -excess[static_cast<std::size_t>(x)]);
    }
  }
  res.feasible = mf.run(ss, tt) == need;
  if (res.feasible) {
    res.flow.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (std::size_t e = 0; e < ids[static_cast<std::size_t>(i)].size(); ++e)
        if (long f = mf.flow_on(ids[static_cast<std::size_t>(i)][e]))
          res.flow[static_cast<std::size_t>(i)].push_back({p.edges[static_cast<std::size_t>(i)][e], f});
    return res;
  }
  // One side alone must already fail (Mendelsohn-Dulmage), which yields a
  // plain Hall violation.
  if (one_sided_certificate(p.left_cap, p.left_required, p.right_cap, p.edges, res.certificate)) {
    res.certificate.left_side = true;
  } else if (one_sided_certificate(p.right_cap, p.right_required, p.left_cap, reverse_edges(p), res.certificate)) {
    res.certificate.left_side = false;
  }
  return res;
}

bool verify_certificate(const TransportProblem& p, const HallCertificate& cert) {
  const auto& cap = cert.left_side ? p.left_cap : p.right_cap;
  const auto& req = cert.left_side ? p.left_required : p.right_required;
  const auto& other = cert.left_side ? p.right_cap : p.left_cap;
  const auto edges = cert.left_side ? p.edges : reverse_edges(p);
  if (cert.villages.empty()) return false;
  long demand = 0, supply = 0;
  std::set<int> nbrs;
  for (int v : cert.villages) {
    if (v < 0 || v >= static_cast<int>(cap.size()) || !req[static_cast<std::size_t>(v)]) return false;
    demand += cap[static_cast<std::size_t>(v)];
    nbrs.insert(edges[static_cast<std::size_t>(v)].begin(), edges[static_cast<std::size_t>(v)].end());
  }
  for (int u : nbrs) supply += other[static_cast<std::size_t>(u)];
  return demand == cert.demand && supply == cert.supply && demand > supply;
}

// ------------------------------------------------------------ populated patch

const DivergenceGraph* PopulatedPatch::graph_at(int level) const {
  for (std::size_t i = 0; i < levels.size() && i < graphs.size(); ++i)
    if (levels[i] == level) return &graphs[i];
  return nullptr;
}

bool PopulatedPatch::parent_interior(int cell) const {
  const int level = base.h[static_cast<std::size_t>(cell)];
  if (levels.empty() || level >= levels.back()) return false;
  const DivergenceGraph* g = graph_at(level);
  if (!g) return false;
  const int i = g->index_of(cell);
  return i >= 0 && g->interior[static_cast<std::size_t>(i)];
}

TransportProblem generation_problem(const PopulatedPatch& pp, std::size_t li, int hops, std::vector<int>* left_cells,
                                    std::vector<int>* right_cells) {
  if (li + 1 >= pp.levels.size()) throw InputError(kStage, "no level above for this generation");
  const DivergenceGraph& lower = pp.graphs[li];
  const DivergenceGraph& upper = pp.graphs[li + 1];
  const long slots = ipow(pp.params.q, pp.delta_per_level.at(pp.levels[li]));
  TransportProblem tp;
  std::vector<int> rights;
  std::vector<std::vector<int>> children(lower.vertices.size());
  for (int u : upper.vertices) {
    const int pu = pp.base.predecessor(u);
    const int i = pu < 0 ? -1 : lower.index_of(pu);
    if (i < 0) continue;
    children[static_cast<std::size_t>(i)].push_back(static_cast<int>(rights.size()));
    rights.push_back(u);
    tp.right_cap.push_back(pp.base.pop[static_cast<std::size_t>(u)]);
    tp.right_required.push_back(lower.interior[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 0; i < lower.vertices.size(); ++i) {
    tp.left_cap.push_back(slots * pp.base.pop[static_cast<std::size_t>(lower.vertices[i])]);
    tp.left_required.push_back(lower.interior[i]);
    const auto dist = graph_distances(lower.adj, static_cast<int>(i), hops);
    std::vector<int> e;
    for (std::size_t w = 0; w < dist.size(); ++w)
      if (dist[w] >= 0) e.insert(e.end(), children[w].begin(), children[w].end());
    std::sort(e.begin(), e.end());
    tp.edges.push_back(std::move(e));
  }
  if (left_cells) *left_cells = lower.vertices;
  if (right_cells) *right_cells = rights;
  return tp;
}

std::vector<MatchEntry> match_generations(const PopulatedPatch& pp, std::size_t li, int* hops_used) {
  const int limit = std::max(0, pp.params.L);
  const int nv = static_cast<int>(pp.graphs[li].vertices.size());
  TransportResult res;
  std::vector<int> lefts, rights;
  int hops = 0;
  for (;;) {
    const TransportProblem tp = generation_problem(pp, li, hops, &lefts, &rights);
    res = solve_transport(tp);
    // beyond nv hops the neighbourhoods stop growing
    if (res.feasible || hops >= limit || hops >= nv) break;
    hops = std::min({limit, nv, std::max(1, 2 * hops)});
  }
  if (!res.feasible) {
    const auto& c = res.certificate;
    throw Error(kStage, "levels " + std::to_string(pp.levels[li]) + " -> " + std::to_string(pp.levels[li + 1]) +
                            ": Hall violation on the " + (c.left_side ? "parent" : "child") + " side, demand " +
                            std::to_string(c.demand) + " > supply " + std::to_string(c.supply) + " over " +
                            std::to_string(c.villages.size()) + " villages");
  }
  if (hops_used) *hops_used = hops;
  const int slots = static_cast<int>(ipow(pp.params.q, pp.delta_per_level.at(pp.levels[li])));
  std::vector<int> taken(rights.size(), 0);
  std::vector<MatchEntry> out;
  for (std::size_t i = 0; i < lefts.size(); ++i) {
    int t = 0;
    for (auto [j, amount] : res.flow[i])
      for (long a = 0; a < amount; ++a, ++t)
        out.push_back({lefts[i], t / slots + 1, t % slots + 1, rights[static_cast<std::size_t>(j)],
                       ++taken[static_cast<std::size_t>(j)]});
  }
  return out;
}

PopulatedPatch populate_patch(const ShellingPatch& patch, const GrowthData& growth, int q, const Real& nu0, int depth,
                              const Real& A) {
  PopulatedPatch pp;
  pp.base = patch;
  pp.mu = growth.mu;
  const Real mmax = max_mu(pp.mu);
  if (mmax <= 0) throw DegenerateGrowth(kStage, "mu vanishes everywhere");
  auto& prm = pp.params;
  prm.q = q;
  prm.depth = std::max(0, depth);
  prm.A = A > 0 ? A : Real((2 * q + 2) * mmax + 1);
  prm.N = static_cast<long>(boost::multiprecision::ceil(q * prm.A * mmax)) + 1;
  const int r2 = 2 * patch.delta;
  if (r2 > patch.radius) throw ConfigError("shelling", "patch radius below 2 delta");
  prm.L = 2 * patch.domain.size_upto(r2) + 1;
  prm.star = 0;
  const Real start = nu0 > 0 ? nu0 : prm.A;

  if (!check_incommensurable(growth, q).incommensurable)
    pp.warnings.push_back("log_q lambda is rational: the growth sequence will be periodic");

  // levels holding an interior vertex, plus one above for their children
  const auto pos = positive_states(pp.mu);
  std::set<int> inner;
  for (int c = 0; c < patch.num_cells(); ++c) {
    const int st = patch.state[static_cast<std::size_t>(c)];
    if (st >= 0 && st < static_cast<int>(pos.size()) && pos[static_cast<std::size_t>(st)] &&
        patch.domain.level(c) + prm.depth + r2 <= patch.radius)
      inner.insert(patch.h[static_cast<std::size_t>(c)]);
  }
  if (inner.empty()) throw ConfigError("shelling", "patch radius too small for an interior level");
  for (int h = *inner.begin(); h <= *inner.rbegin() + 1; ++h) pp.levels.push_back(h);
  build_graphs(pp);

  const BalancedSequence seq = balanced_sequence(growth.lambda, q, prm.A, start, pp.levels.size());
  prm.floor_log = seq.floor_log;
  for (std::size_t i = 0; i < pp.levels.size(); ++i) {
    const int level = pp.levels[i];
    const DivergenceGraph& g = pp.graphs[i];
    pp.delta_per_level[level] = seq.delta[i];
    pp.nu_per_level[level] = seq.nu[i];
    const PathCover cover = path_cover(g, prm.L);
    pp.warnings.insert(pp.warnings.end(), cover.warnings.begin(), cover.warnings.end());
    std::vector<Real> mus;
    for (int v : g.vertices) mus.push_back(pp.mu[static_cast<std::size_t>(patch.state[static_cast<std::size_t>(v)])]);
    const auto pop = realize_density(cover, mus, seq.nu[i], prm.star);
    for (int c : g.level_cells) {
      pp.base.pop[static_cast<std::size_t>(c)] = 0;
      pp.base.pop_delta[static_cast<std::size_t>(c)] = seq.delta[i];
    }
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
      pp.base.pop[static_cast<std::size_t>(g.vertices[v])] = static_cast<int>(pop[v]);
  }
  for (std::size_t i = 0; i + 1 < pp.levels.size(); ++i) {
    int hops = 0;
    auto m = match_generations(pp, i, &hops);
    prm.locality = std::max(prm.locality, hops);
    pp.matching.insert(pp.matching.end(), m.begin(), m.end());
  }
  return pp;
}

PopulatedPatch build_populated_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, const GrowthData& growth,
                                     int R, int D, int q, const Real& nu0, std::uint64_t seed, int delta) {
  if (delta < 0) delta = oracle.estimate_delta(4);
  std::mt19937_64 rng(seed);
  const ShellingPatch patch = generate_shelling_patch(oracle, fsa, R, D, delta, rng);
  return populate_patch(patch, growth, q, nu0);
}

void attach_population_context(PopulatedPatch& pp, const GrowthData& growth) {
  pp.mu = growth.mu;
  pp.levels.clear();
  for (const auto& [level, d] : pp.delta_per_level) pp.levels.push_back(level);
  build_graphs(pp);
}

// --------------------------------------------------------------- rule checks

std::vector<Violation> check_populated_rules(const PopulatedPatch& pp, const Presentation& p, const ShortlexFsa* fsa,
                                             const RuleDictionary* dictionary) {
  std::vector<Violation> out;
  const ShellingPatch& b = pp.base;
  const auto& prm = pp.params;
  if (prm.locality > prm.L) out.push_back({"locality-bound", -1, "matching locality exceeds L"});
  std::set<int> populated(pp.levels.begin(), pp.levels.end());
  auto mu_zero = [&](int c) {
    const int st = b.state[static_cast<std::size_t>(c)];
    return st < 0 || st >= static_cast<int>(pp.mu.size()) || pp.mu[static_cast<std::size_t>(st)] == 0;
  };
  for (int c = 0; c < b.num_cells(); ++c) {
    const int h = b.h[static_cast<std::size_t>(c)];
    if (!populated.count(h)) continue;
    const int pop = b.pop[static_cast<std::size_t>(c)];
    const int d = b.pop_delta[static_cast<std::size_t>(c)];
    if (pop < 0 || pop > prm.N) out.push_back({"pop-range", c, "population " + std::to_string(pop) + " outside [0, N]"});
    if ((pop == 0) != mu_zero(c)) out.push_back({"pop-zero", c, "population vanishes exactly where mu does not"});
    if (d != prm.floor_log && d != prm.floor_log + 1)
      out.push_back({"delta-range", c, "Delta " + std::to_string(d) + " is not floor or ceil of log_q lambda"});
  }
  // Delta agrees across divergence edges (which join cells within 2 delta)
  for (const auto& g : pp.graphs)
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
      for (int j : g.adj[i]) {
        if (j < static_cast<int>(i)) continue;
        const int a = g.vertices[i], c = g.vertices[static_cast<std::size_t>(j)];
        if (b.pop_delta[static_cast<std::size_t>(a)] != b.pop_delta[static_cast<std::size_t>(c)])
          out.push_back({"delta-constancy", a, "Delta differs from a divergence neighbour"});
      }

  // matching: ranges, injectivity, locality
  std::set<std::pair<int, int>> slot_seen, person_seen;
  std::map<int, std::vector<int>> reach;  // parent cell -> hop distances in its level graph
  for (const auto& m : pp.matching) {
    if (m.v < 0 || m.v >= b.num_cells() || m.u < 0 || m.u >= b.num_cells()) {
      out.push_back({"match-range", -1, "matching names a cell outside the patch"});
      continue;
    }
    const int hv = b.h[static_cast<std::size_t>(m.v)];
    const long slots = ipow(prm.q, std::max(0, b.pop_delta[static_cast<std::size_t>(m.v)]));
    if (m.j < 1 || m.j > b.pop[static_cast<std::size_t>(m.v)] || m.k < 1 || m.k > slots)
      out.push_back({"match-range", m.v, "parent slot out of range"});
    if (b.h[static_cast<std::size_t>(m.u)] != hv + 1 || m.l < 1 || m.l > b.pop[static_cast<std::size_t>(m.u)])
      out.push_back({"match-range", m.u, "child person out of range"});
    if (!slot_seen.insert({m.v, (m.j - 1) * static_cast<int>(slots) + m.k}).second)
      out.push_back({"match-duplicate-slot", m.v, "child slot used twice"});
    if (!person_seen.insert({m.u, m.l}).second) out.push_back({"match-duplicate-person", m.u, "person matched twice"});
    const DivergenceGraph* g = pp.graph_at(hv);
    const int iv = g ? g->index_of(m.v) : -1;
    const int pu = b.predecessor(m.u);
    const int ipu = g && pu >= 0 ? g->index_of(pu) : -1;
    if (iv < 0 || ipu < 0) {
      out.push_back({"match-locality", m.v, "child's predecessor is not a village of the parent level"});
      continue;
    }
    auto it = reach.find(m.v);
    if (it == reach.end()) it = reach.emplace(m.v, graph_distances(g->adj, iv, prm.locality)).first;
    if (it->second[static_cast<std::size_t>(ipu)] < 0)
      out.push_back({"match-locality", m.v, "child lands more than " + std::to_string(prm.locality) + " hops away"});
  }
  // every interior slot and every person over an interior parent is matched
  for (std::size_t li = 0; li + 1 < pp.levels.size() && li + 1 < pp.graphs.size(); ++li) {
    const DivergenceGraph& g = pp.graphs[li];
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      if (!g.interior[i]) continue;
      const int v = g.vertices[i];
      const long slots = ipow(prm.q, std::max(0, b.pop_delta[static_cast<std::size_t>(v)]));
      const long want = slots * std::max(0, b.pop[static_cast<std::size_t>(v)]);
      for (long s = 1; s <= want; ++s)
        if (!slot_seen.count({v, static_cast<int>(s)})) {
          out.push_back({"match-missing-slot", v, "interior person has an unmatched child slot"});
          break;
        }
    }
    for (int u : pp.graphs[li + 1].vertices) {
      const int pu = b.predecessor(u);
      if (pu < 0 || !pp.parent_interior(pu)) continue;
      for (int l = 1; l <= b.pop[static_cast<std::size_t>(u)]; ++l)
        if (!person_seen.count({u, l})) {
          out.push_back({"match-missing-person", u, "person over an interior parent has no parent slot"});
          break;
        }
    }
  }
  for (auto& v : check_preshelling(b, p)) out.push_back(std::move(v));
  if (fsa && dictionary)
    for (auto& v : check_shortlex_local_rules(b, *fsa, *dictionary)) out.push_back(std::move(v));
  return out;
}

// ----------------------------------------------------------- growth sequence

std::string GrowthSequenceReport::to_text() const {
  std::ostringstream out;
  out << "period: " << (period ? std::to_string(period) : std::string("none")) << "\n";
  out << "mean_delta: " << mean_delta << "\n";
  out << "mean_log_deviation: " << mean_log_deviation << "\n";
  out << "max_tail_deviation: " << max_tail_deviation << "\n";
  if (period)
    out << "verdict: " << (periodic_consistent ? "period consistent with a rational log_q lambda"
                                               : "period contradicts an irrational log_q lambda; window too short")
        << "\n";
  else
    out << "verdict: no period in the window\n";
  return out.str();
}

GrowthSequenceReport analyze_growth_sequence(const std::vector<int>& delta, int q, const Real& lambda,
                                             int max_period) {
  if (delta.empty()) throw InputError(kStage, "empty growth sequence");
  GrowthSequenceReport rep;
  const std::size_t n = delta.size();
  for (int p = 1; p <= max_period && static_cast<std::size_t>(2 * p) <= n; ++p) {
    bool ok = true;
    for (std::size_t i = 0; ok && i + static_cast<std::size_t>(p) < n; ++i)
      ok = delta[i] == delta[i + static_cast<std::size_t>(p)];
    if (ok) {
      rep.period = p;
      break;
    }
  }
  const double lq = std::log(static_cast<double>(q));
  const double ll = static_cast<double>(log(lambda));
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += delta[i];
    if (i + 1 >= (n + 1) / 2)
      rep.max_tail_deviation = std::max(rep.max_tail_deviation, std::abs(sum / static_cast<double>(i + 1) * lq - ll));
  }
  rep.mean_delta = sum / static_cast<double>(n);
  rep.mean_log_deviation = std::abs(rep.mean_delta * lq - ll);
  if (rep.period) {
    long s = 0;
    for (int i = 0; i < rep.period; ++i) s += delta[static_cast<std::size_t>(i)];
    rep.periodic_consistent = std::abs(rep.period * ll - static_cast<double>(s) * lq) < 1e-9;
  }
  return rep;
}

// ------------------------------------------------------------ descendant cone

DescendantReport check_descendant_cone(const PopulatedPatch& pp, int village, int n, int cone_radius) {
  DescendantReport rep;
  rep.village = village;
  rep.depth = n;
  rep.cone_radius = cone_radius;
  const ShellingPatch& b = pp.base;
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> kids;
  for (const auto& m : pp.matching) kids[{m.v, m.j}].push_back({m.u, m.l});
  std::vector<std::pair<int, int>> people;
  for (int j = 1; j <= std::max(0, b.pop[static_cast<std::size_t>(village)]); ++j) people.push_back({village, j});
  std::vector<int> fibre{village};
  for (int g = 0; g < n; ++g) {
    std::vector<std::pair<int, int>> next;
    for (const auto& pr : people) {
      auto it = kids.find(pr);
      if (it != kids.end()) next.insert(next.end(), it->second.begin(), it->second.end());
    }
    people.swap(next);
    std::vector<int> nf;
    for (int c = 0; c < b.num_cells(); ++c) {
      const int pc = b.predecessor(c);
      if (pc >= 0 && pc != c && std::binary_search(fibre.begin(), fibre.end(), pc)) nf.push_back(c);
    }
    fibre.swap(nf);
  }
  std::set<int> cells;
  for (const auto& pr : people) cells.insert(pr.first);
  rep.descendants = static_cast<int>(cells.size());
  if (cells.empty()) return rep;
  // multi-source BFS from the fibre
  const int limit = 2 * std::max(1, cone_radius) + 2;
  std::vector<int> dist(static_cast<std::size_t>(b.num_cells()), -1);
  std::deque<int> queue;
  for (int c : fibre) {
    dist[static_cast<std::size_t>(c)] = 0;
    queue.push_back(c);
  }
  const int ng = b.domain.num_generators();
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (dist[static_cast<std::size_t>(c)] >= limit) continue;
    for (Letter s = 0; s < ng; ++s) {
      const int y = b.domain.neighbor(c, s);
      if (y >= 0 && dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(c)] + 1;
        queue.push_back(y);
      }
    }
  }
  for (int c : cells) {
    const int d = dist[static_cast<std::size_t>(c)] < 0 ? limit + 1 : dist[static_cast<std::size_t>(c)];
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  rep.inside = rep.max_deviation <= cone_radius;
  return rep;
}

// ------------------------------------------------------------------------ IO

std::string write_populated_patch(const PopulatedPatch& pp, const Presentation& p) {
  std::ostringstream out;
  out << write_patch(pp.base, p);
  const auto& prm = pp.params;
  out << "population: q=" << prm.q << " A=" << prm.A.str(40) << " N=" << prm.N << " L=" << prm.L
      << " locality=" << prm.locality << " depth=" << prm.depth << " floor_log=" << prm.floor_log
      << " star=" << prm.star.str(40) << "\n";
  for (const auto& [level, d] : pp.delta_per_level) {
    out << "level: " << level << " delta=" << d;
    if (auto it = pp.nu_per_level.find(level); it != pp.nu_per_level.end()) out << " nu=" << it->second.str(40);
    out << "\n";
  }
  for (const auto& m : pp.matching)
    out << "match: " << p.format_word(pp.base.domain.word(m.v)) << " " << m.j << " " << m.k << " -> "
        << p.format_word(pp.base.domain.word(m.u)) << " " << m.l << "\n";
  return out.str();
}

PopulatedPatch read_populated_patch(const std::string& text, const GroupOracle& oracle) {
  const Presentation& pres = oracle.presentation();
  PopulatedPatch pp;
  std::ostringstream rest;
  std::vector<std::string> matches;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { throw InputError(kStage, "line " + std::to_string(lineno) + ": " + msg); };
  auto fields = [&](std::istringstream& s) {
    std::map<std::string, std::string> kv;
    std::string f;
    while (s >> f) {
      const auto eq = f.find('=');
      if (eq == std::string::npos) fail("bad field '" + f + "'");
      kv[f.substr(0, eq)] = f.substr(eq + 1);
    }
    return kv;
  };
  auto to_long = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      const long r = std::stol(v, &used);
      if (used == v.size()) return r;
    } catch (const std::logic_error&) {
    }
    fail("bad integer '" + v + "'");
    return 0L;
  };
  bool have_params = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string key = line.substr(0, line.find(':'));
    if (key != "population" && key != "level" && key != "match") {
      rest << line << "\n";
      continue;
    }
    rest << "\n";  // keep line numbers aligned for the patch reader
    std::istringstream v(line.substr(key.size() + 1));
    if (key == "population") {
      auto kv = fields(v);
      for (const char* k : {"q", "A", "N", "L", "locality", "depth", "floor_log", "star"})
        if (!kv.count(k)) fail(std::string("population line lacks ") + k);
      auto& prm = pp.params;
      prm.q = static_cast<int>(to_long(kv["q"]));
      prm.N = to_long(kv["N"]);
      prm.L = static_cast<int>(to_long(kv["L"]));
      prm.locality = static_cast<int>(to_long(kv["locality"]));
      prm.depth = static_cast<int>(to_long(kv["depth"]));
      prm.floor_log = static_cast<int>(to_long(kv["floor_log"]));
      try {
        prm.A = Real(kv["A"]);
        prm.star = Real(kv["star"]);
      } catch (const std::runtime_error&) {
        fail("bad real number");
      }
      have_params = true;
    } else if (key == "level") {
      long level = 0;
      std::string h;
      v >> h;
      level = to_long(h);
      auto kv = fields(v);
      if (!kv.count("delta")) fail("level line lacks delta");
      pp.delta_per_level[static_cast<int>(level)] = static_cast<int>(to_long(kv["delta"]));
      if (kv.count("nu")) pp.nu_per_level[static_cast<int>(level)] = Real(kv["nu"]);
    } else {
      matches.push_back(line.substr(key.size() + 1));
    }
  }
  if (!have_params) throw InputError(kStage, "populated patch has no population line");
  pp.base = read_patch(rest.str(), oracle);
  for (const auto& m : matches) {
    const auto arrow = m.find("->");
    if (arrow == std::string::npos) throw InputError(kStage, "match line without '->'");
    std::vector<std::string> lt, rt;
    std::istringstream ls(m.substr(0, arrow)), rs(m.substr(arrow + 2));
    for (std::string t; ls >> t;) lt.push_back(t);
    for (std::string t; rs >> t;) rt.push_back(t);
    if (lt.size() < 3 || rt.size() < 2) throw InputError(kStage, "short match line");
    auto word_of = [&](const std::vector<std::string>& toks, std::size_t drop) {
      std::string w;
      for (std::size_t i = 0; i + drop < toks.size(); ++i) w += (i ? " " : "") + toks[i];
      const int c = pp.base.domain.find_shortlex(pres.parse_word(w));
      if (c < 0) throw InputError(kStage, "match names a cell outside the patch");
      return c;
    };
    MatchEntry e;
    e.v = word_of(lt, 2);
    e.j = static_cast<int>(to_long(lt[lt.size() - 2]));
    e.k = static_cast<int>(to_long(lt.back()));
    e.u = word_of(rt, 1);
    e.l = static_cast<int>(to_long(rt.back()));
    pp.matching.push_back(e);
  }
  return pp;
}

}  // namespace hypsft
