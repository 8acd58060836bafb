#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "hypsft/errors.hpp"
#include "hypsft/population.hpp"
#include "support.hpp"

using namespace hypsft;

namespace {

using Adj = std::vector<std::vector<int>>;

Adj path_graph(int n) {
  Adj a(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) {
    a[static_cast<std::size_t>(i)].push_back(i + 1);
    a[static_cast<std::size_t>(i + 1)].push_back(i);
  }
  return a;
}

// Connected graph with maximum degree 4: a random spanning tree plus extra edges.
Adj random_graph(int n, std::mt19937_64& rng) {
  std::vector<std::set<int>> s(static_cast<std::size_t>(n));
  auto add = [&](int a, int b) {
    if (a == b || s[static_cast<std::size_t>(a)].size() >= 4 || s[static_cast<std::size_t>(b)].size() >= 4) return false;
    s[static_cast<std::size_t>(a)].insert(b);
    s[static_cast<std::size_t>(b)].insert(a);
    return true;
  };
  for (int v = 1; v < n; ++v)
    while (!add(v, static_cast<int>(rng() % static_cast<unsigned>(v)))) {
    }
  for (int t = 0; t < n / 2; ++t) add(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
  Adj a(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) a[static_cast<std::size_t>(v)].assign(s[static_cast<std::size_t>(v)].begin(), s[static_cast<std::size_t>(v)].end());
  return a;
}

// Replays a cover: disjoint, covering, jumps within L.
bool replay(const Adj& adj, const PathCover& pc, int L) {
  std::vector<int> seen(adj.size(), 0);
  for (const auto& path : pc.paths)
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (seen[static_cast<std::size_t>(path[i])]++) return false;
      if (i > 0) {
        const auto d = graph_distances(adj, path[i - 1], L);
        if (d[static_cast<std::size_t>(path[i])] < 0) return false;
      }
    }
  return std::all_of(seen.begin(), seen.end(), [](int x) { return x == 1; });
}

// Exact rationals for the balanced-sequence oracle.
struct Frac {
  long long n, d;
};
Frac mul(Frac a, long long num, long long den) {
  Frac r{a.n * num, a.d * den};
  const long long g = std::gcd(r.n, r.d);
  return {r.n / g, r.d / g};
}

LambdaInterval exact(long v) { return {Real(v), Real(v)}; }

const PopulatedPatch& genus2_population() {
  static const PopulatedPatch pp = [] {
    const auto& g = support::genus2();
    return build_populated_patch(g.oracle, g.fsa, g.growth, 6, 7, 2, Real(-1), 11, 2);
  }();
  return pp;
}

std::vector<Violation> populated_violations(const PopulatedPatch& pp) {
  const auto& g = support::genus2();
  return check_populated_rules(pp, g.oracle.presentation(), &g.fsa, &support::genus2_dictionary());
}

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

}  // namespace

TEST_SUITE("population") {

TEST_CASE("path covers") {
  const Adj p5 = path_graph(5);
  const PathCover a = path_cover(p5, 1);
  REQUIRE(a.paths.size() == 1);
  CHECK(a.paths[0] == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(a.defect <= 1);

  Adj c6 = path_graph(6);
  c6[0].insert(c6[0].begin(), 5);
  c6[5].push_back(0);
  std::sort(c6[0].begin(), c6[0].end());
  const PathCover b = path_cover(c6, 1);
  REQUIRE(b.paths.size() == 1);
  CHECK(b.paths[0].size() == 6);
  CHECK(replay(c6, b, 1));

  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const Adj g = random_graph(50, rng);
    const PathCover c = path_cover(g, 9);
    CHECK(replay(g, c, 9));
    CHECK(c.defect <= 9);
    CHECK(path_cover(g, 9).paths == c.paths);
  }
  CHECK_THROWS_AS(path_cover(p5, 0), ConfigError);
}

TEST_CASE("balanced sequence for lambda 3, q 2") {
  const BalancedSequence s = balanced_sequence(exact(3), 2, Real(10), Real(10), 8);
  REQUIRE(s.nu.size() == 8);
  CHECK(s.floor_log == 1);
  CHECK(abs(s.threshold - 15) < Real("1e-40"));
  Frac nu{10, 1};
  const std::vector<double> table{10, 13.33, 17.78, 11.85, 15.80, 10.54, 14.05, 18.73};
  const std::vector<int> deltas{2, 2, 1, 2, 1, 2, 2, 1};
  for (std::size_t i = 0; i < 8; ++i) {
    const int d = nu.n < 15 * nu.d ? 2 : 1;
    CHECK(s.delta[i] == d);
    CHECK(s.delta[i] == deltas[i]);
    CHECK(abs(s.nu[i] - Real(nu.n) / nu.d) < Real("1e-30"));
    // the printed table is rounded to two places (10.535 appears as 10.54)
    CHECK(std::abs(static_cast<double>(s.nu[i]) - table[i]) < 1e-2);
    nu = mul(nu, 1LL << d, 3);
  }
}

TEST_CASE("long balanced sequences stay in range and average log2 3") {
  const BalancedSequence s = balanced_sequence(exact(3), 2, Real(10), Real(10), 20000);
  for (std::size_t i = 0; i < s.nu.size(); ++i) {
    CHECK((s.nu[i] >= 10 && s.nu[i] < 20));
    CHECK((s.delta[i] == 1 || s.delta[i] == 2));
  }
  const double mean = std::accumulate(s.delta.begin(), s.delta.end(), 0.0) / static_cast<double>(s.delta.size());
  CHECK(std::abs(mean - std::log2(3.0)) < 1e-3);
  const std::vector<int> window(s.delta.begin(), s.delta.begin() + 1000);
  const GrowthSequenceReport r = analyze_growth_sequence(window, 2, Real(3), 100);
  CHECK(r.period == 0);
  CHECK(r.mean_log_deviation < 1e-2 * std::log(2.0));
}

TEST_CASE("the recurrence runs backwards") {
  BalancedSequence s = balanced_sequence(exact(3), 2, Real(10), Real("12.5"), 50);
  const std::vector<Real> forward = s.nu;
  extend_backward(s, exact(3), 20);
  REQUIRE(s.nu.size() == 70);
  for (std::size_t i = 0; i < 50; ++i) CHECK(abs(s.nu[i + 20] - forward[i]) < Real("1e-35"));
  for (std::size_t i = 0; i < 20; ++i) CHECK((s.nu[i] >= 10 && s.nu[i] < 20));
  // running forward from the new first term lands on the old one
  const BalancedSequence again = balanced_sequence(exact(3), 2, Real(10), s.nu[0], 21);
  CHECK(abs(again.nu[20] - Real("12.5")) < Real("1e-35"));
}

TEST_CASE("commensurable growth gives a constant sequence") {
  const BalancedSequence s = balanced_sequence(exact(4), 2, Real(7), Real(7), 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(s.delta[i] == 2);
    CHECK(abs(s.nu[i] - 7) < Real("1e-40"));
  }
  const GrowthSequenceReport r = analyze_growth_sequence(s.delta, 2, Real(4), 10);
  CHECK(r.period == 1);
  CHECK(r.periodic_consistent);
  CHECK_FALSE(r.to_text().empty());
}

TEST_CASE("density realization") {
  PathCover pc;
  pc.paths = {{0, 1, 2, 3, 4, 5}};
  pc.origin = {0};
  const std::vector<Real> ones(6, Real(1));
  CHECK(realize_density(pc, ones, Real(3)) == std::vector<long>(6, 3));
  CHECK(realize_density(pc, ones, Real("2.5")) == std::vector<long>{2, 3, 2, 3, 2, 3});
  CHECK_THROWS_AS(realize_density(pc, ones, Real(1)), ConfigError);

  std::mt19937_64 rng(77);
  const int n = 10000;
  PathCover big;
  big.paths.push_back({});
  for (int i = 0; i < n; ++i) big.paths[0].push_back(i);
  big.origin = {n / 3};
  std::vector<Real> mu(static_cast<std::size_t>(n));
  for (auto& m : mu) m = 1 + static_cast<int>(rng() & 1);
  const Real nu("7.3");
  const auto pop = realize_density(big, mu, nu, Real("0.41"));
  for (long v : pop) CHECK((v == 0 || (v >= 7 && v <= 15)));
  std::vector<Real> mu_prefix(static_cast<std::size_t>(n + 1), 0);
  std::vector<long> pop_prefix(static_cast<std::size_t>(n + 1), 0);
  for (int i = 0; i < n; ++i) {
    mu_prefix[static_cast<std::size_t>(i + 1)] = mu_prefix[static_cast<std::size_t>(i)] + mu[static_cast<std::size_t>(i)];
    pop_prefix[static_cast<std::size_t>(i + 1)] = pop_prefix[static_cast<std::size_t>(i)] + pop[static_cast<std::size_t>(i)];
  }
  for (int t = 0; t < 1000; ++t) {
    int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a > b) std::swap(a, b);
    const Real err = Real(pop_prefix[static_cast<std::size_t>(b + 1)] - pop_prefix[static_cast<std::size_t>(a)]) -
                     nu * (mu_prefix[static_cast<std::size_t>(b + 1)] - mu_prefix[static_cast<std::size_t>(a)]);
    CHECK(abs(err) < 2);
  }
}

TEST_CASE("transport: tiny cases") {
  TransportProblem one;
  one.left_cap = {2};
  one.left_required = {1};
  one.right_cap = {1, 1};
  one.right_required = {1, 1};
  one.edges = {{0, 1}};
  const TransportResult r = solve_transport(one);
  CHECK(r.feasible);
  CHECK(support::flow_valid(one, r));

  TransportProblem short_by_one;
  short_by_one.left_cap = {3, 3};
  short_by_one.left_required = {1, 1};
  short_by_one.right_cap = {2, 3};
  short_by_one.right_required = {1, 1};
  short_by_one.edges = {{0, 1}, {0, 1}};
  const TransportResult s = solve_transport(short_by_one);
  CHECK_FALSE(s.feasible);
  CHECK(s.interior_imbalance == 1);
  CHECK(verify_certificate(short_by_one, s.certificate));
}

TEST_CASE("transport: synthetic feasible and deficient instances") {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 100; ++t) {
    TransportProblem p = support::feasible_instance(20, 20, rng);
    const TransportResult r = solve_transport(p);
    REQUIRE(r.feasible);
    CHECK(support::flow_valid(p, r));
    // inject a deficit on one left village
    p.left_cap[rng() % 20] += 1 + static_cast<long>(rng() % 3);
    const TransportResult bad = solve_transport(p);
    CHECK_FALSE(bad.feasible);
    CHECK(verify_certificate(p, bad.certificate));
  }
}

TEST_CASE("transport agrees with exhaustive Hall enumeration") {
  std::mt19937_64 rng(56);
  int feasible = 0;
  for (int t = 0; t < 200; ++t) {
    TransportProblem p = support::feasible_instance(3 + static_cast<int>(rng() % 10), 8, rng);
    // perturb: move one unit between right villages, which may break Hall
    const int a = static_cast<int>(rng() % 8), b = static_cast<int>(rng() % 8);
    if (p.right_cap[static_cast<std::size_t>(a)] > 0) {
      --p.right_cap[static_cast<std::size_t>(a)];
      ++p.right_cap[static_cast<std::size_t>(b)];
    }
    std::fill(p.right_required.begin(), p.right_required.end(), 1);
    const bool expect = support::hall_brute(p);
    const TransportResult r = solve_transport(p);
    CHECK(r.feasible == expect);
    if (r.feasible) {
      ++feasible;
      CHECK(support::flow_valid(p, r));
    } else {
      CHECK(verify_certificate(p, r.certificate));
    }
  }
  CHECK(feasible > 20);
  CHECK(feasible < 200);
}

TEST_CASE("growth sequence analysis") {
  const std::vector<int> two(20, 2);
  CHECK(analyze_growth_sequence(two, 2, Real(4), 5).period == 1);
  CHECK(analyze_growth_sequence(two, 2, Real(4), 5).periodic_consistent);
  // period 2 pattern claimed for lambda 3 contradicts log2 3 irrational
  std::vector<int> alt;
  for (int i = 0; i < 20; ++i) alt.push_back(1 + i % 2);
  const auto r = analyze_growth_sequence(alt, 2, Real(3), 5);
  CHECK(r.period == 2);
  CHECK_FALSE(r.periodic_consistent);
  CHECK_THROWS_AS(analyze_growth_sequence({}, 2, Real(3), 5), InputError);
}

TEST_CASE("genus-2 populated patch passes its rules") {
  const PopulatedPatch& pp = genus2_population();
  CHECK(pp.levels.size() >= 3);
  CHECK(pp.params.locality <= pp.params.L);
  CHECK(pp.params.A > (2 * pp.params.q + 2));
  CHECK_FALSE(pp.matching.empty());
  const auto v = populated_violations(pp);
  for (const auto& x : v) MESSAGE(x.kind << " " << x.cell << " " << x.detail);
  CHECK(v.empty());
  // population vanishes exactly off the mu support
  for (int c = 0; c < pp.base.num_cells(); ++c) {
    const int pop = pp.base.pop[static_cast<std::size_t>(c)];
    if (pop < 0) continue;
    CHECK(pop <= pp.params.N);
    CHECK((pop == 0) == (pp.mu[static_cast<std::size_t>(pp.base.state[static_cast<std::size_t>(c)])] == 0));
  }
}

TEST_CASE("populated patch mutations are caught") {
  const PopulatedPatch& base = genus2_population();
  {
    PopulatedPatch pp = base;
    // reassign the first child to a cell whose parent is beyond the locality
    MatchEntry& m = pp.matching.front();
    const int level = pp.base.h[static_cast<std::size_t>(m.u)];
    const DivergenceGraph* g = pp.graph_at(level - 1);
    REQUIRE(g);
    const auto hops = graph_distances(g->adj, g->index_of(m.v));
    int far = -1;
    for (int c = 0; c < pp.base.num_cells() && far < 0; ++c) {
      if (pp.base.h[static_cast<std::size_t>(c)] != level || pp.base.pop[static_cast<std::size_t>(c)] <= 0) continue;
      const int ip = g->index_of(pp.base.predecessor(c));
      if (ip >= 0 && hops[static_cast<std::size_t>(ip)] > pp.params.locality) far = c;
    }
    REQUIRE(far >= 0);
    m.u = far;
    m.l = 1;
    const auto v = populated_violations(pp);
    CHECK(has_kind(v, "match-locality"));
  }
  {
    PopulatedPatch pp = base;
    const DivergenceGraph& g = pp.graphs.front();
    int cell = -1;
    for (std::size_t i = 0; i < g.vertices.size() && cell < 0; ++i)
      if (g.interior[i] && !g.adj[i].empty()) cell = g.vertices[i];
    REQUIRE(cell >= 0);
    pp.base.pop_delta[static_cast<std::size_t>(cell)] += 1;
    CHECK(has_kind(populated_violations(pp), "delta-constancy"));
  }
}

TEST_CASE("descendants stay in the cone") {
  const PopulatedPatch& pp = genus2_population();
  const int lowest = pp.levels.front();
  int village = -1;
  for (int c = 0; c < pp.base.num_cells() && village < 0; ++c)
    if (pp.base.h[static_cast<std::size_t>(c)] == lowest && pp.base.pop[static_cast<std::size_t>(c)] > 0 && pp.parent_interior(c))
      village = c;
  REQUIRE(village >= 0);
  const DescendantReport r = check_descendant_cone(pp, village, 1, 2 * pp.params.L);
  CHECK(r.descendants > 0);
  CHECK(r.inside);
  CHECK(r.max_deviation <= 2 * pp.params.locality + 1);
}

TEST_CASE("populated patch file round trip") {
  const auto& g = support::genus2();
  const PopulatedPatch& pp = genus2_population();
  const std::string text = write_populated_patch(pp, g.oracle.presentation());
  PopulatedPatch back = read_populated_patch(text, g.oracle);
  attach_population_context(back, g.growth);
  CHECK(write_populated_patch(back, g.oracle.presentation()) == text);
  CHECK(populated_violations(back).empty());
}

TEST_CASE("patches without interior levels are a shelling-stage error") {
  const auto& g = support::genus2();
  try {
    build_populated_patch(g.oracle, g.fsa, g.growth, 2, 3, 2, Real(-1), 1, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.stage()) == "shelling");
  }
}

}  // TEST_SUITE
