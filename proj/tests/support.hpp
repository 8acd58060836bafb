#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "hypsft/growth.hpp"
#include "hypsft/oracle.hpp"
#include "hypsft/population.hpp"
#include "hypsft/sft.hpp"
#include "hypsft/shelling.hpp"

namespace support {

using namespace hypsft;

// One oracle, automaton and growth analysis per group and process.
struct Group {
  GroupOracle oracle;
  ShortlexFsa fsa;
  GrowthData growth;
  explicit Group(Presentation p) : oracle(std::move(p)), fsa(build_shortlex_fsa(oracle, 0, 6)), growth(analyze_growth(fsa)) {}
};

inline const Group& genus2() {
  static const Group g(presentations::surface_group(2));
  return g;
}
inline const Group& free2() {
  static const Group g(presentations::free_group(2));
  return g;
}

// Exact dictionary for rule windows of radius 2 with delta 2.
inline const RuleDictionary& genus2_dictionary() {
  static const RuleDictionary d = build_exact_rule_dictionary(genus2().oracle, genus2().fsa, 2, 2);
  return d;
}

inline Word random_word(int ngen, int len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, ngen - 1);
  Word w;
  for (int i = 0; i < len; ++i) w.push_back(pick(rng));
  return w;
}

// Cannon's rational growth series for the genus-g surface group with the
// standard 4g generators; coefficients by the recurrence of its denominator.
inline std::vector<long> surface_sphere_sizes(int genus, int n) {
  const int g2 = 2 * genus;
  std::vector<long> num(static_cast<std::size_t>(g2 + 1), 2), den(static_cast<std::size_t>(g2 + 1), -(2 * g2 - 2));
  num[0] = num[static_cast<std::size_t>(g2)] = 1;
  den[0] = den[static_cast<std::size_t>(g2)] = 1;
  std::vector<long> a;
  for (int k = 0; k <= n; ++k) {
    long v = k <= g2 ? num[static_cast<std::size_t>(k)] : 0;
    for (int i = 1; i <= std::min(k, g2); ++i) v -= den[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(k - i)];
    a.push_back(v);
  }
  return a;
}

inline ShortlexFsa make_fsa(int states, int ngen, std::vector<std::tuple<int, int, int>> edges) {
  std::vector<int> t(static_cast<std::size_t>(states * ngen), -1);
  for (auto [q, s, r] : edges) t[static_cast<std::size_t>(q * ngen + s)] = r;
  return ShortlexFsa(states, ngen, 0, t);
}

// Hand-built automata whose start leads through non-big cycles into the big
// block, so mu on max states comes from the geometric-series step.
inline std::vector<ShortlexFsa> synthetic_fsas() {
  return {
      // max chain 0 -> 1 (loop) -> big 2 (two loops) -> min 3
      make_fsa(4, 3, {{0, 0, 1}, {0, 1, 2}, {1, 0, 1}, {1, 1, 2}, {2, 0, 2}, {2, 1, 2}, {2, 2, 3}}),
      // big block [[1,1],[1,2]] on {3,4}; max state 1 carries two loops; 2 is min
      make_fsa(5, 3, {{0, 0, 1}, {0, 1, 4}, {1, 0, 1}, {1, 1, 1}, {1, 2, 3}, {3, 0, 3}, {3, 1, 4},
                      {3, 2, 2}, {4, 0, 3}, {4, 1, 4}, {4, 2, 4}, {2, 0, 2}}),
      // max 2-cycle {1,2} feeding a big state with three loops
      make_fsa(4, 3, {{0, 0, 1}, {0, 1, 3}, {1, 0, 2}, {1, 2, 3}, {2, 0, 1}, {2, 1, 3}, {3, 0, 3}, {3, 1, 3}, {3, 2, 3}}),
  };
}

// Word distance between every pair of cells, by breadth-first search in the
// Cayley graph restricted to a larger ball.
inline long brute_conflicts(const GroupOracle& o, const TorsionColoring& tc) {
  const BallTable big = o.build_ball(tc.domain.radius() + tc.N);
  long bad = 0;
  for (int g = 0; g < tc.domain.size(); ++g) {
    const int start = big.find_shortlex(tc.domain.word(g));
    const auto dist = domain_distances(big, start, tc.N);
    for (int y = 0; y < big.size(); ++y) {
      if (dist[static_cast<std::size_t>(y)] <= 0) continue;
      const int other = tc.domain.find_shortlex(big.word(y));
      if (other > g && tc.color[static_cast<std::size_t>(other)] == tc.color[static_cast<std::size_t>(g)]) ++bad;
    }
  }
  return bad;
}

// Feasible instance: random flow on random edges, capacities read off the flow.
inline TransportProblem feasible_instance(int n, int m, std::mt19937_64& rng) {
  TransportProblem p;
  p.left_cap.assign(static_cast<std::size_t>(n), 0);
  p.right_cap.assign(static_cast<std::size_t>(m), 0);
  p.left_required.assign(static_cast<std::size_t>(n), 1);
  p.right_required.assign(static_cast<std::size_t>(m), 1);
  p.edges.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    std::set<int> e;
    const int k = 1 + static_cast<int>(rng() % 3);
    while (static_cast<int>(e.size()) < k) e.insert(static_cast<int>(rng() % m));
    for (int j : e) {
      const long a = 1 + static_cast<long>(rng() % 4);
      p.left_cap[static_cast<std::size_t>(i)] += a;
      p.right_cap[static_cast<std::size_t>(j)] += a;
    }
    p.edges[static_cast<std::size_t>(i)].assign(e.begin(), e.end());
  }
  for (int j = 0; j < m; ++j)
    if (p.right_cap[static_cast<std::size_t>(j)] == 0) p.right_required[static_cast<std::size_t>(j)] = 0;
  return p;
}

inline bool flow_valid(const TransportProblem& p, const TransportResult& r) {
  std::vector<long> in(p.right_cap.size(), 0);
  for (std::size_t i = 0; i < p.left_cap.size(); ++i) {
    long out = 0;
    for (auto [j, a] : r.flow[i]) {
      const auto& e = p.edges[i];
      if (a <= 0 || !std::binary_search(e.begin(), e.end(), j)) return false;
      out += a;
      in[static_cast<std::size_t>(j)] += a;
    }
    if (out > p.left_cap[i] || (p.left_required[i] && out != p.left_cap[i])) return false;
  }
  for (std::size_t j = 0; j < p.right_cap.size(); ++j)
    if (in[j] > p.right_cap[j] || (p.right_required[j] && in[j] != p.right_cap[j])) return false;
  return true;
}

// Exhaustive Hall test for an all-required problem with equal totals.
inline bool hall_brute(const TransportProblem& p) {
  const long lt = std::accumulate(p.left_cap.begin(), p.left_cap.end(), 0L);
  const long rt = std::accumulate(p.right_cap.begin(), p.right_cap.end(), 0L);
  if (lt != rt) return false;
  const int n = static_cast<int>(p.left_cap.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    long demand = 0;
    std::set<int> nb;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) {
        demand += p.left_cap[static_cast<std::size_t>(i)];
        nb.insert(p.edges[static_cast<std::size_t>(i)].begin(), p.edges[static_cast<std::size_t>(i)].end());
      }
    long supply = 0;
    for (int j : nb) supply += p.right_cap[static_cast<std::size_t>(j)];
    if (demand > supply) return false;
  }
  return true;
}

}  // namespace support
