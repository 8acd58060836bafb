#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypsft/divergence.hpp"
#include "hypsft/growth.hpp"

namespace hypsft {

/// Disjoint paths through a graph covering its vertices.  Consecutive entries
/// are at most `defect` hops apart.
struct PathCover {
  std::vector<std::vector<int>> paths;
  std::vector<int> origin;  // per path: position of its least vertex (index 0)
  int defect = 0;
  std::vector<std::string> warnings;
};

/// Greedy cover: start at the least uncovered vertex and keep jumping to the
/// nearest uncovered vertex within L hops (ties to the smaller index).
PathCover path_cover(const std::vector<std::vector<int>>& adj, int L);
PathCover path_cover(const DivergenceGraph& graph, int L);
/// Hop distances from `from`, -1 beyond `limit` hops (limit < 0: unbounded).
std::vector<int> graph_distances(const std::vector<std::vector<int>>& adj, int from, int limit = -1);

struct BalancedSequence {
  int q = 2;
  Real A;
  std::vector<Real> nu;
  std::vector<int> delta;
  int floor_log = 0;  // floor(log_q lambda)
  Real threshold;     // (lambda / q^floor_log) A
};

/// nu_{i+1} = q^Delta_i / lambda nu_i with Delta_i = ceil(log_q lambda) below
/// the threshold and floor(log_q lambda) from it on.  Classification uses the
/// whole lambda interval; an undecidable comparison throws PrecisionError.
BalancedSequence balanced_sequence(const LambdaInterval& lambda, int q, const Real& A, const Real& nu0,
                                   std::size_t length);
/// Prepends `count` terms by inverting the recurrence.
void extend_backward(BalancedSequence& seq, const LambdaInterval& lambda, std::size_t count);

/// Telescoping floors along each path from its index-0 vertex:
/// pop_k = floor(star + nu S(k)) - floor(star + nu S(k-1)) with S the signed
/// running sum of mu.  Vertices off the cover get 0.
std::vector<long> realize_density(const PathCover& cover, const std::vector<Real>& mu, const Real& nu,
                                  const Real& star = Real(0));

/// Transport between two levels of villages.  Left village i offers
/// left_cap[i] child slots, right village j holds right_cap[j] people.
/// Required villages must be used to capacity, optional ones at most.
struct TransportProblem {
  std::vector<long> left_cap, right_cap;
  std::vector<char> left_required, right_required;
  std::vector<std::vector<int>> edges;  // left -> right villages
};

/// A set of required villages on one side whose demand exceeds the total
/// capacity of their neighbours.
struct HallCertificate {
  bool left_side = true;
  std::vector<int> villages;
  long demand = 0, supply = 0;
};

struct TransportResult {
  bool feasible = false;
  std::vector<std::vector<std::pair<int, long>>> flow;  // per left village: (right village, amount)
  HallCertificate certificate;
  long interior_imbalance = 0;  // required left capacity minus required right capacity
};

TransportResult solve_transport(const TransportProblem& problem);
/// Recomputes demand and supply of a certificate from the problem.
bool verify_certificate(const TransportProblem& problem, const HallCertificate& cert);

struct MatchEntry {
  int v = 0, j = 0, k = 0;  // parent cell, person (1-based), child slot (1-based)
  int u = 0, l = 0;         // child cell, person (1-based)
};

struct PopulationParams {
  int q = 2;
  Real A;
  long N = 0;
  int L = 0;         // locality bound for children, in divergence-graph hops
  int locality = 0;  // hops the matching actually needed
  int depth = 1;     // divergence depth of the level graphs
  int floor_log = 0;  // floor(log_q lambda); Delta takes this value or the next
  Real star;
};

struct PopulatedPatch {
  ShellingPatch base;  // pop and pop_delta filled on populated levels
  std::vector<Real> mu;  // per automaton state
  PopulationParams params;
  std::vector<int> levels;  // ascending; the last one only receives children
  std::map<int, int> delta_per_level;
  std::map<int, Real> nu_per_level;
  std::vector<MatchEntry> matching;
  std::vector<DivergenceGraph> graphs;  // one per entry of levels
  std::vector<std::string> warnings;

  const DivergenceGraph* graph_at(int level) const;
  /// Left villages whose children must all be placed: interior vertices of a
  /// level that has a populated level above it.
  bool parent_interior(int cell) const;
};

/// Generation problem between level n and n + 1 with children allowed at
/// P(u) within `hops` of v.
TransportProblem generation_problem(const PopulatedPatch& pp, std::size_t level_index, int hops,
                                    std::vector<int>* left_cells = nullptr, std::vector<int>* right_cells = nullptr);
/// Slot-level matching for one generation, or throws with the Hall
/// certificate in the message when the interior cannot be matched within L.
std::vector<MatchEntry> match_generations(const PopulatedPatch& pp, std::size_t level_index, int* hops_used = nullptr);

/// Everything after shelling: graphs, covers, balanced sequence anchored at
/// the lowest populated level, populations and matchings.
PopulatedPatch populate_patch(const ShellingPatch& patch, const GrowthData& growth, int q, const Real& nu0,
                              int depth = 1, const Real& A = Real(-1));
/// Generates the shelling patch first (random basepoint of length D).  delta < 0
/// uses the oracle's estimate at radius 4.
PopulatedPatch build_populated_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, const GrowthData& growth,
                                     int R, int D, int q, const Real& nu0, std::uint64_t seed = 1, int delta = -1);
/// Rebuilds level graphs and per-level tables from pop/delta fields (after reading a file).
void attach_population_context(PopulatedPatch& pp, const GrowthData& growth);

/// Population clauses on every populated cell, matching clauses on interior
/// villages, and the shelling rules when an automaton is given.
std::vector<Violation> check_populated_rules(const PopulatedPatch& pp, const Presentation& p,
                                             const ShortlexFsa* fsa = nullptr,
                                             const RuleDictionary* dictionary = nullptr);

struct GrowthSequenceReport {
  int period = 0;  // smallest period found, 0 for none
  double mean_delta = 0;
  double mean_log_deviation = 0;  // |mean(Delta) log q - log lambda| over the whole window
  double max_tail_deviation = 0;  // max over prefixes of the second half
  bool periodic_consistent = true;  // a found period forces log_q lambda = sum / period
  std::string to_text() const;
};

GrowthSequenceReport analyze_growth_sequence(const std::vector<int>& delta, int q, const Real& lambda, int max_period);

struct DescendantReport {
  int village = -1, depth = 0;
  int descendants = 0;
  int max_deviation = 0;   // word distance from the fibre P^-n of the village
  int cone_radius = 0;     // configured 2 R
  bool inside = true;
};

/// Follows the matching n generations up from the people of v.
DescendantReport check_descendant_cone(const PopulatedPatch& pp, int village, int n, int cone_radius);

std::string write_populated_patch(const PopulatedPatch& pp, const Presentation& p);
PopulatedPatch read_populated_patch(const std::string& text, const GroupOracle& oracle);

}  // namespace hypsft
