#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hypsft/ball.hpp"
#include "hypsft/fsa.hpp"
#include "hypsft/oracle.hpp"

namespace hypsft {

/// Predecessor markers besides ordinary generators.
constexpr Letter kBoundary = -1;  // P(g) lies outside the domain
constexpr Letter kSelf = -2;      // P(g) = g (the identity of the model shelling)
constexpr int kUndefined = 127;   // dh entry whose far end is off-domain

/// Finite piece of a shelling on the ball B(radius) of offsets around a
/// center.  h is stored relative to h(center) = 0.
struct ShellingPatch {
  std::uint64_t presentation_hash = 0;
  int delta = 0;
  int radius = 0;
  Word basepoint;  // g0 (empty for the model shelling)
  BallTable domain;
  std::vector<int> h;
  std::vector<int> state;
  std::vector<Letter> dP;
  std::vector<int> pop;        // -1: absent
  std::vector<int> pop_delta;  // -1: absent

  int num_cells() const { return domain.size(); }
  /// Cell of P(g), or -1 for boundary markers.
  int predecessor(int cell) const;
  /// Cells whose rule window B(max(1, 2 delta), g) lies inside the domain.
  bool is_interior(int cell) const;
};

int rule_radius(int delta);

struct LocalData {
  int num_generators = 0;
  std::vector<int> dh;  // cell * ngen + s; kUndefined off-domain
  std::vector<int> state;
  std::vector<Letter> dP;

  int derivative(int cell, Letter s) const {
    return dh[static_cast<std::size_t>(cell) * static_cast<std::size_t>(num_generators) + static_cast<std::size_t>(s)];
  }
};

struct Violation {
  std::string kind;
  int cell = -1;
  std::string detail;
};

ShellingPatch model_shelling(const GroupOracle& oracle, const ShortlexFsa& fsa, int radius, int delta);

/// Translate of the model shelling's local data by g0 = basepoint, restricted
/// to B(R) and re-based so that h(center) = 0.
ShellingPatch generate_shelling_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, int R,
                                      const Word& basepoint, int delta);
/// Same with a uniformly random shortlex basepoint of length D.
ShellingPatch generate_shelling_patch(const GroupOracle& oracle, const ShortlexFsa& fsa, int R, int D,
                                      int delta, std::mt19937_64& rng);
Word random_shortlex_word(const ShortlexFsa& fsa, int length, std::mt19937_64& rng);

LocalData local_data(const ShellingPatch& patch);
/// Sum of dh along consecutive path cells; InputError if two consecutive
/// cells are not adjacent or dh is undefined there.
long integrate_derivative(const LocalData& data, const BallTable& domain, const std::vector<int>& path);
/// Heights recovered from dh by integrating along the shortlex tree.
std::vector<int> integrate(const LocalData& data, const BallTable& domain);

std::vector<Violation> check_preshelling(const ShellingPatch& patch, const Presentation& p);
std::vector<Violation> check_preshelling(const LocalData& data, const BallTable& domain, const Presentation& p);

/// Allowed window patterns of the model shelling, gathered from translates
/// g0 with |g0| in (rho, scan_radius].  rho < 0 means rule_radius(delta).
struct RuleDictionary {
  int delta = 0;
  int rho = 1;
  int scan_radius = 0;  // -1 for the exact dictionary
  std::unordered_set<std::string> patterns;
  std::vector<std::size_t> growth;  // pattern count after scanning each radius
  bool exact() const { return scan_radius < 0; }
  bool saturated() const {
    return exact() || (growth.size() >= 2 && growth.back() == growth[growth.size() - 2]);
  }
};

RuleDictionary build_rule_dictionary(const GroupOracle& oracle, const ShortlexFsa& fsa, int delta,
                                     int scan_radius, int rho = -1);

/// The model shelling seen from g0 through the window B(rho): per window
/// offset x, the automaton state and last letter of the shortlex form of
/// g0 x, and |g0 x| - |g0|.
struct ModelWindow {
  std::vector<int> state;
  std::vector<int> offset;
  std::vector<Letter> last;  // -1 for the empty word
};

/// Every window of the model shelling at |g0| > rho, enumerated without a
/// radius cut-off: shortlex forms of g0 and g0 x are read in parallel through
/// the automaton and the oracle's word differences, and a subset construction
/// over the pending forms of g0 x runs to its fixed point.  Throws
/// ResourceError past `max_states` subset states.
std::vector<ModelWindow> enumerate_model_windows(const GroupOracle& oracle, const ShortlexFsa& fsa, int rho,
                                                 std::size_t max_states = 2'000'000);
/// Dictionary of all model windows (scan_radius = -1).
RuleDictionary build_exact_rule_dictionary(const GroupOracle& oracle, const ShortlexFsa& fsa, int delta,
                                           int rho = -1);
/// Encoded local data on the window B(rho, cell); the cell must be interior.
std::string window_pattern(const ShellingPatch& patch, const BallTable& window, int cell);

/// Transition consistency everywhere plus dictionary membership on cells
/// whose rho-window lies inside the domain.  ConfigError if the dictionary
/// was built for another delta.
std::vector<Violation> check_shortlex_local_rules(const ShellingPatch& patch, const ShortlexFsa& fsa,
                                                  const RuleDictionary& dictionary);

std::vector<std::pair<int, std::vector<int>>> horospheres(const ShellingPatch& patch);

struct DipCounterexample {
  int g1, g2, distance, witness, witness_h;
};
struct DipReport {
  int pairs_checked = 0;
  int pairs_vacuous = 0;
  std::vector<DipCounterexample> counterexamples;
};
/// For each same-level pair with d(g1, g2) > 2x + 2 delta and all geodesics
/// inside the domain, every geodesic must satisfy h(gamma(x)) <= h(g1) - (x - 2 delta).
DipReport check_dip(const ShellingPatch& patch, const GroupOracle& oracle,
                    const std::vector<std::pair<int, int>>& pairs, int x);

/// Breadth-first distances inside the domain graph (-1 unreachable).
std::vector<int> domain_distances(const BallTable& domain, int from, int limit = -1);

std::string write_patch(const ShellingPatch& patch, const Presentation& p);
ShellingPatch read_patch(const std::string& text, const GroupOracle& oracle);

}  // namespace hypsft
