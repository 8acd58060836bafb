#pragma once

#include <string>
#include <vector>

#include "hypsft/shelling.hpp"

namespace hypsft {

/// Symbol per domain cell (index into an alphabet), -1 where undefined.
using Configuration = std::vector<int>;

/// Local rules over a window B(r): a list of patterns on shared offsets,
/// read either as the allowed or as the forbidden patterns.
struct PatternRuleSet {
  std::vector<std::string> alphabet;
  int window = 0;
  bool allow = true;
  std::vector<Word> offsets;                // each of length <= window
  std::vector<std::vector<int>> patterns;   // symbol per offset, -1 = any

  int symbol(const std::string& name) const;  // -1 if unknown
  int offset_index(const Word& w) const;      // -1 if absent
  std::string to_text(const Presentation& p) const;
  /// `alphabet: ...`, `window: r`, then `allow:` or `forbid:` blocks of
  /// `<offset word> = <symbol>` lines.
  static PatternRuleSet parse(const std::string& text, const Presentation& p);
  static PatternRuleSet from_file(const std::string& path, const Presentation& p);
};

/// Cells whose window lies in the domain with every symbol defined are
/// checked; others are skipped.
std::vector<Violation> check_pattern_rules(const Configuration& config, const PatternRuleSet& rules,
                                           const BallTable& domain);

/// Model shelling as a rule set on symbols (state, h mod (4 rho + 3)): every
/// model window (see enumerate_model_windows) at every shift.
PatternRuleSet shelling_rule_set(const GroupOracle& oracle, const ShortlexFsa& fsa, int rho);
Configuration shelling_config(const ShellingPatch& patch, const PatternRuleSet& rules);

struct TorsionColoring {
  int N = 1;
  int num_colors = 0;
  BallTable domain;           // B(radius)
  std::vector<int> color;     // per domain cell
};

/// Greedy proper distance-N colouring in shortlex order; distances come from
/// the ball B(radius + N), so pairs near the rim are respected too.
TorsionColoring torsion_coloring(const GroupOracle& oracle, int N, int radius);
/// Pairs at distance 1..N with equal colours, found by walking B(radius + N).
long coloring_conflicts(const GroupOracle& oracle, const TorsionColoring& coloring);
/// Forbids equal colours at distance 1..N.
PatternRuleSet coloring_rule_set(const GroupOracle& oracle, int N, int num_colors);

struct ProductConfig {
  Configuration first, second;
};

ProductConfig product_config(const Configuration& c1, const Configuration& c2);
/// Violations of either factor, kinds prefixed with "first/" or "second/".
std::vector<Violation> check_product_rules(const ProductConfig& config, const PatternRuleSet& r1,
                                           const PatternRuleSet& r2, const BallTable& domain);

}  // namespace hypsft
