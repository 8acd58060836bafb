#include <random>
#include <set>

#include "doctest.h"
#include "hypsft/errors.hpp"
#include "hypsft/sft.hpp"
#include "support.hpp"

using namespace hypsft;

namespace {

PatternRuleSet golden_mean(const Presentation& p) {
  return PatternRuleSet::parse("alphabet: 0 1\nwindow: 1\nforbid:\n  1 = 1\n  t = 1\n", p);
}

Configuration on_powers(const BallTable& d, const Presentation& p, const std::string& bits) {
  Configuration c(static_cast<std::size_t>(d.size()), -1);
  Word w;
  for (char b : bits) {
    c[static_cast<std::size_t>(d.find_shortlex(w))] = b - '0';
    w.push_back(p.parse_word("t")[0]);
  }
  return c;
}

}  // namespace

TEST_SUITE("sft") {

TEST_CASE("golden mean shift on the integers") {
  const GroupOracle z(presentations::integers());
  const Presentation& p = z.presentation();
  const BallTable d = z.build_ball(6);
  const PatternRuleSet rules = golden_mean(p);
  CHECK_FALSE(rules.allow);
  CHECK(rules.offsets.size() == 2);
  CHECK(check_pattern_rules(on_powers(d, p, "0101"), rules, d).empty());
  const auto v = check_pattern_rules(on_powers(d, p, "0110"), rules, d);
  REQUIRE(v.size() == 1);
  CHECK(v[0].cell == d.find_shortlex(p.parse_word("t")));
  CHECK(PatternRuleSet::parse(rules.to_text(p), p).patterns == rules.patterns);
}

TEST_CASE("rule set parse errors") {
  const Presentation p = presentations::integers();
  CHECK_THROWS_AS(PatternRuleSet::parse("window: 1\nforbid:\n 1 = 0\n", p), InputError);
  CHECK_THROWS_AS(PatternRuleSet::parse("alphabet: 0\nwindow: 1\nforbid:\n aa = 0\n", p), InputError);
  CHECK_THROWS_AS(PatternRuleSet::parse("alphabet: 0\nwindow: 1\nforbid:\n 1 = 0\nallow:\n 1 = 0\n", p), InputError);
  CHECK_THROWS_AS(PatternRuleSet::parse("alphabet: 0\nwindow: 1\nforbid:\n 1 = 7\n", p), InputError);
}

TEST_CASE("distance colourings") {
  struct Case {
    const GroupOracle* oracle;
    int N, radius;
  };
  const GroupOracle z(presentations::integers());
  const std::vector<Case> cases{{&z, 1, 6}, {&z, 2, 6}, {&support::free2().oracle, 1, 4},
                                {&support::free2().oracle, 2, 4}, {&support::genus2().oracle, 1, 4},
                                {&support::genus2().oracle, 2, 4}};
  for (const auto& c : cases) {
    const TorsionColoring tc = torsion_coloring(*c.oracle, c.N, c.radius);
    CHECK(tc.num_colors <= c.oracle->build_ball(c.N).size());
    CHECK(coloring_conflicts(*c.oracle, tc) == 0);
    CHECK(support::brute_conflicts(*c.oracle, tc) == 0);
    const PatternRuleSet rules = coloring_rule_set(*c.oracle, c.N, tc.num_colors);
    CHECK(check_pattern_rules(tc.color, rules, tc.domain).empty());
  }
  const TorsionColoring zc = torsion_coloring(z, 1, 6);
  CHECK(zc.num_colors == 2);
  CHECK_THROWS_AS(torsion_coloring(z, 0, 4), ConfigError);
}

TEST_CASE("a recoloured cell is flagged") {
  const GroupOracle& o = support::free2().oracle;
  TorsionColoring tc = torsion_coloring(o, 1, 4);
  const PatternRuleSet rules = coloring_rule_set(o, 1, tc.num_colors);
  const int cell = tc.domain.find_shortlex(o.presentation().parse_word("a b"));
  tc.color[static_cast<std::size_t>(cell)] = tc.color[static_cast<std::size_t>(tc.domain.parent(cell))];
  CHECK(coloring_conflicts(o, tc) > 0);
  CHECK(support::brute_conflicts(o, tc) == coloring_conflicts(o, tc));
  CHECK_FALSE(check_pattern_rules(tc.color, rules, tc.domain).empty());
}

TEST_CASE("products pass exactly when both factors pass") {
  const auto& g = support::genus2();
  const BallTable d = g.oracle.build_ball(4);
  const PatternRuleSet r1 = shelling_rule_set(g.oracle, g.fsa, 2);
  const TorsionColoring tc = torsion_coloring(g.oracle, 1, 4);
  const PatternRuleSet r2 = coloring_rule_set(g.oracle, 1, tc.num_colors);
  std::mt19937_64 rng(40);
  for (int t = 0; t < 50; ++t) {
    const ShellingPatch p = generate_shelling_patch(g.oracle, g.fsa, 4, 5 + t % 4, 2, rng);
    Configuration c1 = shelling_config(p, r1);
    Configuration c2 = tc.color;
    const bool break1 = rng() & 1, break2 = rng() & 1;
    if (break1) {
      const int x = static_cast<int>(rng() % static_cast<unsigned>(d.size_upto(2)));
      c1[static_cast<std::size_t>(x)] = (c1[static_cast<std::size_t>(x)] + 1 + static_cast<int>(rng() % 5)) %
                                        static_cast<int>(r1.alphabet.size());
    }
    if (break2) {
      const int x = 1 + static_cast<int>(rng() % static_cast<unsigned>(d.size_upto(3) - 1));
      c2[static_cast<std::size_t>(x)] = c2[static_cast<std::size_t>(d.parent(x))];
    }
    const bool ok1 = check_pattern_rules(c1, r1, d).empty();
    const bool ok2 = check_pattern_rules(c2, r2, d).empty();
    CHECK(ok1 == !break1);
    CHECK(ok2 == !break2);
    const auto v = check_product_rules(product_config(c1, c2), r1, r2, d);
    CHECK(v.empty() == (ok1 && ok2));
    for (const auto& x : v) CHECK((x.kind.rfind("first/", 0) == 0 || x.kind.rfind("second/", 0) == 0));
  }
  CHECK_THROWS_AS(product_config(Configuration(3), Configuration(4)), InputError);
}

TEST_CASE("shelling rule set agrees with the dictionary checker") {
  const auto& g = support::genus2();
  const RuleDictionary& dict = support::genus2_dictionary();
  const PatternRuleSet rules = shelling_rule_set(g.oracle, g.fsa, 2);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 6; ++t) {
    ShellingPatch p = generate_shelling_patch(g.oracle, g.fsa, 4, 6 + t, 2, rng);
    CHECK(check_pattern_rules(shelling_config(p, rules), rules, p.domain).empty());
    CHECK(check_shortlex_local_rules(p, g.fsa, dict).empty());
    const int x = static_cast<int>(rng() % static_cast<unsigned>(p.domain.size_upto(2)));
    int q = static_cast<int>(rng() % 36);
    while (q == p.state[static_cast<std::size_t>(x)]) q = static_cast<int>(rng() % 36);
    p.state[static_cast<std::size_t>(x)] = q;
    CHECK_FALSE(check_pattern_rules(shelling_config(p, rules), rules, p.domain).empty());
    CHECK_FALSE(check_shortlex_local_rules(p, g.fsa, dict).empty());
  }
}

}  // TEST_SUITE
