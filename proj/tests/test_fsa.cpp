#include <random>

#include "doctest.h"
#include "hypsft/errors.hpp"
#include "support.hpp"

using namespace hypsft;

TEST_SUITE("fsa") {

TEST_CASE("minimal automata of free groups") {
  const GroupOracle z(presentations::integers());
  CHECK(build_shortlex_fsa(z, 0, 6).num_states() == 3);
  const auto& f2 = support::free2().fsa;
  CHECK(f2.num_states() == 5);
  CHECK(f2.is_pruned());
  // start plus one state per last letter, each forbidding its inverse
  CHECK(f2.num_transitions() == 4 + 4 * 3);
}

TEST_CASE("free group path counts match the ball to radius 10") {
  const auto& g = support::free2();
  const BallTable b = g.oracle.build_ball(10);
  const auto counts = sphere_counts(g.fsa, 10);
  std::uint64_t expect = 4;
  for (int n = 1; n <= 10; ++n, expect *= 3) {
    CHECK(counts[static_cast<std::size_t>(n)] == expect);
    CHECK(static_cast<long>(counts[static_cast<std::size_t>(n)]) == b.sphere_sizes()[static_cast<std::size_t>(n)]);
  }
}

TEST_CASE("genus-2 automaton validates against breadth-first search") {
  const auto& g = support::genus2();
  CHECK(g.fsa.num_states() == 36);
  const FsaValidationReport r = validate_fsa(g.fsa, g.oracle, 6);
  CHECK(r.ok());
  const auto expect = support::surface_sphere_sizes(2, 14);
  for (int n = 0; n <= 14; ++n) CHECK(sphere_count(g.fsa, n) == static_cast<std::uint64_t>(expect[static_cast<std::size_t>(n)]));
}

TEST_CASE("cone-type construction agrees on the language") {
  const auto& g = support::free2();
  const ShortlexFsa cones = build_shortlex_fsa(g.oracle.build_ball(6), 2);
  CHECK(cones.num_states() == g.fsa.num_states());
  CHECK(sphere_counts(cones, 12) == sphere_counts(g.fsa, 12));
  // genus-2 cone types need more than a radius-6 ball to settle
  CHECK_THROWS_AS(build_shortlex_fsa(support::genus2().oracle.build_ball(6), 2), ConstructionIncomplete);
}

TEST_CASE("automaton text round trip") {
  const auto& g = support::genus2();
  const Presentation& p = g.oracle.presentation();
  const ShortlexFsa back = ShortlexFsa::parse(g.fsa.to_text(p), p);
  CHECK(back == g.fsa);
  CHECK_THROWS_AS(ShortlexFsa::parse("states: 2\nstart: 5\n", p), InputError);
  CHECK_THROWS_AS(ShortlexFsa::parse("states: 1\nstart: 0\ntrans: 0 z 0\n", p), InputError);
}

TEST_CASE("a removed transition is caught by validation") {
  const auto& g = support::genus2();
  // shortest accepted word reaching each state
  std::vector<int> depth(static_cast<std::size_t>(g.fsa.num_states()), -1);
  std::vector<int> queue{g.fsa.start()};
  depth[static_cast<std::size_t>(g.fsa.start())] = 0;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (Letter s = 0; s < 8; ++s)
      if (int r = g.fsa.next(queue[i], s); r >= 0 && depth[static_cast<std::size_t>(r)] < 0) {
        depth[static_cast<std::size_t>(r)] = depth[static_cast<std::size_t>(queue[i])] + 1;
        queue.push_back(r);
      }
  int caught = 0, tried = 0;
  for (int q = 0; q < g.fsa.num_states(); q += 5)
    for (Letter s = 0; s < 8; ++s) {
      if (g.fsa.next(q, s) < 0 || depth[static_cast<std::size_t>(q)] + 1 > 5) continue;
      ++tried;
      const ShortlexFsa broken = g.fsa.without_transition(q, s);
      if (!validate_fsa(broken, g.oracle, 5).ok()) ++caught;
    }
  CHECK(tried > 10);
  CHECK(caught == tried);
}

TEST_CASE("normal forms through the automaton") {
  const auto& g = support::genus2();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const Word w = support::random_word(8, 20, rng);
    const Word nf = normal_form(g.fsa, g.oracle, w);
    CHECK(g.fsa.accepts(nf));
    CHECK(nf == g.oracle.normal_form(w));
  }
}

}  // TEST_SUITE
