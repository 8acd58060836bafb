#include <random>

#include "doctest.h"
#include "hypsft/errors.hpp"
#include "support.hpp"

using namespace hypsft;

TEST_SUITE("group") {

TEST_CASE("presentation text round trip") {
  const Presentation p = presentations::surface_group(2);
  const Presentation q = Presentation::parse(p.to_text());
  CHECK(q.to_text() == p.to_text());
  CHECK(q.hash() == p.hash());
  CHECK(p.num_generators() == 8);
  CHECK(p.max_relator_length() == 8);
  CHECK(p.format_word({}) == "1");
  CHECK(p.parse_word("1").empty());
  const Word w = p.parse_word("a b A");
  CHECK(p.format_word(w) == "a b A");
  CHECK(p.free_reduce(p.parse_word("a A b")) == p.parse_word("b"));
  CHECK(p.invert(w) == p.parse_word("a B A"));
}

TEST_CASE("malformed presentations are rejected") {
  CHECK_THROWS_AS(Presentation::parse("generators: a\n"), InputError);
  CHECK_THROWS_AS(Presentation::parse("generators: a A\nrelator: a b\n"), InputError);
  CHECK_THROWS_AS(presentations::free_group(2).parse_word("a x"), InputError);
}

TEST_CASE("small cancellation of the standard surface relator") {
  for (int g = 2; g <= 3; ++g) {
    const DehnReducer d(presentations::surface_group(g));
    const PieceReport r = d.piece_report();
    CHECK(r.small_cancellation);
    CHECK(r.max_piece == 1);
    CHECK(r.shortest_relator == 4 * g);
  }
  // Z^2 = <a, b | [a, b]> has pieces of length 1 in a relator of length 4
  const Presentation z2 = Presentation::parse("generators: a A b B\nrelator: a b A B\n");
  CHECK_FALSE(DehnReducer(z2).piece_report().small_cancellation);
  CHECK_THROWS_AS(GroupOracle{z2}, ConfigError);
}

TEST_CASE("Dehn reduction decides the word problem on products with inverses") {
  const Presentation p = presentations::surface_group(2);
  const DehnReducer d(p);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Word u = support::random_word(8, 1 + t % 13, rng);
    Word w = u;
    const Word inv = p.invert(u);
    w.insert(w.end(), inv.begin(), inv.end());
    CHECK(d.is_identity(w));
    CHECK(d.reduce(u).size() <= u.size());
  }
  CHECK(d.is_identity(p.relators()[0]));
  CHECK_FALSE(d.is_identity(p.parse_word("a b")));
}

TEST_CASE("free group spheres have 4 3^(n-1) elements") {
  const GroupOracle o(presentations::free_group(2));
  const BallTable b = o.build_ball(7);
  long expect = 4;
  for (int n = 1; n <= 7; ++n, expect *= 3) CHECK(b.sphere_sizes()[static_cast<std::size_t>(n)] == expect);
  const GroupOracle z(presentations::integers());
  const BallTable bz = z.build_ball(9);
  for (int n = 1; n <= 9; ++n) CHECK(bz.sphere_sizes()[static_cast<std::size_t>(n)] == 2);
}

TEST_CASE("genus-2 spheres follow the rational growth series") {
  const auto expect = support::surface_sphere_sizes(2, 6);
  CHECK(expect[1] == 8);
  CHECK(expect[3] == 392);
  const BallTable b = support::genus2().oracle.build_ball(6);
  for (int n = 0; n <= 6; ++n) CHECK(b.sphere_sizes()[static_cast<std::size_t>(n)] == expect[static_cast<std::size_t>(n)]);
}

TEST_CASE("ball words are shortlex and walks agree with the tree") {
  const BallTable b = support::genus2().oracle.build_ball(4);
  const Presentation& p = support::genus2().oracle.presentation();
  for (int id = 1; id < b.size(); ++id) {
    const Word w = b.word(id);
    CHECK(static_cast<int>(w.size()) == b.level(id));
    CHECK(b.walk(0, w) == id);
    CHECK(b.find_shortlex(w) == id);
    CHECK(p.is_freely_reduced(w));
    if (id > 1) CHECK(shortlex_less(b.word(id - 1), w));
  }
}

TEST_CASE("normal forms agree with the breadth-first ball") {
  const GroupOracle& o = support::genus2().oracle;
  const BallTable b = o.build_ball(5);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    const Word w = support::random_word(8, 1 + t % 9, rng);
    const Word nf = o.normal_form(w);
    const int id = b.walk(0, w);
    if (id >= 0) CHECK(nf == b.word(id));
    CHECK(o.dehn().equal(nf, w));
    CHECK(o.normal_form(nf) == nf);
  }
}

TEST_CASE("long normal forms are stable and accepted") {
  const auto& g = support::genus2();
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const Word w = support::random_word(8, 30, rng);
    const Word nf = g.oracle.normal_form(w);
    CHECK(g.fsa.accepts(nf));
    CHECK(g.oracle.dehn().equal(nf, w));
    CHECK(g.oracle.normal_form(nf) == nf);
    if (!nf.empty()) {
      const Letter s = nf.back();
      Word shorter(nf.begin(), nf.end() - 1);
      CHECK(g.oracle.right_multiply(shorter, s) == nf);
    }
  }
}

TEST_CASE("thin triangles") {
  CHECK(support::free2().oracle.estimate_delta(4) == 0);
  CHECK(GroupOracle(presentations::integers()).estimate_delta(4) == 0);
  const int d3 = support::genus2().oracle.estimate_delta(3);
  const int d4 = support::genus2().oracle.estimate_delta(4);
  CHECK(d3 >= 1);
  CHECK(d4 >= d3);
  CHECK(d4 == 2);
}

}  // TEST_SUITE
