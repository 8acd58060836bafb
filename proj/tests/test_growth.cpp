#include <cmath>
#include <random>

#include "doctest.h"
#include "hypsft/errors.hpp"
#include "support.hpp"

using namespace hypsft;

namespace {

// Right eigenvector by power iteration on A + I in long double, scaled to
// minimum nonzero entry 1.
std::vector<long double> power_mu(const ShortlexFsa& f) {
  const int n = f.num_states();
  std::vector<long double> x(static_cast<std::size_t>(n), 1), y;
  for (int it = 0; it < 20000; ++it) {
    y = x;
    for (int q = 0; q < n; ++q)
      for (Letter s = 0; s < f.num_generators(); ++s)
        if (int r = f.next(q, s); r >= 0) y[static_cast<std::size_t>(q)] += x[static_cast<std::size_t>(r)];
    long double m = 0;
    for (auto v : y) m = std::max(m, v);
    for (auto& v : y) v /= m;
    x = y;
  }
  long double lo = 1e30L;
  for (auto v : x)
    if (v > 1e-12L) lo = std::min(lo, v);
  for (auto& v : x) v = v > 1e-12L ? v / lo : 0;
  return x;
}

// Bareiss determinant of an integer matrix.
BigInt bareiss(std::vector<std::vector<BigInt>> a) {
  const std::size_t n = a.size();
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && a[r][k] == 0) ++r;
      if (r == n) return 0;
      std::swap(a[k], a[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

long double surface_root() {
  // largest root of x^4 - 6x^3 - 6x^2 - 6x + 1
  auto f = [](long double x) { return (((x - 6) * x - 6) * x - 6) * x + 1; };
  long double lo = 6, hi = 8;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_SUITE("growth") {

TEST_CASE("characteristic polynomial matches determinants") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> entry(-3, 3);
  for (int t = 0; t < 5; ++t) {
    const int n = 3 + t;
    std::vector<std::vector<long>> m(static_cast<std::size_t>(n), std::vector<long>(static_cast<std::size_t>(n)));
    for (auto& row : m)
      for (auto& v : row) v = entry(rng);
    const IntPoly p = char_poly(m);
    REQUIRE(p.size() == static_cast<std::size_t>(n + 1));
    CHECK(p.back() == 1);
    for (long x = -3; x <= 3; ++x) {
      std::vector<std::vector<BigInt>> a(static_cast<std::size_t>(n), std::vector<BigInt>(static_cast<std::size_t>(n)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              (i == j ? x : 0) - m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      BigInt v = 0, pw = 1;
      for (const auto& c : p) {
        v += c * pw;
        pw *= x;
      }
      CHECK(v == bareiss(a));
    }
  }
}

TEST_CASE("free group: lambda 3 and flat mu") {
  const auto& g = support::free2();
  CHECK(g.growth.lambda.width() <= Real("1e-12"));
  CHECK(abs(g.growth.lambda.mid() - 3) < Real("1e-12"));
  CHECK(g.growth.residual <= Real("1e-9"));
  for (int q = 0; q < g.fsa.num_states(); ++q)
    if (q != g.fsa.start()) CHECK(abs(g.growth.mu[static_cast<std::size_t>(q)] - 1) < Real("1e-12"));
}

TEST_CASE("genus-2 growth rate") {
  const auto& g = support::genus2();
  const long double expect = surface_root();
  CHECK(std::abs(static_cast<long double>(g.growth.lambda.mid()) - expect) < 1e-12L);
  CHECK(g.growth.lambda.width() <= Real("1e-12"));
  const double ratio = static_cast<double>(sphere_count(g.fsa, 13)) / static_cast<double>(sphere_count(g.fsa, 12));
  CHECK(std::abs(ratio - static_cast<double>(expect)) < 1e-2);
  CHECK(g.growth.residual <= Real("1e-9"));
  const auto& part = g.growth.partition;
  CHECK(part.cls[static_cast<std::size_t>(g.fsa.start())] == StateClass::Max);
}

TEST_CASE("mu on synthetic automata with max states") {
  for (const auto& f : support::synthetic_fsas()) {
    const GrowthData g = analyze_growth(f);
    const auto oracle = power_mu(f);
    Real least = 1e9;
    int max_states = 0;
    for (int q = 0; q < f.num_states(); ++q) {
      const auto cls = g.partition.cls[static_cast<std::size_t>(q)];
      const Real& m = g.mu[static_cast<std::size_t>(q)];
      CHECK(m >= 0);
      CHECK((m > 0) == (cls != StateClass::Min));
      if (cls == StateClass::Max) ++max_states;
      if (m > 0) least = std::min(least, m);
      CHECK(std::abs(static_cast<long double>(m) - oracle[static_cast<std::size_t>(q)]) < 1e-9L);
    }
    CHECK(max_states >= 2);
    CHECK(abs(least - 1) < Real("1e-30"));
    CHECK(g.residual <= Real("1e-9"));
  }
}

TEST_CASE("incommensurability") {
  // light -> light + dark, dark -> light + 2 dark: lambda = phi^2
  const ShortlexFsa phi2 = support::make_fsa(2, 3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 0}, {1, 1, 1}, {1, 2, 1}});
  const GrowthData g = analyze_growth(phi2);
  CHECK(abs(g.lambda.mid() - (3 + sqrt(Real(5))) / 2) < Real("1e-30"));
  CHECK(check_incommensurable(g, 2).incommensurable);

  const auto& f2 = support::free2().growth;
  CHECK(check_incommensurable(f2, 2).incommensurable);
  const auto r3 = check_incommensurable(f2, 3);
  CHECK_FALSE(r3.incommensurable);
  CHECK(r3.relation_m == 1);
  CHECK(r3.relation_n == 1);

  const ShortlexFsa four = support::make_fsa(1, 4, {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}, {0, 3, 0}});
  const auto r4 = check_incommensurable(analyze_growth(four), 2);
  CHECK_FALSE(r4.incommensurable);
  CHECK(r4.relation_m == 2);
  CHECK(r4.relation_n == 1);

  const auto& s = support::genus2().growth;
  CHECK(check_incommensurable(s, 2).incommensurable);
  CHECK(check_incommensurable(s, 3).incommensurable);
}

TEST_CASE("finite languages have no growth rate") {
  const ShortlexFsa chain = support::make_fsa(2, 2, {{0, 0, 1}});
  CHECK_THROWS_AS(growth_rate(chain), DegenerateGrowth);
}

TEST_CASE("report lists every state") {
  const auto& g = support::genus2();
  const std::string text = growth_report(g.fsa, g.growth);
  CHECK(text.find("lambda_lo: 6.9798357792") != std::string::npos);
  CHECK(text.find("incommensurable_q2: true") != std::string::npos);
}

}  // TEST_SUITE
