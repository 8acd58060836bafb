#include "hypsft/growth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "growth-measure";
using Rational = boost::multiprecision::cpp_rational;
using RatPoly = std::vector<Rational>;

const Real& target_width() {
  static const Real w("1e-30");
  return w;
}

Rational to_rational(const Real& x) {
  if (x == 0) return 0;
  int e = 0;
  Real m = frexp(x, &e);
  BigInt mant = ldexp(m, 180).convert_to<BigInt>();
  const int shift = e - 180;
  if (shift >= 0) return Rational(mant << shift);
  return Rational(mant, BigInt(1) << -shift);
}

void trim(RatPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

RatPoly rem(RatPoly a, const RatPoly& b) {
  trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational f = a.back() / b.back();
    const std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

RatPoly quotient(RatPoly a, const RatPoly& b) {
  trim(a);
  if (a.size() < b.size()) return {};
  RatPoly q(a.size() - b.size() + 1);
  while (a.size() >= b.size() && !a.empty()) {
    const Rational f = a.back() / b.back();
    const std::size_t off = a.size() - b.size();
    q[off] = f;
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  return q;
}

RatPoly gcd(RatPoly a, RatPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    RatPoly r = rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    const Rational lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

RatPoly derivative(const RatPoly& p) {
  RatPoly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  return d;
}

Rational eval(const RatPoly& p, const Rational& x) {
  Rational v = 0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

RatPoly to_rat(const IntPoly& p) {
  RatPoly r(p.begin(), p.end());
  trim(r);
  return r;
}

// Number of distinct real roots of p in (lo, hi].
int sturm_count(const RatPoly& p, const Rational& lo, const Rational& hi) {
  std::vector<RatPoly> seq{p, derivative(p)};
  trim(seq.back());
  while (!seq.back().empty() && seq.back().size() > 1) {
    RatPoly r = rem(seq[seq.size() - 2], seq.back());
    for (auto& c : r) c = -c;
    if (r.empty()) break;
    seq.push_back(std::move(r));
  }
  auto changes = [&](const Rational& x) {
    int count = 0, last = 0;
    for (const auto& q : seq) {
      if (q.empty()) continue;
      const Rational v = eval(q, x);
      const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
      if (s == 0) continue;
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  };
  return changes(lo) - changes(hi);
}

RatPoly squarefree(const RatPoly& p) {
  RatPoly g = gcd(p, derivative(p));
  if (g.size() <= 1) return p;
  return quotient(p, g);
}

using Matrix = std::vector<std::vector<long>>;

Matrix block(const ShortlexFsa& fsa, const std::vector<int>& states) {
  std::vector<int> index(static_cast<std::size_t>(fsa.num_states()), -1);
  for (std::size_t i = 0; i < states.size(); ++i) index[static_cast<std::size_t>(states[i])] = static_cast<int>(i);
  Matrix m(states.size(), std::vector<long>(states.size(), 0));
  for (std::size_t i = 0; i < states.size(); ++i)
    for (Letter s = 0; s < fsa.num_generators(); ++s) {
      int t = fsa.next(states[i], s);
      if (t >= 0 && index[static_cast<std::size_t>(t)] >= 0) ++m[i][static_cast<std::size_t>(index[static_cast<std::size_t>(t)])];
    }
  return m;
}

// Spectral radius of an irreducible nonnegative block: power iteration on
// M + I (primitive) with Collatz-Wielandt bounds, refined by bisection on
// the exact characteristic polynomial when the iteration converges slowly.
LambdaInterval perron_interval(const Matrix& m) {
  const std::size_t n = m.size();
  std::vector<double> xd(n, 1.0), yd(n);
  for (int it = 0; it < 20000; ++it) {
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = xd[i];
      for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(m[i][j]) * xd[j];
      yd[i] = s;
      lo = std::min(lo, s / xd[i]);
      hi = std::max(hi, s / xd[i]);
    }
    const double mx = *std::max_element(yd.begin(), yd.end());
    for (std::size_t i = 0; i < n; ++i) xd[i] = yd[i] / mx;
    if (hi - lo < 1e-14 * hi) break;
  }
  std::vector<Real> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = xd[i];
  Real lo, hi;
  for (int it = 0; it < 4000; ++it) {
    lo = -1;
    hi = -1;
    for (std::size_t i = 0; i < n; ++i) {
      Real s = x[i];
      for (std::size_t j = 0; j < n; ++j)
        if (m[i][j]) s += m[i][j] * x[j];
      y[i] = s;
      Real r = s / x[i];
      if (lo < 0 || r < lo) lo = r;
      if (hi < 0 || r > hi) hi = r;
    }
    Real mx = *std::max_element(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / mx;
    if (hi - lo < target_width()) break;
  }
  LambdaInterval out{lo - 1, hi - 1};
  if (out.width() >= target_width()) {
    const RatPoly p = to_rat(char_poly(m));
    Rational a = to_rational(out.lo), b = to_rational(out.hi);
    Rational pa = eval(p, a), pb = eval(p, b);
    if ((pa < 0 && pb > 0) || (pa > 0 && pb < 0)) {
      for (int it = 0; it < 400 && Real(b.convert_to<Real>() - a.convert_to<Real>()) >= target_width(); ++it) {
        Rational c = (a + b) / 2;
        Rational pc = eval(p, c);
        if (pc == 0) {
          a = b = c;
          break;
        }
        if ((pc < 0) == (pa < 0)) {
          a = c;
          pa = pc;
        } else {
          b = c;
        }
      }
      out.lo = a.convert_to<Real>();
      out.hi = b.convert_to<Real>();
    }
  }
  return out;
}

// Gaussian elimination with partial pivoting; throws on (near) singularity.
std::vector<Real> solve(std::vector<std::vector<Real>> a, std::vector<Real> b) {
  const std::size_t n = b.size();
  static const Real eps("1e-45");
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (abs(a[piv][c]) < eps) throw NumericalError(kStage, "singular system in eigenvector construction");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (a[r][c] == 0) continue;
      Real f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Real> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Positive eigenvector of an irreducible block by inverse iteration just
// above the Perron root.
std::vector<Real> perron_vector(const Matrix& m, const LambdaInterval& rho) {
  const std::size_t n = m.size();
  if (n == 1) return {Real(1)};
  const Real sigma = rho.hi + Real("1e-35");
  std::vector<std::vector<Real>> a(n, std::vector<Real>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = (i == j ? sigma : Real(0)) - m[i][j];
  std::vector<Real> x(n, Real(1));
  for (int it = 0; it < 3; ++it) {
    x = solve(a, x);
    Real mx = *std::max_element(x.begin(), x.end());
    for (auto& v : x) v /= mx;
  }
  return x;
}

}  // namespace

const char* to_string(StateClass c) {
  switch (c) {
    case StateClass::Big: return "big";
    case StateClass::Max: return "max";
    case StateClass::Min: return "min";
  }
  return "?";
}

IntPoly char_poly(const std::vector<std::vector<long>>& a) {
  // Faddeev-LeVerrier; every division is exact over the integers.
  const std::size_t n = a.size();
  IntPoly c(n + 1);
  c[n] = 1;
  std::vector<std::vector<BigInt>> mk(n, std::vector<BigInt>(n, 0)), am(n, std::vector<BigInt>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A M_{k-1} + c_{n-k+1} I
    std::vector<std::vector<BigInt>> next(n, std::vector<BigInt>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) {
        if (!a[i][l]) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] += a[i][l] * mk[l][j];
      }
    for (std::size_t i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
    mk = std::move(next);
    BigInt trace = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        if (a[i][l]) trace += a[i][l] * mk[l][i];
    c[n - k] = -trace / static_cast<long>(k);
  }
  return c;
}

ComponentPartition component_partition(const ShortlexFsa& fsa) {
  const int n = fsa.num_states();
  const int ng = fsa.num_generators();
  ComponentPartition out;
  out.component_of.assign(static_cast<std::size_t>(n), -1);

  // Tarjan, recursive; automata here have at most a few thousand states.
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n)), stack;
  std::vector<char> on(static_cast<std::size_t>(n), 0);
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
    stack.push_back(v);
    on[static_cast<std::size_t>(v)] = 1;
    for (Letter s = 0; s < ng; ++s) {
      int w = fsa.next(v, s);
      if (w < 0) continue;
      if (index[static_cast<std::size_t>(w)] < 0) {
        visit(w);
        low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], low[static_cast<std::size_t>(w)]);
      } else if (on[static_cast<std::size_t>(w)]) {
        low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
      }
    }
    if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
      Component comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[static_cast<std::size_t>(w)] = 0;
        out.component_of[static_cast<std::size_t>(w)] = static_cast<int>(out.components.size());
        comp.states.push_back(w);
      } while (w != v);
      std::sort(comp.states.begin(), comp.states.end());
      out.components.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[static_cast<std::size_t>(v)] < 0) visit(v);

  Real lambda = 0;
  for (auto& comp : out.components) {
    if (comp.states.size() == 1) {
      const int q = comp.states[0];
      for (Letter s = 0; s < ng; ++s) comp.self_loops += fsa.next(q, s) == q;
      comp.trivial = comp.self_loops == 0;
      comp.perron = comp.perron_hi = comp.self_loops;
    } else {
      LambdaInterval iv = perron_interval(block(fsa, comp.states));
      comp.perron = iv.lo;
      comp.perron_hi = iv.hi;
    }
    lambda = max(lambda, comp.perron);
  }

  std::vector<char> big_comp(out.components.size(), 0);
  for (std::size_t c = 0; c < out.components.size(); ++c) {
    const auto& comp = out.components[c];
    // intervals of equal roots overlap; distinct roots are far apart
    big_comp[c] = lambda > 0 && comp.perron_hi >= lambda - Real("1e-25");
    if (big_comp[c] && comp.states.size() == 1)
      out.warnings.push_back("singleton state " + std::to_string(comp.states[0]) +
                             " is big only through its self-loop count convention");
  }
  if (lambda == 0) out.warnings.push_back("acyclic automaton: no big component, every state is min");

  // reaches[c]: component c reaches some big component (components are
  // emitted sinks first, so successors are already resolved)
  std::vector<char> reaches(out.components.size(), 0);
  for (std::size_t c = 0; c < out.components.size(); ++c) {
    reaches[c] = big_comp[c];
    for (int q : out.components[c].states)
      for (Letter s = 0; s < ng; ++s) {
        int t = fsa.next(q, s);
        if (t < 0) continue;
        const auto d = static_cast<std::size_t>(out.component_of[static_cast<std::size_t>(t)]);
        if (d == c) continue;
        if (reaches[d]) reaches[c] = 1;
        if (big_comp[c] && reaches[d])
          out.warnings.push_back("big component containing state " + std::to_string(q) +
                                 " reaches another big component (invalid input automaton)");
      }
  }
  out.cls.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const auto c = static_cast<std::size_t>(out.component_of[static_cast<std::size_t>(q)]);
    out.cls[static_cast<std::size_t>(q)] = big_comp[c] ? StateClass::Big : reaches[c] ? StateClass::Max : StateClass::Min;
  }
  return out;
}

LambdaInterval growth_rate(const ShortlexFsa& fsa) {
  const ComponentPartition part = component_partition(fsa);
  LambdaInterval best{Real(0), Real(0)};
  for (const auto& comp : part.components)
    if (comp.perron > best.lo) best = {comp.perron, comp.perron_hi};
  if (best.hi == 0) throw DegenerateGrowth(kStage, "automaton has no cycle (finite language)");
  if (best.width() > Real("1e-12"))
    throw PrecisionError(kStage, "growth rate interval wider than 1e-12");
  return best;
}

std::vector<Real> mu_vector(const ShortlexFsa& fsa, const ComponentPartition& part, const LambdaInterval& lambda) {
  const int n = fsa.num_states();
  std::vector<Real> mu(static_cast<std::size_t>(n), Real(0));
  // (1) Perron vectors on the big components
  for (const auto& comp : part.components) {
    if (part.cls[static_cast<std::size_t>(comp.states[0])] != StateClass::Big) continue;
    std::vector<Real> v = perron_vector(block(fsa, comp.states), {comp.perron, comp.perron_hi});
    for (std::size_t i = 0; i < comp.states.size(); ++i) mu[static_cast<std::size_t>(comp.states[i])] = v[i];
  }
  // (2) max states: (lambda I - A_mm) mu_m = A_mb mu_b
  std::vector<int> mx;
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  for (int q = 0; q < n; ++q)
    if (part.cls[static_cast<std::size_t>(q)] == StateClass::Max) {
      pos[static_cast<std::size_t>(q)] = static_cast<int>(mx.size());
      mx.push_back(q);
    }
  if (!mx.empty()) {
    const Real lam = lambda.mid();
    std::vector<std::vector<Real>> a(mx.size(), std::vector<Real>(mx.size(), Real(0)));
    std::vector<Real> rhs(mx.size(), Real(0));
    for (std::size_t i = 0; i < mx.size(); ++i) {
      a[i][i] = lam;
      for (Letter s = 0; s < fsa.num_generators(); ++s) {
        int t = fsa.next(mx[i], s);
        if (t < 0) continue;
        if (pos[static_cast<std::size_t>(t)] >= 0) a[i][static_cast<std::size_t>(pos[static_cast<std::size_t>(t)])] -= 1;
        else rhs[i] += mu[static_cast<std::size_t>(t)];  // big or min (zero)
      }
    }
    std::vector<Real> x = solve(a, rhs);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      if (x[i] <= 0) throw NumericalError(kStage, "non-positive value on a max state");
      mu[static_cast<std::size_t>(mx[i])] = x[i];
    }
  }
  // (3) min states stay zero; normalize
  Real smallest = -1;
  for (const auto& v : mu)
    if (v > 0 && (smallest < 0 || v < smallest)) smallest = v;
  if (smallest > 0)
    for (auto& v : mu) v /= smallest;
  return mu;
}

Real eigen_residual(const ShortlexFsa& fsa, const std::vector<Real>& mu, const Real& lambda) {
  Real worst = 0;
  for (int q = 0; q < fsa.num_states(); ++q) {
    Real s = 0;
    for (Letter g = 0; g < fsa.num_generators(); ++g)
      if (int t = fsa.next(q, g); t >= 0) s += mu[static_cast<std::size_t>(t)];
    worst = max(worst, Real(abs(s - lambda * mu[static_cast<std::size_t>(q)])));
  }
  return worst;
}

GrowthData analyze_growth(const ShortlexFsa& fsa) {
  GrowthData g;
  g.partition = component_partition(fsa);
  g.lambda = growth_rate(fsa);
  std::vector<int> big;
  for (int q = 0; q < fsa.num_states(); ++q)
    if (g.partition.cls[static_cast<std::size_t>(q)] == StateClass::Big) big.push_back(q);
  g.char_poly = char_poly(block(fsa, big));
  g.mu = mu_vector(fsa, g.partition, g.lambda);
  g.residual = eigen_residual(fsa, g.mu, g.lambda.mid());
  return g;
}

IncommensurabilityReport check_incommensurable(const GrowthData& growth, int q, int bound) {
  if (q != 2 && q != 3) throw InputError(kStage, "q must be 2 or 3");
  if (growth.lambda.lo <= 1) throw InputError(kStage, "growth rate must exceed 1");
  IncommensurabilityReport rep;
  rep.q = q;
  rep.bound = bound;
  const Real lq = log(Real(q));
  const Real llo = log(growth.lambda.lo), lhi = log(growth.lambda.hi);
  const Real slack("1e-40");

  RatPoly p;
  Rational lo, hi;
  for (int n = 1; n <= bound; ++n)
    for (int m = 1; m <= bound; ++m) {
      // m log q - n log lambda ranges over [m lq - n lhi, m lq - n llo]
      if (m * lq - n * lhi > slack || m * lq - n * llo < -slack) continue;
      ++rep.candidates_checked;
      if (p.empty()) {
        p = squarefree(to_rat(growth.char_poly));
        lo = to_rational(growth.lambda.lo - slack);
        hi = to_rational(growth.lambda.hi + slack);
        if (sturm_count(p, lo, hi) != 1)
          throw PrecisionError(kStage, "growth rate interval does not isolate a single root");
      }
      RatPoly rel(static_cast<std::size_t>(n) + 1, Rational(0));
      rel[0] = -Rational(boost::multiprecision::pow(BigInt(q), m));
      rel[static_cast<std::size_t>(n)] = 1;
      RatPoly g = gcd(p, rel);
      if (g.size() >= 2 && sturm_count(g, lo, hi) >= 1) {
        rep.incommensurable = false;
        rep.relation_m = m;
        rep.relation_n = n;
        return rep;
      }
    }
  return rep;
}

std::string growth_report(const ShortlexFsa& fsa, const GrowthData& g) {
  std::ostringstream out;
  out.precision(25);
  out << "lambda_lo: " << g.lambda.lo << "\n";
  out << "lambda_hi: " << g.lambda.hi << "\n";
  out << "char_poly:";
  for (const auto& c : g.char_poly) out << ' ' << c;
  out << "\n";
  out << "components: " << g.partition.components.size() << "\n";
  out << "states:\n";
  for (int q = 0; q < fsa.num_states(); ++q)
    out << "  " << q << " class=" << to_string(g.partition.cls[static_cast<std::size_t>(q)])
        << " component=" << g.partition.component_of[static_cast<std::size_t>(q)]
        << " mu=" << g.mu[static_cast<std::size_t>(q)] << "\n";
  out.precision(6);
  out << "residual: " << g.residual << "\n";
  for (int q : {2, 3}) {
    try {
      auto r = check_incommensurable(g, q);
      out << "incommensurable_q" << q << ": " << (r.incommensurable ? "true" : "false");
      if (!r.incommensurable) out << " (" << q << "^" << r.relation_m << " = lambda^" << r.relation_n << ")";
      out << "\n";
    } catch (const Error& e) {
      out << "incommensurable_q" << q << ": error " << e.what() << "\n";
    }
  }
  for (const auto& w : g.partition.warnings) out << "warning: " << w << "\n";
  return out.str();
}

}  // namespace hypsft
