#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "hypsft/fsa.hpp"

namespace hypsft {

/// 50 decimal digits (about 166 bits).
using Real = boost::multiprecision::mpfr_float_50;
using BigInt = boost::multiprecision::cpp_int;
/// Integer polynomial, coefficients from degree 0 upward.
using IntPoly = std::vector<BigInt>;

enum class StateClass { Big, Max, Min };
const char* to_string(StateClass c);

struct Component {
  std::vector<int> states;
  long self_loops = 0;  // meaningful for singletons
  bool trivial = false; // singleton without self-loop
  Real perron;          // spectral radius of the block (lower end of its interval)
  Real perron_hi;
};

struct ComponentPartition {
  std::vector<int> component_of;
  std::vector<Component> components;  // reverse topological order (sinks first)
  std::vector<StateClass> cls;
  std::vector<std::string> warnings;
};

ComponentPartition component_partition(const ShortlexFsa& fsa);

struct LambdaInterval {
  Real lo, hi;
  Real mid() const { return (lo + hi) / 2; }
  Real width() const { return hi - lo; }
};

/// Spectral radius of the adjacency matrix, as a certified interval.
/// Throws DegenerateGrowth for automata without cycles.
LambdaInterval growth_rate(const ShortlexFsa& fsa);

/// Characteristic polynomial det(xI - M) of an integer matrix (Faddeev-LeVerrier, exact).
IntPoly char_poly(const std::vector<std::vector<long>>& m);

struct GrowthData {
  LambdaInterval lambda;
  IntPoly char_poly;  // of the block spanned by the big states
  ComponentPartition partition;
  std::vector<Real> mu;
  Real residual;  // max_a |sum_{a->b} mu(b) - lambda mu(a)|
};

/// mu supported on big and max states, normalized to min nonzero value 1.
std::vector<Real> mu_vector(const ShortlexFsa& fsa, const ComponentPartition& partition,
                            const LambdaInterval& lambda);
Real eigen_residual(const ShortlexFsa& fsa, const std::vector<Real>& mu, const Real& lambda);

GrowthData analyze_growth(const ShortlexFsa& fsa);

struct IncommensurabilityReport {
  bool incommensurable = true;
  int q = 2;
  int bound = 64;
  int relation_m = 0, relation_n = 0;  // q^m = lambda^n when found
  int candidates_checked = 0;          // pairs surviving the analytic filter
};

IncommensurabilityReport check_incommensurable(const GrowthData& growth, int q, int bound = 64);

/// Structured text: lambda interval, partition, mu, verdicts for q = 2, 3.
std::string growth_report(const ShortlexFsa& fsa, const GrowthData& growth);

}  // namespace hypsft
