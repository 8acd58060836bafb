#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypsft/errors.hpp"
#include "hypsft/presentation.hpp"

namespace hypsft {

class GroupOracle;
class BallTable;

/// Deterministic partial automaton over the generators.  Missing
/// transitions are -1 (implicit failure state, never stored).
class ShortlexFsa {
 public:
  ShortlexFsa() = default;
  ShortlexFsa(int num_states, int num_generators, int start, std::vector<int> transitions);

  int num_states() const { return num_states_; }
  int num_generators() const { return ngen_; }
  int start() const { return start_; }
  int next(int state, Letter s) const {
    return trans_[static_cast<std::size_t>(state) * static_cast<std::size_t>(ngen_) +
                  static_cast<std::size_t>(s)];
  }
  /// Final state after reading w from the start, or -1 if w is rejected.
  int run(std::span<const Letter> w) const;
  bool accepts(std::span<const Letter> w) const { return run(w) >= 0; }
  /// Every state reachable from the start.
  bool is_pruned() const;
  int num_transitions() const;

  /// states/start/trans text format; generator symbols from the presentation.
  std::string to_text(const Presentation& p) const;
  static ShortlexFsa parse(std::string_view text, const Presentation& p);
  static ShortlexFsa from_file(const std::string& path, const Presentation& p);

  /// Copy with one transition removed (mutation testing).
  ShortlexFsa without_transition(int state, Letter s) const;

  friend bool operator==(const ShortlexFsa&, const ShortlexFsa&) = default;

 private:
  int num_states_ = 0;
  int ngen_ = 0;
  int start_ = 0;
  std::vector<int> trans_;
};

/// The automaton state reached so far was not stable; the partial automaton
/// (classes found on the sampled core) is attached.
class ConstructionIncomplete : public Error {
 public:
  ConstructionIncomplete(const std::string& what, ShortlexFsa partial)
      : Error("shortlex-fsa", what), partial_(std::move(partial)) {}
  const ShortlexFsa& partial() const { return partial_; }

 private:
  ShortlexFsa partial_;
};

ShortlexFsa build_shortlex_fsa(const GroupOracle& oracle, int lookahead, int radius);
/// Same construction on an existing ball (radius taken from the ball).
ShortlexFsa build_shortlex_fsa(const BallTable& ball, int lookahead);

/// Shortlex normal form; the result is checked against the automaton.
Word normal_form(const ShortlexFsa& fsa, const GroupOracle& oracle, std::span<const Letter> w);

/// Number of accepted words of length n (arbitrary precision is not needed
/// within the radii this toolkit handles; counts saturate at UINT64_MAX).
std::uint64_t sphere_count(const ShortlexFsa& fsa, int n);
std::vector<std::uint64_t> sphere_counts(const ShortlexFsa& fsa, int max_n);

struct FsaViolation {
  enum class Kind { CountMismatch, AcceptedNonShortlex, RejectedShortlex };
  Kind kind;
  int length;
  std::string detail;
};

struct FsaValidationReport {
  int radius = 0;
  std::vector<std::uint64_t> path_counts;
  std::vector<long> sphere_sizes;
  std::vector<FsaViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_text() const;
};

FsaValidationReport validate_fsa(const ShortlexFsa& fsa, const GroupOracle& oracle, int radius);
FsaValidationReport validate_fsa(const ShortlexFsa& fsa, const BallTable& ball, const Presentation& p);

}  // namespace hypsft
