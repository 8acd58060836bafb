#pragma once

#include <span>
#include <vector>

#include "hypsft/presentation.hpp"

namespace hypsft {

struct PieceReport {
  int max_piece = 0;       // longest common prefix of two distinct symmetrized relators
  int shortest_relator = 0;
  // Every piece is strictly shorter than 1/6 of each relator it prefixes.
  bool small_cancellation = true;
};

/// Dehn's algorithm over the symmetrized relator set.  Each step replaces a
/// subword that is more than half of a relator by the shorter complement, so
/// word length strictly decreases.  For C'(1/6) presentations the result is
/// empty exactly when the input represents the identity.
class DehnReducer {
 public:
  explicit DehnReducer(const Presentation& p);

  Word reduce(std::span<const Letter> w) const;
  bool is_identity(std::span<const Letter> w) const { return reduce(w).empty(); }
  bool equal(std::span<const Letter> u, std::span<const Letter> v) const;

  PieceReport piece_report() const;
  const std::vector<Word>& symmetrized() const { return symmetrized_; }

 private:
  bool reduce_once(Word& w) const;

  Presentation pres_;
  std::vector<Word> symmetrized_;
  // symmetrized relators bucketed by first letter
  std::vector<std::vector<int>> by_first_;
};

}  // namespace hypsft
