#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hypsft/presentation.hpp"

namespace hypsft {

class DehnReducer;

/// Ball of the Cayley graph around the identity.
///
/// Element ids are assigned breadth-first in shortlex order of the canonical
/// words, so id 0 is the identity and ids in [0, size_upto(n)) form B(n).
/// The parent/last arrays encode the shortlex spanning tree.  All edges from
/// elements of level < radius are known; edges out of the outer sphere are
/// only known when they point back into the ball.
class BallTable {
 public:
  int radius() const { return radius_; }
  int num_generators() const { return ngen_; }
  int size() const { return static_cast<int>(level_.size()); }
  int size_upto(int n) const;
  const std::vector<long>& sphere_sizes() const { return sphere_sizes_; }

  int level(int id) const { return level_[static_cast<std::size_t>(id)]; }
  int parent(int id) const { return parent_[static_cast<std::size_t>(id)]; }
  Letter last(int id) const { return last_[static_cast<std::size_t>(id)]; }
  /// -1 when the edge leaves the ball (or is not yet known on the outer sphere).
  int neighbor(int id, Letter s) const {
    return neighbor_[static_cast<std::size_t>(id) * static_cast<std::size_t>(ngen_) +
                     static_cast<std::size_t>(s)];
  }
  bool is_tree_child(int parent, Letter s, int child) const {
    return child >= 0 && parent_[static_cast<std::size_t>(child)] == parent &&
           last_[static_cast<std::size_t>(child)] == s;
  }

  Word word(int id) const;
  /// Follows edges from `from`; -1 if some edge is unknown.
  int walk(int from, std::span<const Letter> w) const;
  /// Id of the element whose shortlex word is exactly `w`, or -1.
  int find_shortlex(std::span<const Letter> w) const;

  /// Keeps only elements of level <= r (a prefix of the id range).
  BallTable truncated(int r) const;

 private:
  friend class BallBuilder;
  int radius_ = 0;
  int ngen_ = 0;
  std::vector<int> level_, parent_;
  std::vector<Letter> last_;
  std::vector<int> neighbor_;
  std::vector<long> sphere_sizes_;
  std::vector<int> level_end_;  // level_end_[n] = size_upto(n)
};

/// Breadth-first ball construction.  Coincidences are found by closing
/// relator loops through already-known edges (coset-enumeration style
/// deduction); a Dehn-reduction guard catches any coincidence the loops miss.
class BallBuilder {
 public:
  BallBuilder(const Presentation& p, const DehnReducer& dehn) : pres_(p), dehn_(dehn) {}
  BallTable build(int radius, std::size_t max_elements) const;

 private:
  const Presentation& pres_;
  const DehnReducer& dehn_;
};

}  // namespace hypsft
