#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hypsft/ball.hpp"
#include "hypsft/dehn.hpp"
#include "hypsft/fsa.hpp"
#include "hypsft/presentation.hpp"

namespace hypsft {

enum class OracleMode { DehnSmallCancellation, ExternalFsa };

struct OracleOptions {
  /// Radius of the exact bootstrap ball; 0 picks the largest radius <= 7
  /// whose ball stays under 30000 elements.
  int bootstrap_radius = 0;
  /// Bound on synchronous word differences between shortlex forms of g and
  /// gs; 0 takes the maximum observed on the bootstrap ball.
  int word_difference_bound = 0;
  /// Longest word length for which normal forms are served.
  int validated_radius = 64;
  std::size_t max_elements = 3'000'000;
};

/// Word problem and shortlex arithmetic for one presentation.
///
/// Identity testing is Dehn's algorithm.  Shortlex normal forms of products
/// are computed by a dynamic program over synchronous word differences (the
/// fellow-traveller property of shortlex forms in hyperbolic groups), with
/// group multiplication on differences read from an exact bootstrap ball.
class GroupOracle {
 public:
  explicit GroupOracle(Presentation p, OracleMode mode = OracleMode::DehnSmallCancellation,
                       OracleOptions options = {});

  const Presentation& presentation() const { return pres_; }
  OracleMode mode() const { return mode_; }
  const OracleOptions& options() const { return options_; }
  const DehnReducer& dehn() const { return dehn_; }
  const PieceReport& piece_report() const { return pieces_; }
  const BallTable& bootstrap_ball() const { return bootstrap_; }
  int word_difference_bound() const { return wd_bound_; }
  int observed_word_difference() const { return wd_observed_; }

  /// External automaton; constrains every normal form computation.
  void load_fsa(ShortlexFsa fsa);
  const ShortlexFsa* fsa() const { return fsa_ ? &*fsa_ : nullptr; }

  /// Dehn reduction followed by shortlex normalization; length never grows
  /// and the result is empty iff w is the identity.
  Word reduce_word(std::span<const Letter> w) const;
  /// Shortlex normal form of an arbitrary word.
  Word normal_form(std::span<const Letter> w) const;
  /// Shortlex form of v*s for a shortlex word v.
  Word right_multiply(std::span<const Letter> shortlex_v, Letter s) const;
  /// Same, with every candidate path additionally constrained to `fsa`
  /// (nullptr: the loaded automaton, if any).
  Word normal_form(std::span<const Letter> w, const ShortlexFsa* fsa) const;
  Word right_multiply(std::span<const Letter> shortlex_v, Letter s, const ShortlexFsa* fsa) const;

  /// Word differences are the ids of B(k) in the bootstrap ball (0 is the
  /// identity).  diff_step(e, a, b) = a^-1 e b, or -1 outside B(k); a or b
  /// equal to num_generators() stands for padding.
  int num_differences() const { return num_diffs_; }
  int diff_step(int e, int a, int b) const {
    const int w = pres_.num_generators() + 1;
    return diff_table_[(static_cast<std::size_t>(e) * w + a) * w + b];
  }

  BallTable build_ball(int radius) const;
  /// Smallest delta making every geodesic triangle of diameter <= radius
  /// (one vertex at the identity, all geodesics for every side) delta-slim.
  int estimate_delta(int radius) const;

 private:
  bool try_length(std::span<const Letter> v, Letter s, int m, const ShortlexFsa* acc, Word& out) const;
  void check_ready() const;

  Presentation pres_;
  OracleMode mode_;
  OracleOptions options_;
  DehnReducer dehn_;
  PieceReport pieces_;
  BallTable bootstrap_;
  int wd_bound_ = 0;
  int wd_observed_ = 0;
  int num_diffs_ = 0;              // |B(wd_bound)|
  std::vector<int> diff_table_;    // [e][a][b] -> a^-1 e b, PAD = ngen
  std::optional<ShortlexFsa> fsa_;
};

}  // namespace hypsft
