#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypsft {

/// A generator index into Presentation::names.  The index order is the
/// lexicographic order used for shortlex comparison.
using Letter = int;
using Word = std::vector<Letter>;

/// Group presentation over a symmetric generating set.
///
/// Generators are listed in pairs (x, x^-1); the listing order is the
/// generator order.  Relators are stored cyclically reduced.
class Presentation {
 public:
  Presentation() = default;
  Presentation(std::vector<std::string> names, std::vector<int> inverse,
               std::vector<Word> relators);

  /// Parses the text format:
  ///   generators: a A b B
  ///   relator: a b A B
  /// with `#` comments.
  static Presentation parse(std::string_view text);
  static Presentation from_file(const std::string& path);
  std::string to_text() const;

  int num_generators() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  Letter inverse(Letter a) const { return inverse_[a]; }
  const std::vector<Word>& relators() const { return relators_; }
  int max_relator_length() const;

  Word parse_word(std::string_view text) const;
  std::string format_word(std::span<const Letter> w) const;
  Word invert(std::span<const Letter> w) const;
  Word free_reduce(std::span<const Letter> w) const;
  bool is_freely_reduced(std::span<const Letter> w) const;

  /// FNV-1a hash of to_text(); recorded in patch headers.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> names_;
  std::vector<int> inverse_;
  std::vector<Word> relators_;
};

/// Shortlex comparison: shorter first, then lexicographic by letter index.
inline bool shortlex_less(std::span<const Letter> a, std::span<const Letter> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

namespace presentations {
Presentation integers();      // <t | >
Presentation free_group(int rank);
Presentation surface_group(int genus);  // [a1,b1]...[ag,bg]
}  // namespace presentations

}  // namespace hypsft
