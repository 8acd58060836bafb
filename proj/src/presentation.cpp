#include "hypsft/presentation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "group-core";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Cyclic reduction after free reduction.
Word cyclically_reduce(const Presentation& p, Word w) {
  w = p.free_reduce(w);
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == p.inverse(w[hi - 1])) {
    ++lo;
    --hi;
  }
  return Word(w.begin() + static_cast<long>(lo), w.begin() + static_cast<long>(hi));
}

}  // namespace

Presentation::Presentation(std::vector<std::string> names, std::vector<int> inverse,
                           std::vector<Word> relators)
    : names_(std::move(names)), inverse_(std::move(inverse)) {
  const int n = num_generators();
  if (n == 0 || static_cast<int>(inverse_.size()) != n)
    throw InputError(kStage, "generator list and inverse table disagree");
  for (int a = 0; a < n; ++a) {
    if (inverse_[a] < 0 || inverse_[a] >= n || inverse_[inverse_[a]] != a)
      throw InputError(kStage, "generator set is not closed under inversion");
    if (names_[a] == "1") throw InputError(kStage, "'1' is reserved for the identity");
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (names_[a] == names_[b]) throw InputError(kStage, "duplicate generator " + names_[a]);
  for (auto& r : relators) {
    for (Letter x : r)
      if (x < 0 || x >= n) throw InputError(kStage, "relator uses unknown generator");
    Word c = cyclically_reduce(*this, r);
    if (c.empty()) throw InputError(kStage, "relator reduces to the empty word");
    relators_.push_back(std::move(c));
  }
}

Presentation Presentation::parse(std::string_view text) {
  std::vector<std::string> names;
  std::vector<std::string> relator_lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string_view body = trim(line);
    if (body.empty()) continue;
    auto colon = body.find(':');
    if (colon == std::string_view::npos) throw InputError(kStage, "malformed line: " + line);
    std::string_view key = trim(body.substr(0, colon));
    std::string_view value = trim(body.substr(colon + 1));
    if (key == "generators") {
      if (!names.empty()) throw InputError(kStage, "generators listed twice");
      names = split_ws(value);
    } else if (key == "relator") {
      relator_lines.emplace_back(value);
    } else {
      throw InputError(kStage, "unknown key '" + std::string(key) + "'");
    }
  }
  if (names.empty() || names.size() % 2 != 0)
    throw InputError(kStage, "generators must be listed as (letter, inverse) pairs");
  std::vector<int> inverse(names.size());
  for (std::size_t i = 0; i < names.size(); i += 2) {
    inverse[i] = static_cast<int>(i + 1);
    inverse[i + 1] = static_cast<int>(i);
  }
  Presentation bare(names, inverse, {});
  std::vector<Word> relators;
  for (const auto& r : relator_lines) relators.push_back(bare.parse_word(r));
  return Presentation(std::move(names), std::move(inverse), std::move(relators));
}

Presentation Presentation::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError(kStage, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Presentation::to_text() const {
  std::string out = "generators:";
  // Pairs are emitted as (x, x^-1) following the stored order.
  std::vector<bool> done(names_.size(), false);
  for (int a = 0; a < num_generators(); ++a) {
    if (done[a]) continue;
    out += " " + names_[a] + " " + names_[inverse_[a]];
    done[a] = done[inverse_[a]] = true;
  }
  out += "\n";
  for (const auto& r : relators_) out += "relator: " + format_word(r) + "\n";
  return out;
}

int Presentation::max_relator_length() const {
  int m = 0;
  for (const auto& r : relators_) m = std::max(m, static_cast<int>(r.size()));
  return m;
}

Word Presentation::parse_word(std::string_view text) const {
  std::unordered_map<std::string, int> index;
  bool single_char = true;
  for (int a = 0; a < num_generators(); ++a) {
    index.emplace(names_[a], a);
    single_char = single_char && names_[a].size() == 1;
  }
  Word w;
  for (const auto& tok : split_ws(text)) {
    if (tok == "1") continue;
    if (auto it = index.find(tok); it != index.end()) {
      w.push_back(it->second);
      continue;
    }
    if (!single_char) throw InputError(kStage, "unknown generator symbol '" + tok + "'");
    for (char c : tok) {
      auto it = index.find(std::string(1, c));
      if (it == index.end())
        throw InputError(kStage, "unknown generator symbol '" + std::string(1, c) + "'");
      w.push_back(it->second);
    }
  }
  return w;
}

std::string Presentation::format_word(std::span<const Letter> w) const {
  if (w.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += names_.at(static_cast<std::size_t>(w[i]));
  }
  return out;
}

Word Presentation::invert(std::span<const Letter> w) const {
  Word out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[w.size() - 1 - i] = inverse_[w[i]];
  return out;
}

Word Presentation::free_reduce(std::span<const Letter> w) const {
  Word out;
  out.reserve(w.size());
  for (Letter x : w) {
    if (!out.empty() && out.back() == inverse_[x])
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

bool Presentation::is_freely_reduced(std::span<const Letter> w) const {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == inverse_[w[i - 1]]) return false;
  return true;
}

std::uint64_t Presentation::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace presentations {

Presentation integers() { return Presentation::parse("generators: t T\n"); }

Presentation free_group(int rank) {
  std::string text = "generators:";
  for (int i = 0; i < rank; ++i) {
    char lo = static_cast<char>('a' + i);
    char hi = static_cast<char>('A' + i);
    text += std::string(" ") + lo + " " + hi;
  }
  return Presentation::parse(text + "\n");
}

Presentation surface_group(int genus) {
  if (genus < 1 || genus > 6) throw InputError(kStage, "surface genus must be in 1..6");
  std::string gens = "generators:";
  std::string rel = "relator:";
  for (int i = 0; i < genus; ++i) {
    char a = static_cast<char>('a' + 2 * i), b = static_cast<char>('b' + 2 * i);
    char A = static_cast<char>('A' + 2 * i), B = static_cast<char>('B' + 2 * i);
    gens += std::string(" ") + a + " " + A + " " + b + " " + B;
    rel += std::string(" ") + a + " " + b + " " + A + " " + B;
  }
  return Presentation::parse(gens + "\n" + rel + "\n");
}

}  // namespace presentations

}  // namespace hypsft
