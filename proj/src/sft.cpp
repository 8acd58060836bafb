#include "hypsft/sft.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "sft";

std::string key_of(const std::vector<int>& v) {
  std::string k;
  k.reserve(v.size() * 3);
  for (int x : v) {
    k += std::to_string(x);
    k += ',';
  }
  return k;
}

int residue(int h, int m) { return ((h % m) + m) % m; }

}  // namespace

int PatternRuleSet::symbol(const std::string& name) const {
  auto it = std::find(alphabet.begin(), alphabet.end(), name);
  return it == alphabet.end() ? -1 : static_cast<int>(it - alphabet.begin());
}

int PatternRuleSet::offset_index(const Word& w) const {
  auto it = std::find(offsets.begin(), offsets.end(), w);
  return it == offsets.end() ? -1 : static_cast<int>(it - offsets.begin());
}

std::string PatternRuleSet::to_text(const Presentation& p) const {
  std::ostringstream out;
  out << "alphabet:";
  for (const auto& a : alphabet) out << " " << a;
  out << "\nwindow: " << window << "\n";
  for (const auto& pat : patterns) {
    out << (allow ? "allow:" : "forbid:") << "\n";
    for (std::size_t i = 0; i < offsets.size(); ++i)
      if (pat[i] >= 0) out << "  " << p.format_word(offsets[i]) << " = " << alphabet[static_cast<std::size_t>(pat[i])] << "\n";
  }
  return out.str();
}

PatternRuleSet PatternRuleSet::parse(const std::string& text, const Presentation& p) {
  PatternRuleSet rs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_alphabet = false, have_window = false, have_polarity = false;
  std::vector<std::vector<std::pair<Word, int>>> blocks;
  auto fail = [&](const std::string& msg) { throw InputError(kStage, "line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) line.pop_back();
    if (line.rfind("alphabet:", 0) == 0) {
      std::istringstream a(line.substr(9));
      for (std::string s; a >> s;) {
        if (rs.symbol(s) >= 0) fail("duplicate symbol '" + s + "'");
        rs.alphabet.push_back(s);
      }
      if (rs.alphabet.empty()) fail("empty alphabet");
      have_alphabet = true;
    } else if (line.rfind("window:", 0) == 0) {
      try {
        rs.window = std::stoi(line.substr(7));
      } catch (const std::logic_error&) {
        fail("bad window radius");
      }
      if (rs.window < 0) fail("negative window radius");
      have_window = true;
    } else if (line == "allow:" || line == "forbid:") {
      const bool a = line == "allow:";
      if (have_polarity && a != rs.allow) fail("allow and forbid blocks cannot be mixed");
      rs.allow = a;
      have_polarity = true;
      blocks.emplace_back();
    } else {
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected '<offset word> = <symbol>'");
      if (blocks.empty()) fail("pattern line outside a block");
      if (!have_alphabet) fail("alphabet must come first");
      std::string sym = line.substr(eq + 1);
      sym.erase(0, sym.find_first_not_of(' '));
      const int s = rs.symbol(sym);
      if (s < 0) fail("unknown symbol '" + sym + "'");
      Word w = p.free_reduce(p.parse_word(line.substr(0, eq)));
      blocks.back().push_back({std::move(w), s});
    }
  }
  if (!have_alphabet || !have_window) throw InputError(kStage, "rule set needs alphabet and window");
  if (blocks.empty()) throw InputError(kStage, "rule set has no patterns");
  for (const auto& b : blocks)
    for (const auto& [w, s] : b) {
      if (static_cast<int>(w.size()) > rs.window) throw InputError(kStage, "offset longer than the window");
      if (rs.offset_index(w) < 0) rs.offsets.push_back(w);
    }
  for (const auto& b : blocks) {
    std::vector<int> pat(rs.offsets.size(), -1);
    for (const auto& [w, s] : b) {
      auto& slot = pat[static_cast<std::size_t>(rs.offset_index(w))];
      if (slot >= 0 && slot != s) throw InputError(kStage, "pattern assigns two symbols to one offset");
      slot = s;
    }
    rs.patterns.push_back(std::move(pat));
  }
  return rs;
}

PatternRuleSet PatternRuleSet::from_file(const std::string& path, const Presentation& p) {
  std::ifstream f(path);
  if (!f) throw InputError(kStage, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), p);
}

std::vector<Violation> check_pattern_rules(const Configuration& config, const PatternRuleSet& rules,
                                           const BallTable& domain) {
  if (static_cast<int>(config.size()) != domain.size())
    throw InputError(kStage, "configuration does not cover the domain");
  std::vector<Violation> out;
  const bool exact = rules.allow && std::all_of(rules.patterns.begin(), rules.patterns.end(), [](const auto& p) {
                       return std::find(p.begin(), p.end(), -1) == p.end();
                     });
  std::unordered_set<std::string> table;
  if (exact)
    for (const auto& p : rules.patterns) table.insert(key_of(p));
  std::vector<int> seen(rules.offsets.size());
  for (int c = 0; c < domain.size(); ++c) {
    if (domain.level(c) + rules.window > domain.radius()) continue;
    bool defined = true;
    for (std::size_t i = 0; i < rules.offsets.size() && defined; ++i) {
      const int y = domain.walk(c, rules.offsets[i]);
      defined = y >= 0 && config[static_cast<std::size_t>(y)] >= 0;
      if (defined) seen[i] = config[static_cast<std::size_t>(y)];
    }
    if (!defined) continue;
    auto matches = [&](const std::vector<int>& p) {
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] >= 0 && p[i] != seen[i]) return false;
      return true;
    };
    if (rules.allow) {
      const bool ok = exact ? table.count(key_of(seen)) > 0
                            : std::any_of(rules.patterns.begin(), rules.patterns.end(), matches);
      if (!ok) out.push_back({"pattern", c, "window matches no allowed pattern"});
    } else {
      for (std::size_t k = 0; k < rules.patterns.size(); ++k)
        if (matches(rules.patterns[k])) {
          out.push_back({"pattern", c, "forbidden pattern " + std::to_string(k)});
          break;
        }
    }
  }
  return out;
}

PatternRuleSet shelling_rule_set(const GroupOracle& oracle, const ShortlexFsa& fsa, int rho) {
  if (rho < 1) throw ConfigError(kStage, "need rho >= 1");
  const int m = 4 * rho + 3;
  PatternRuleSet rs;
  rs.window = rho;
  rs.allow = true;
  for (int q = 0; q < fsa.num_states(); ++q)
    for (int r = 0; r < m; ++r) rs.alphabet.push_back(std::to_string(q) + ":" + std::to_string(r));
  const BallTable window = oracle.build_ball(rho);
  for (int x = 0; x < window.size(); ++x) rs.offsets.push_back(window.word(x));
  std::set<std::vector<std::pair<int, int>>> shapes;  // (state, relative height) per offset
  for (const ModelWindow& mw : enumerate_model_windows(oracle, fsa, rho)) {
    std::vector<std::pair<int, int>> shape;
    for (std::size_t x = 0; x < mw.state.size(); ++x) shape.push_back({mw.state[x], mw.offset[x]});
    shapes.insert(std::move(shape));
  }
  for (const auto& shape : shapes)
    for (int t = 0; t < m; ++t) {
      std::vector<int> pat;
      for (auto [q, dh] : shape) pat.push_back(q * m + residue(dh + t, m));
      rs.patterns.push_back(std::move(pat));
    }
  return rs;
}

Configuration shelling_config(const ShellingPatch& patch, const PatternRuleSet& rules) {
  const int m = 4 * rules.window + 3;
  const int nq = static_cast<int>(rules.alphabet.size()) / m;
  Configuration c(static_cast<std::size_t>(patch.num_cells()), -1);
  for (int x = 0; x < patch.num_cells(); ++x) {
    const int q = patch.state[static_cast<std::size_t>(x)];
    if (q >= 0 && q < nq) c[static_cast<std::size_t>(x)] = q * m + residue(patch.h[static_cast<std::size_t>(x)], m);
  }
  return c;
}

TorsionColoring torsion_coloring(const GroupOracle& oracle, int N, int radius) {
  if (N < 1) throw ConfigError(kStage, "colouring distance must be positive");
  if (radius < N) throw ConfigError(kStage, "colouring radius must be at least N");
  const BallTable big = oracle.build_ball(radius + N);
  const BallTable near = big.truncated(N);
  TorsionColoring tc;
  tc.N = N;
  tc.domain = big.truncated(radius);
  tc.color.assign(static_cast<std::size_t>(tc.domain.size()), -1);
  std::vector<int> cells(static_cast<std::size_t>(near.size()));
  std::vector<char> used;
  for (int g = 0; g < tc.domain.size(); ++g) {
    used.assign(static_cast<std::size_t>(near.size()) + 1, 0);
    for (int x = 0; x < near.size(); ++x) {
      const int p = x == 0 ? g : cells[static_cast<std::size_t>(near.parent(x))];
      cells[static_cast<std::size_t>(x)] = x == 0 ? g : p < 0 ? -1 : big.neighbor(p, near.last(x));
      const int y = cells[static_cast<std::size_t>(x)];
      if (x > 0 && y >= 0 && y < tc.domain.size() && tc.color[static_cast<std::size_t>(y)] >= 0)
        used[static_cast<std::size_t>(tc.color[static_cast<std::size_t>(y)])] = 1;
    }
    int c = 0;
    while (used[static_cast<std::size_t>(c)]) ++c;
    tc.color[static_cast<std::size_t>(g)] = c;
    tc.num_colors = std::max(tc.num_colors, c + 1);
  }
  return tc;
}

long coloring_conflicts(const GroupOracle& oracle, const TorsionColoring& tc) {
  const BallTable big = oracle.build_ball(tc.domain.radius() + tc.N);
  const BallTable near = big.truncated(tc.N);
  std::vector<int> cells(static_cast<std::size_t>(near.size()));
  long bad = 0;
  for (int g = 0; g < tc.domain.size(); ++g) {
    cells[0] = g;
    for (int x = 1; x < near.size(); ++x) {
      const int p = cells[static_cast<std::size_t>(near.parent(x))];
      cells[static_cast<std::size_t>(x)] = p < 0 ? -1 : big.neighbor(p, near.last(x));
      const int y = cells[static_cast<std::size_t>(x)];
      if (y > g && y < tc.domain.size() && tc.color[static_cast<std::size_t>(y)] == tc.color[static_cast<std::size_t>(g)])
        ++bad;
    }
  }
  return bad;
}

PatternRuleSet coloring_rule_set(const GroupOracle& oracle, int N, int num_colors) {
  PatternRuleSet rs;
  rs.window = N;
  rs.allow = false;
  for (int c = 0; c < num_colors; ++c) rs.alphabet.push_back(std::to_string(c));
  const BallTable near = oracle.build_ball(N);
  for (int x = 0; x < near.size(); ++x) rs.offsets.push_back(near.word(x));
  for (int c = 0; c < num_colors; ++c)
    for (int x = 1; x < near.size(); ++x) {
      std::vector<int> pat(rs.offsets.size(), -1);
      pat[0] = c;
      pat[static_cast<std::size_t>(x)] = c;
      rs.patterns.push_back(std::move(pat));
    }
  return rs;
}

ProductConfig product_config(const Configuration& c1, const Configuration& c2) {
  if (c1.size() != c2.size()) throw InputError(kStage, "product of configurations on different domains");
  return {c1, c2};
}

std::vector<Violation> check_product_rules(const ProductConfig& config, const PatternRuleSet& r1,
                                           const PatternRuleSet& r2, const BallTable& domain) {
  std::vector<Violation> out;
  for (auto& v : check_pattern_rules(config.first, r1, domain)) out.push_back({"first/" + v.kind, v.cell, v.detail});
  for (auto& v : check_pattern_rules(config.second, r2, domain)) out.push_back({"second/" + v.kind, v.cell, v.detail});
  return out;
}

}  // namespace hypsft
