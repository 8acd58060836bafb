#include "hypsft/fsa.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "hypsft/ball.hpp"
#include "hypsft/oracle.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "shortlex-fsa";
constexpr std::size_t kMaxSubsetStates = 500000;

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
    return h;
  }
};

// Moore refinement on a partial DFA where every state accepts; then drops
// unreachable states and renumbers breadth-first from the start.
ShortlexFsa minimize(const ShortlexFsa& in) {
  const int n = in.num_states();
  const int ng = in.num_generators();
  std::vector<int> cls(static_cast<std::size_t>(n), 0);
  int num_classes = 1;
  while (true) {
    std::map<std::vector<int>, int> ids;
    std::vector<int> next(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      std::vector<int> key{cls[static_cast<std::size_t>(q)]};
      for (Letter s = 0; s < ng; ++s) {
        int t = in.next(q, s);
        key.push_back(t < 0 ? -1 : cls[static_cast<std::size_t>(t)]);
      }
      next[static_cast<std::size_t>(q)] =
          ids.emplace(std::move(key), static_cast<int>(ids.size())).first->second;
    }
    const int count = static_cast<int>(ids.size());
    cls = std::move(next);
    if (count == num_classes) break;
    num_classes = count;
  }
  std::vector<int> order(static_cast<std::size_t>(num_classes), -1);
  std::vector<int> rep;
  std::vector<int> queue{cls[static_cast<std::size_t>(in.start())]};
  order[static_cast<std::size_t>(queue[0])] = 0;
  rep.push_back(in.start());
  std::vector<int> representative(static_cast<std::size_t>(num_classes), -1);
  for (int q = 0; q < n; ++q)
    if (representative[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] < 0)
      representative[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] = q;
  std::vector<int> trans;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const int q = representative[static_cast<std::size_t>(queue[i])];
    for (Letter s = 0; s < ng; ++s) {
      int t = in.next(q, s);
      if (t < 0) {
        trans.push_back(-1);
        continue;
      }
      int c = cls[static_cast<std::size_t>(t)];
      if (order[static_cast<std::size_t>(c)] < 0) {
        order[static_cast<std::size_t>(c)] = static_cast<int>(queue.size());
        queue.push_back(c);
      }
      trans.push_back(order[static_cast<std::size_t>(c)]);
    }
  }
  return ShortlexFsa(static_cast<int>(queue.size()), ng, 0, std::move(trans));
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ShortlexFsa::ShortlexFsa(int num_states, int num_generators, int start, std::vector<int> transitions)
    : num_states_(num_states), ngen_(num_generators), start_(start), trans_(std::move(transitions)) {
  if (num_states_ < 1) throw InputError(kStage, "automaton needs at least one state");
  if (start_ < 0 || start_ >= num_states_) throw InputError(kStage, "start state out of range");
  if (trans_.size() != static_cast<std::size_t>(num_states_) * static_cast<std::size_t>(ngen_))
    throw InputError(kStage, "transition table has the wrong size");
  for (int t : trans_)
    if (t < -1 || t >= num_states_) throw InputError(kStage, "transition target out of range");
}

int ShortlexFsa::run(std::span<const Letter> w) const {
  int q = start_;
  for (Letter s : w) {
    if (s < 0 || s >= ngen_) return -1;
    q = next(q, s);
    if (q < 0) return -1;
  }
  return q;
}

bool ShortlexFsa::is_pruned() const {
  std::vector<char> seen(static_cast<std::size_t>(num_states_), 0);
  std::vector<int> stack{start_};
  seen[static_cast<std::size_t>(start_)] = 1;
  int count = 1;
  while (!stack.empty()) {
    int q = stack.back();
    stack.pop_back();
    for (Letter s = 0; s < ngen_; ++s) {
      int t = next(q, s);
      if (t >= 0 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        ++count;
        stack.push_back(t);
      }
    }
  }
  return count == num_states_;
}

int ShortlexFsa::num_transitions() const {
  return static_cast<int>(std::count_if(trans_.begin(), trans_.end(), [](int t) { return t >= 0; }));
}

std::string ShortlexFsa::to_text(const Presentation& p) const {
  std::ostringstream out;
  out << "states: " << num_states_ << "\n";
  out << "start: " << start_ << "\n";
  for (int q = 0; q < num_states_; ++q)
    for (Letter s = 0; s < ngen_; ++s)
      if (int t = next(q, s); t >= 0) out << "trans: " << q << ' ' << p.names()[static_cast<std::size_t>(s)] << ' ' << t << "\n";
  return out.str();
}

ShortlexFsa ShortlexFsa::parse(std::string_view text, const Presentation& p) {
  int states = -1, start = -1;
  const int ng = p.num_generators();
  std::vector<int> trans;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError(kStage, "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) fail("expected 'key: value'");
    const std::string key = trim(std::string_view(line).substr(0, colon));
    std::istringstream fields(line.substr(colon + 1));
    if (key == "states") {
      if (!(fields >> states) || states < 1) fail("bad state count");
      trans.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(ng), -1);
    } else if (key == "start") {
      if (!(fields >> start)) fail("bad start state");
    } else if (key == "trans") {
      if (states < 0) fail("'trans' before 'states'");
      int from = -1, to = -1;
      std::string gen;
      if (!(fields >> from >> gen >> to)) fail("expected 'trans: <state> <generator> <state>'");
      const auto& names = p.names();
      auto it = std::find(names.begin(), names.end(), gen);
      if (it == names.end()) fail("unknown generator '" + gen + "'");
      if (from < 0 || from >= states || to < 0 || to >= states) fail("state out of range");
      auto& slot = trans[static_cast<std::size_t>(from) * static_cast<std::size_t>(ng) +
                         static_cast<std::size_t>(it - names.begin())];
      if (slot >= 0) fail("nondeterministic transition");
      slot = to;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (states < 0 || start < 0) throw InputError(kStage, "missing 'states' or 'start'");
  return ShortlexFsa(states, ng, start, std::move(trans));
}

ShortlexFsa ShortlexFsa::from_file(const std::string& path, const Presentation& p) {
  std::ifstream in(path);
  if (!in) throw InputError(kStage, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), p);
}

ShortlexFsa ShortlexFsa::without_transition(int state, Letter s) const {
  ShortlexFsa copy = *this;
  copy.trans_[static_cast<std::size_t>(state) * static_cast<std::size_t>(ngen_) +
              static_cast<std::size_t>(s)] = -1;
  return copy;
}

ShortlexFsa build_shortlex_fsa(const BallTable& ball, int lookahead) {
  if (lookahead < 1) throw InputError(kStage, "lookahead must be positive");
  const int r = ball.radius();
  if (r < lookahead + 2) throw InputError(kStage, "radius must be at least lookahead + 2");
  const int ng = ball.num_generators();
  const int n = ball.size();

  // sig[g] after round d: id of the depth-d truncated shortlex subtree at g,
  // valid for level(g) <= r - d.
  std::vector<int> sig(static_cast<std::size_t>(n), 0);
  for (int d = 1; d <= lookahead; ++d) {
    std::unordered_map<std::vector<int>, int, VecHash> ids;
    const int limit = ball.size_upto(r - d);
    std::vector<int> next(static_cast<std::size_t>(limit));
    std::vector<int> key(static_cast<std::size_t>(ng));
    for (int g = 0; g < limit; ++g) {
      for (Letter s = 0; s < ng; ++s) {
        int c = ball.neighbor(g, s);
        key[static_cast<std::size_t>(s)] = ball.is_tree_child(g, s, c) ? sig[static_cast<std::size_t>(c)] : -1;
      }
      next[static_cast<std::size_t>(g)] = ids.emplace(key, static_cast<int>(ids.size())).first->second;
    }
    std::copy(next.begin(), next.end(), sig.begin());
  }

  // States are signatures of the core; transitions must agree across it.
  const int core = ball.size_upto(r - lookahead - 1);
  std::unordered_map<int, int> state_of;
  std::vector<int> trans;
  bool complete = true;
  auto state = [&](int g) {
    auto [it, fresh] = state_of.emplace(sig[static_cast<std::size_t>(g)], static_cast<int>(state_of.size()));
    if (fresh) trans.resize(trans.size() + static_cast<std::size_t>(ng), -2);
    return it->second;
  };
  for (int g = 0; g < core; ++g) {
    const int q = state(g);
    for (Letter s = 0; s < ng; ++s) {
      int c = ball.neighbor(g, s);
      int t = ball.is_tree_child(g, s, c) ? state(c) : -1;
      int& slot = trans[static_cast<std::size_t>(q) * static_cast<std::size_t>(ng) + static_cast<std::size_t>(s)];
      if (slot == -2) slot = t;
      else if (slot != t) complete = false;
    }
  }
  // states first seen on the boundary of the core have unknown transitions
  for (int& t : trans)
    if (t == -2) {
      complete = false;
      t = -1;
    }
  ShortlexFsa raw(static_cast<int>(state_of.size()), ng, 0, std::move(trans));
  ShortlexFsa fsa = minimize(raw);
  if (!complete)
    throw ConstructionIncomplete("cone types did not stabilize on a ball of radius " + std::to_string(r) +
                                     " with lookahead " + std::to_string(lookahead),
                                 fsa);
  return fsa;
}

ShortlexFsa build_shortlex_fsa(const GroupOracle& oracle, int lookahead, int radius) {
  if (lookahead < 0 || radius < 1) throw InputError(kStage, "lookahead and radius must be positive");
  if (lookahead > oracle.word_difference_bound()) {
    OracleOptions opts = oracle.options();
    opts.word_difference_bound = lookahead;
    GroupOracle wider(oracle.presentation(), oracle.mode(), opts);
    return build_shortlex_fsa(wider, 0, radius);
  }
  // Word acceptor over word differences.  A state is the set of differences
  // u^-1 v over comparison words v of the same length (tagged with whether
  // v is already lexicographically smaller) and over strictly shorter padded
  // v.  A word is rejected once some comparison word reaches the same
  // element and is shorter or lexicographically smaller.
  const int ng = oracle.presentation().num_generators();
  const int pad = ng;
  const int nd = oracle.num_differences();
  std::unordered_map<std::vector<int>, int, VecHash> ids;
  std::vector<std::vector<int>> states;
  std::vector<int> trans;
  auto intern = [&](std::vector<int>&& key) {
    auto [it, fresh] = ids.emplace(key, static_cast<int>(states.size()));
    if (fresh) {
      states.push_back(std::move(key));
      trans.resize(trans.size() + static_cast<std::size_t>(ng), -1);
    }
    return it->second;
  };
  intern(std::vector<int>{0});  // (identity, not smaller)
  std::vector<char> mark(static_cast<std::size_t>(3 * nd), 0);
  std::vector<int> key;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states.size() > kMaxSubsetStates) {
      throw ConstructionIncomplete("word acceptor exceeded " + std::to_string(kMaxSubsetStates) + " states",
                                   ShortlexFsa(1, ng, 0, std::vector<int>(static_cast<std::size_t>(ng), -1)));
    }
    for (Letter a = 0; a < ng; ++a) {
      key.clear();
      bool reject = false;
      for (int code : states[i]) {
        const bool padded = code >= 2 * nd;
        const int e = padded ? code - 2 * nd : code / 2;
        const bool smaller = !padded && (code & 1);
        if (!padded) {
          for (Letter b = 0; b < ng; ++b) {
            if (!smaller && b > a) continue;
            int e2 = oracle.diff_step(e, a, b);
            if (e2 < 0) continue;
            const bool s2 = smaller || b < a;
            if (e2 == 0 && s2) reject = true;
            int c = 2 * e2 + (s2 ? 1 : 0);
            if (!mark[static_cast<std::size_t>(c)]) {
              mark[static_cast<std::size_t>(c)] = 1;
              key.push_back(c);
            }
          }
        }
        int e2 = oracle.diff_step(e, a, pad);
        if (e2 == 0) reject = true;
        if (e2 >= 0 && !mark[static_cast<std::size_t>(2 * nd + e2)]) {
          mark[static_cast<std::size_t>(2 * nd + e2)] = 1;
          key.push_back(2 * nd + e2);
        }
      }
      for (int c : key) mark[static_cast<std::size_t>(c)] = 0;
      if (reject) continue;
      std::sort(key.begin(), key.end());
      const int t = intern(std::vector<int>(key));
      trans[i * static_cast<std::size_t>(ng) + static_cast<std::size_t>(a)] = t;
    }
  }
  ShortlexFsa fsa = minimize(ShortlexFsa(static_cast<int>(states.size()), ng, 0, std::move(trans)));

  // certify against the exact ball as far as memory allows
  int vr = radius;
  const BallTable& boot = oracle.bootstrap_ball();
  vr = std::min(vr, std::max(boot.radius(), 6));
  FsaValidationReport rep = validate_fsa(fsa, oracle, vr);
  if (!rep.ok())
    throw ConstructionIncomplete("word acceptor disagrees with the ball of radius " + std::to_string(vr) +
                                     ": " + rep.violations.front().detail,
                                 fsa);
  return fsa;
}

Word normal_form(const ShortlexFsa& fsa, const GroupOracle& oracle, std::span<const Letter> w) {
  Word v = oracle.normal_form(w, &fsa);
  if (!fsa.accepts(v)) throw Error(kStage, "normal form rejected by the automaton");
  return v;
}

std::vector<std::uint64_t> sphere_counts(const ShortlexFsa& fsa, int max_n) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> cur(static_cast<std::size_t>(fsa.num_states()), 0), nxt;
  cur[static_cast<std::size_t>(fsa.start())] = 1;
  std::vector<std::uint64_t> out;
  for (int n = 0; n <= max_n; ++n) {
    std::uint64_t total = 0;
    for (auto c : cur) total = (kMax - total < c) ? kMax : total + c;
    out.push_back(total);
    nxt.assign(cur.size(), 0);
    for (int q = 0; q < fsa.num_states(); ++q) {
      const auto c = cur[static_cast<std::size_t>(q)];
      if (!c) continue;
      for (Letter s = 0; s < fsa.num_generators(); ++s) {
        int t = fsa.next(q, s);
        if (t < 0) continue;
        auto& slot = nxt[static_cast<std::size_t>(t)];
        slot = (kMax - slot < c) ? kMax : slot + c;
      }
    }
    cur.swap(nxt);
  }
  return out;
}

std::uint64_t sphere_count(const ShortlexFsa& fsa, int n) {
  if (n < 0) throw InputError(kStage, "negative length");
  return sphere_counts(fsa, n).back();
}

std::string FsaValidationReport::to_text() const {
  std::ostringstream out;
  out << "validated_radius: " << radius << "\n";
  for (std::size_t n = 0; n < path_counts.size(); ++n)
    out << "n=" << n << " paths=" << path_counts[n]
        << " sphere=" << (n < sphere_sizes.size() ? sphere_sizes[n] : -1) << "\n";
  out << "violations: " << violations.size() << "\n";
  for (const auto& v : violations) {
    const char* kind = v.kind == FsaViolation::Kind::CountMismatch        ? "count-mismatch"
                       : v.kind == FsaViolation::Kind::AcceptedNonShortlex ? "accepted-non-shortlex"
                                                                            : "rejected-shortlex";
    out << "  " << kind << " n=" << v.length << " " << v.detail << "\n";
  }
  out << "note: agreement is certified only up to the validated radius\n";
  return out.str();
}

FsaValidationReport validate_fsa(const ShortlexFsa& fsa, const BallTable& ball, const Presentation& p) {
  FsaValidationReport rep;
  if (fsa.num_generators() != p.num_generators())
    throw InputError(kStage, "automaton alphabet does not match the presentation");
  rep.radius = ball.radius();
  rep.path_counts = sphere_counts(fsa, rep.radius);
  rep.sphere_sizes = ball.sphere_sizes();
  for (int n = 0; n <= rep.radius; ++n)
    if (rep.path_counts[static_cast<std::size_t>(n)] != static_cast<std::uint64_t>(rep.sphere_sizes[static_cast<std::size_t>(n)]))
      rep.violations.push_back({FsaViolation::Kind::CountMismatch, n,
                                "paths " + std::to_string(rep.path_counts[static_cast<std::size_t>(n)]) +
                                    " vs sphere " + std::to_string(rep.sphere_sizes[static_cast<std::size_t>(n)])});

  // Shortlex words of the ball are exactly the tree paths; walk the tree and
  // the automaton in lockstep.
  std::vector<int> fstate(static_cast<std::size_t>(ball.size()), -1);
  fstate[0] = fsa.start();
  constexpr std::size_t kMaxReports = 20;
  for (int g = 0; g < ball.size(); ++g) {
    const int q = fstate[static_cast<std::size_t>(g)];
    if (q < 0 || ball.level(g) == rep.radius) continue;
    for (Letter s = 0; s < p.num_generators(); ++s) {
      const int c = ball.neighbor(g, s);
      const int t = fsa.next(q, s);
      const bool tree = ball.is_tree_child(g, s, c);
      if (tree) fstate[static_cast<std::size_t>(c)] = t;
      if (tree == (t >= 0) || rep.violations.size() >= kMaxReports) continue;
      Word w = ball.word(g);
      w.push_back(s);
      rep.violations.push_back({tree ? FsaViolation::Kind::RejectedShortlex : FsaViolation::Kind::AcceptedNonShortlex,
                                static_cast<int>(w.size()), p.format_word(w)});
    }
  }
  return rep;
}

FsaValidationReport validate_fsa(const ShortlexFsa& fsa, const GroupOracle& oracle, int radius) {
  return validate_fsa(fsa, oracle.build_ball(radius), oracle.presentation());
}

}  // namespace hypsft
