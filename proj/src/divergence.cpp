#include "hypsft/divergence.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hypsft/errors.hpp"

namespace hypsft {

namespace {

constexpr const char* kStage = "divergence";

std::vector<std::vector<int>> successor_lists(const ShellingPatch& patch) {
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(patch.num_cells()));
  for (int c = 0; c < patch.num_cells(); ++c) {
    const int p = patch.predecessor(c);
    if (p >= 0 && p != c) kids[static_cast<std::size_t>(p)].push_back(c);
  }
  return kids;
}

// Cells g*x for x in the window ball, in window order (so by distance);
// -1 where the walk leaves the patch, which only happens near the outer
// sphere.
void near_cells(const ShellingPatch& patch, const BallTable& window, int from, std::vector<int>& out) {
  out.resize(static_cast<std::size_t>(window.size()));
  out[0] = from;
  for (int x = 1; x < window.size(); ++x) {
    const int p = out[static_cast<std::size_t>(window.parent(x))];
    out[static_cast<std::size_t>(x)] = p < 0 ? -1 : patch.domain.neighbor(p, window.last(x));
  }
}

}  // namespace

long DivergenceGraph::num_edges() const {
  long e = 0;
  for (const auto& a : adj) e += static_cast<long>(a.size());
  return e / 2;
}

int DivergenceGraph::index_of(int cell) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), cell);
  return it != vertices.end() && *it == cell ? static_cast<int>(it - vertices.begin()) : -1;
}

DivergenceGraph build_divergence_graph(const ShellingPatch& patch, const std::vector<char>& mu_positive, int level,
                                       int depth) {
  DivergenceGraph g;
  g.level = level;
  g.delta = patch.delta;
  const int top = patch.h.empty() ? level : *std::max_element(patch.h.begin(), patch.h.end());
  if (depth < 0) depth = std::max(0, top - level);
  if (level + depth > top)
    throw ConfigError(kStage, "patch has no cells at level " + std::to_string(level + depth) + " for depth " +
                                  std::to_string(depth));
  g.depth = depth;
  const int reach = 2 * patch.delta;
  for (int c = 0; c < patch.num_cells(); ++c) {
    if (patch.h[static_cast<std::size_t>(c)] != level) continue;
    g.level_cells.push_back(c);
    const int q = patch.state[static_cast<std::size_t>(c)];
    if (q >= 0 && q < static_cast<int>(mu_positive.size()) && mu_positive[static_cast<std::size_t>(q)])
      g.vertices.push_back(c);
  }
  g.adj.resize(g.vertices.size());
  g.interior.resize(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    g.interior[i] = patch.domain.level(g.vertices[i]) + depth + reach <= patch.radius;

  const auto kids = successor_lists(patch);
  const BallTable window = patch.domain.truncated(reach);
  std::vector<int> near;
  std::vector<int> stamp(static_cast<std::size_t>(patch.num_cells()), -1);
  int epoch = 0;
  // first depth at which the pair separates (depth + 1 if never)
  auto separation = [&](int a, int b) {
    std::vector<int> sa{a}, sb{b};
    for (int n = 0; n <= depth; ++n) {
      if (sa.empty() || sb.empty()) return depth + 1;  // truncated: no evidence
      ++epoch;
      for (int c : sb) stamp[static_cast<std::size_t>(c)] = epoch;
      bool close = false;
      for (int c : sa) {
        if (reach == 0) {
          close = stamp[static_cast<std::size_t>(c)] == epoch;
        } else {
          near_cells(patch, window, c, near);
          for (int y : near)
            if (y >= 0 && stamp[static_cast<std::size_t>(y)] == epoch) {
              close = true;
              break;
            }
        }
        if (close) break;
      }
      if (!close) return n;
      std::vector<int> na, nb;
      for (int c : sa) na.insert(na.end(), kids[static_cast<std::size_t>(c)].begin(), kids[static_cast<std::size_t>(c)].end());
      for (int c : sb) nb.insert(nb.end(), kids[static_cast<std::size_t>(c)].begin(), kids[static_cast<std::size_t>(c)].end());
      sa.swap(na);
      sb.swap(nb);
    }
    return depth + 1;
  };

  long previous = 0;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    near_cells(patch, window, g.vertices[i], near);
    const std::vector<int> around = near;
    for (int c : around) {
      const int j = c < 0 ? -1 : g.index_of(c);
      if (j <= static_cast<int>(i)) continue;
      const int sep = separation(g.vertices[i], c);
      if (sep >= depth) ++previous;
      if (sep > depth) {
        g.adj[i].push_back(j);
        g.adj[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
      }
    }
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  g.edges_previous_depth = depth > 0 ? previous : -1;
  return g;
}

bool DivergenceReport::ok() const {
  return symmetric && max_edge_length <= edge_bound && max_degree <= degree_bound && dense && interior_connected &&
         predecessor_failures == 0 && successor_failures == 0;
}

std::string DivergenceReport::to_text() const {
  std::ostringstream out;
  out << "level: " << level << "\n"
      << "depth: " << depth << " (edges at depth-1: " << edges_previous_depth << ", at depth: " << edges << ")\n"
      << "vertices: " << vertices << " interior: " << interior_vertices << " boundary: " << boundary_vertices << "\n"
      << "symmetric: " << (symmetric ? "yes" : "no") << "\n"
      << "max_edge_length: " << max_edge_length << " bound " << edge_bound << "\n"
      << "max_degree: " << max_degree << " bound " << degree_bound << "\n"
      << "density_gap: " << density_gap << " (4delta-dense: " << (dense ? "yes" : "no") << ")\n"
      << "interior_components: " << interior_components
      << " (connected: " << (interior_connected ? "yes" : "no") << "; boundary vertices may be truncated)\n"
      << "predecessor_failures: " << predecessor_failures << "\n"
      << "successor_failures: " << successor_failures << "\n"
      << "ok: " << (ok() ? "yes" : "no") << "\n";
  return out.str();
}

DivergenceReport check_divergence_properties(const ShellingPatch& patch, const DivergenceGraph& graph,
                                             int ball_2delta_size, const DivergenceGraph* lower,
                                             const DivergenceGraph* upper) {
  DivergenceReport r;
  r.level = graph.level;
  r.depth = graph.depth;
  r.delta = graph.delta;
  r.vertices = static_cast<int>(graph.vertices.size());
  r.edges = graph.num_edges();
  r.edges_previous_depth = graph.edges_previous_depth;
  r.edge_bound = 2 * graph.delta;
  r.degree_bound = ball_2delta_size;
  const BallTable window = patch.domain.truncated(r.edge_bound);
  std::vector<int> near;
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    if (graph.interior[i]) ++r.interior_vertices;
    else ++r.boundary_vertices;
    r.max_degree = std::max(r.max_degree, static_cast<int>(graph.adj[i].size()));
    for (int j : graph.adj[i]) {
      if (j == static_cast<int>(i) || !std::binary_search(graph.adj[static_cast<std::size_t>(j)].begin(),
                                                          graph.adj[static_cast<std::size_t>(j)].end(), static_cast<int>(i)))
        r.symmetric = false;
      if (j < static_cast<int>(i)) continue;
      // measured from both ends: a walk from one end may leave the patch
      int d = r.edge_bound + 1;
      for (auto [from, to] : {std::pair{i, static_cast<std::size_t>(j)}, std::pair{static_cast<std::size_t>(j), i}}) {
        near_cells(patch, window, graph.vertices[from], near);
        auto it = std::find(near.begin(), near.end(), graph.vertices[to]);
        if (it != near.end()) d = std::min(d, window.level(static_cast<int>(it - near.begin())));
      }
      r.max_edge_length = std::max(r.max_edge_length, d);
    }
  }

  // density: multi-source search from the vertices, up to 4 delta + 1
  const int dense_r = 4 * graph.delta;
  {
    std::vector<int> dist(static_cast<std::size_t>(patch.num_cells()), -1);
    std::vector<int> frontier = graph.vertices;
    for (int v : frontier) dist[static_cast<std::size_t>(v)] = 0;
    for (int d = 0; d <= dense_r && !frontier.empty(); ++d) {
      std::vector<int> next;
      for (int x : frontier)
        for (Letter s = 0; s < patch.domain.num_generators(); ++s) {
          const int y = patch.domain.neighbor(x, s);
          if (y >= 0 && dist[static_cast<std::size_t>(y)] < 0) {
            dist[static_cast<std::size_t>(y)] = d + 1;
            next.push_back(y);
          }
        }
      frontier.swap(next);
    }
    for (int c : graph.level_cells) {
      if (patch.domain.level(c) + dense_r > patch.radius) continue;  // balls leave the patch
      const int d = dist[static_cast<std::size_t>(c)];
      const int gap = d < 0 || d > dense_r ? dense_r + 1 : d;
      r.density_gap = std::max(r.density_gap, gap);
      if (gap > dense_r) r.dense = false;
    }
  }

  // components meeting the interior
  {
    std::vector<int> comp(graph.vertices.size(), -1);
    int count = 0;
    for (std::size_t s = 0; s < graph.vertices.size(); ++s) {
      if (comp[s] >= 0) continue;
      std::vector<int> stack{static_cast<int>(s)};
      comp[s] = count;
      bool touches = false;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        touches = touches || graph.interior[static_cast<std::size_t>(v)];
        for (int w : graph.adj[static_cast<std::size_t>(v)])
          if (comp[static_cast<std::size_t>(w)] < 0) {
            comp[static_cast<std::size_t>(w)] = count;
            stack.push_back(w);
          }
      }
      if (touches) ++r.interior_components;
      ++count;
    }
    r.interior_connected = r.interior_components <= 1;
  }

  // edge {v, w}: predecessors coincide or are adjacent one level down; some
  // successors are adjacent one level up
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    for (int j : graph.adj[i]) {
      if (j < static_cast<int>(i)) continue;
      const int v = graph.vertices[i], w = graph.vertices[static_cast<std::size_t>(j)];
      const bool inner = graph.interior[i] && graph.interior[static_cast<std::size_t>(j)];
      if (lower && inner) {
        const int pv = patch.predecessor(v), pw = patch.predecessor(w);
        const int a = pv >= 0 ? lower->index_of(pv) : -1, b = pw >= 0 ? lower->index_of(pw) : -1;
        if (a >= 0 && b >= 0 && pv != pw &&
            !std::binary_search(lower->adj[static_cast<std::size_t>(a)].begin(), lower->adj[static_cast<std::size_t>(a)].end(), b))
          ++r.predecessor_failures;
      }
      if (upper && inner) {
        bool found = false;
        for (std::size_t k = 0; k < upper->vertices.size() && !found; ++k) {
          if (patch.predecessor(upper->vertices[k]) != v) continue;
          for (int l : upper->adj[k])
            if (patch.predecessor(upper->vertices[static_cast<std::size_t>(l)]) == w) {
              found = true;
              break;
            }
        }
        if (!found) ++r.successor_failures;
      }
    }
  }
  return r;
}

std::string export_adjacency(const ShellingPatch& patch, const DivergenceGraph& graph, const Presentation& p) {
  std::ostringstream out;
  out << "# divergence graph level=" << graph.level << " depth=" << graph.depth << "\n";
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    out << p.format_word(patch.domain.word(graph.vertices[i])) << ":";
    for (std::size_t k = 0; k < graph.adj[i].size(); ++k)
      out << (k ? ", " : " ") << p.format_word(patch.domain.word(graph.vertices[static_cast<std::size_t>(graph.adj[i][k])]));
    out << "\n";
  }
  return out.str();
}

std::string export_dot(const ShellingPatch& patch, const DivergenceGraph& graph, const Presentation& p) {
  std::ostringstream out;
  out << "graph divergence_" << (graph.level < 0 ? "m" : "") << std::abs(graph.level) << " {\n";
  for (std::size_t i = 0; i < graph.vertices.size(); ++i)
    out << "  v" << graph.vertices[i] << " [label=\"" << p.format_word(patch.domain.word(graph.vertices[i])) << "\""
        << (graph.interior[i] ? "" : ", style=dashed") << "];\n";
  for (std::size_t i = 0; i < graph.vertices.size(); ++i)
    for (int j : graph.adj[i])
      if (j > static_cast<int>(i)) out << "  v" << graph.vertices[i] << " -- v" << graph.vertices[static_cast<std::size_t>(j)] << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace hypsft
