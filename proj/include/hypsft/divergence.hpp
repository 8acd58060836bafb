#pragma once

#include <string>
#include <vector>

#include "hypsft/shelling.hpp"

namespace hypsft {

/// Divergence graph of one horosphere: mu-positive cells of the level, with
/// an edge when the successor sets P^-n{g1}, P^-n{g2} stay within 2 delta
/// of each other for every n <= depth.
struct DivergenceGraph {
  int level = 0;
  int depth = 0;
  int delta = 0;
  std::vector<int> vertices;            // cells, ascending
  std::vector<std::vector<int>> adj;    // indices into vertices, ascending
  std::vector<char> interior;           // depth-D future plus a 2 delta margin inside the patch
  std::vector<int> level_cells;         // every cell with h == level
  long edges_previous_depth = -1;       // edge count at depth - 1 (stability report)

  long num_edges() const;
  int index_of(int cell) const;  // -1 if not a vertex
};

/// mu_positive[q] says whether mu(q) > 0.  depth < 0 picks the largest depth
/// the patch supports for this level.
DivergenceGraph build_divergence_graph(const ShellingPatch& patch, const std::vector<char>& mu_positive, int level,
                                       int depth = -1);

struct DivergenceReport {
  int level = 0, depth = 0, delta = 0;
  int vertices = 0, interior_vertices = 0, boundary_vertices = 0;
  long edges = 0;
  long edges_previous_depth = -1;
  bool symmetric = true;
  int max_edge_length = 0, edge_bound = 0;
  int max_degree = 0, degree_bound = 0;
  int density_gap = 0;        // farthest interior level cell from a vertex (capped at 4 delta + 1)
  bool dense = true;          // every interior level cell within 4 delta of a vertex
  int interior_components = 0;  // components of the graph meeting the interior
  bool interior_connected = true;
  int predecessor_failures = 0;  // checked when the lower level's graph is given
  int successor_failures = 0;    // checked when the upper level's graph is given

  bool ok() const;
  std::string to_text() const;
};

DivergenceReport check_divergence_properties(const ShellingPatch& patch, const DivergenceGraph& graph,
                                             int ball_2delta_size, const DivergenceGraph* lower = nullptr,
                                             const DivergenceGraph* upper = nullptr);

/// `<cell word>: <neighbour word>, ...` per vertex.
std::string export_adjacency(const ShellingPatch& patch, const DivergenceGraph& graph, const Presentation& p);
std::string export_dot(const ShellingPatch& patch, const DivergenceGraph& graph, const Presentation& p);

}  // namespace hypsft
