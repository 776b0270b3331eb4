#pragma once

#include "corrpersist/planarity.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace corrpersist {

enum class FilterKind { Pmfg, Mst };

const char* to_string(FilterKind kind) noexcept;
FilterKind parse_filter_kind(const std::string& name);

struct Edge {
  int i = 0;  // i < j
  int j = 0;
  double weight = 0.0;
};

/// Sparse filtered network over asset indices. Edges are kept in the order
/// they were accepted; `keys` holds i * n + j for every edge, sorted, for
/// fast intersection.
struct FilteredGraph {
  std::size_t n_nodes = 0;
  FilterKind kind = FilterKind::Pmfg;
  std::vector<Edge> edges;
  std::vector<std::uint32_t> keys;

  std::size_t edge_count() const { return edges.size(); }
  bool has_edge(int a, int b) const;
  std::vector<VertexPair> vertex_pairs() const;
};

/// Upper-triangle pairs ordered by correlation, descending; ties by (i, j).
std::vector<VertexPair> ranked_pairs(const Eigen::Ref<const Eigen::MatrixXd>& rho);

/// Greedy planar filtering: accepts pairs in ranked order while the graph
/// stays planar, stopping at 3N - 6 edges. Throws Error(Size) for N < 4.
FilteredGraph build_pmfg(const Eigen::Ref<const Eigen::MatrixXd>& rho);

/// Maximum-correlation spanning tree (Kruskal over the same ranking).
/// Throws Error(Size) for N < 2.
FilteredGraph build_mst(const Eigen::Ref<const Eigen::MatrixXd>& rho);

FilteredGraph build_filtered_graph(const Eigen::Ref<const Eigen::MatrixXd>& rho, FilterKind kind);

bool is_planar(const FilteredGraph& graph);

/// Edge list with a one-line header "# kind=<pmfg|mst> n=<N>" followed by
/// "i,j,weight" rows.
void write_graph_csv(const FilteredGraph& graph, std::ostream& out);

}  // namespace corrpersist
