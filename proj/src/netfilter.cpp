#include "corrpersist/netfilter.hpp"

#include "corrpersist/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace corrpersist {

const char* to_string(FilterKind kind) noexcept { return kind == FilterKind::Pmfg ? "pmfg" : "mst"; }

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "pmfg") return FilterKind::Pmfg;
  if (name == "mst") return FilterKind::Mst;
  throw Error(ErrorKind::Config, "unknown filter kind '" + name + "' (expected pmfg or mst)");
}

bool FilteredGraph::has_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto key = static_cast<std::uint32_t>(static_cast<std::size_t>(a) * n_nodes + static_cast<std::size_t>(b));
  return std::binary_search(keys.begin(), keys.end(), key);
}

std::vector<VertexPair> FilteredGraph::vertex_pairs() const {
  std::vector<VertexPair> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.emplace_back(static_cast<std::uint32_t>(e.i), static_cast<std::uint32_t>(e.j));
  return out;
}

namespace {

void check_matrix(const Eigen::Ref<const Eigen::MatrixXd>& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::Incompatible, "correlation matrix is not square");
  for (Eigen::Index j = 0; j < rho.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (!std::isfinite(rho(i, j))) {
        throw Error(ErrorKind::Dataset, "correlation matrix has a non-finite entry at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
      }
      if (rho(i, j) != rho(j, i)) throw Error(ErrorKind::Dataset, "correlation matrix is not symmetric");
    }
  }
}

FilteredGraph finish(std::size_t n, FilterKind kind, std::vector<Edge> edges) {
  FilteredGraph g;
  g.n_nodes = n;
  g.kind = kind;
  g.keys.reserve(edges.size());
  for (const auto& e : edges) {
    g.keys.push_back(static_cast<std::uint32_t>(static_cast<std::size_t>(e.i) * n + static_cast<std::size_t>(e.j)));
  }
  std::sort(g.keys.begin(), g.keys.end());
  g.edges = std::move(edges);
  return g;
}

}  // namespace

std::vector<VertexPair> ranked_pairs(const Eigen::Ref<const Eigen::MatrixXd>& rho) {
  const auto n = static_cast<std::uint32_t>(rho.rows());
  std::vector<VertexPair> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::sort(pairs.begin(), pairs.end(), [&](const VertexPair& a, const VertexPair& b) {
    const double ra = rho(a.first, a.second);
    const double rb = rho(b.first, b.second);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  return pairs;
}

FilteredGraph build_pmfg(const Eigen::Ref<const Eigen::MatrixXd>& rho) {
  check_matrix(rho);
  const auto n = static_cast<std::size_t>(rho.rows());
  if (n < 4) throw Error(ErrorKind::Size, "PMFG needs at least 4 nodes, got " + std::to_string(n));
  const std::size_t target = 3 * n - 6;
  IncrementalPlanarGraph graph(n);
  std::vector<Edge> edges;
  edges.reserve(target);
  for (const auto& [i, j] : ranked_pairs(rho)) {
    const int a = static_cast<int>(i), b = static_cast<int>(j);
    if (graph.try_add_edge(a, b)) {
      edges.push_back({a, b, rho(a, b)});
      if (edges.size() == target) break;
    }
  }
  return finish(n, FilterKind::Pmfg, std::move(edges));
}

FilteredGraph build_mst(const Eigen::Ref<const Eigen::MatrixXd>& rho) {
  check_matrix(rho);
  const auto n = static_cast<std::size_t>(rho.rows());
  if (n < 2) throw Error(ErrorKind::Size, "MST needs at least 2 nodes, got " + std::to_string(n));
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  };
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (const auto& [i, j] : ranked_pairs(rho)) {
    const int a = static_cast<int>(i), b = static_cast<int>(j);
    const int ra = find(a), rb = find(b);
    if (ra == rb) continue;
    parent[static_cast<std::size_t>(ra)] = rb;
    edges.push_back({a, b, rho(a, b)});
    if (edges.size() == n - 1) break;
  }
  return finish(n, FilterKind::Mst, std::move(edges));
}

FilteredGraph build_filtered_graph(const Eigen::Ref<const Eigen::MatrixXd>& rho, FilterKind kind) {
  return kind == FilterKind::Pmfg ? build_pmfg(rho) : build_mst(rho);
}

bool is_planar(const FilteredGraph& graph) {
  const auto pairs = graph.vertex_pairs();
  return is_planar(graph.n_nodes, pairs);
}

void write_graph_csv(const FilteredGraph& graph, std::ostream& out) {
  out << "# kind=" << to_string(graph.kind) << " n=" << graph.n_nodes << '\n';
  char buf[64];
  for (const auto& e : graph.edges) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g", e.i, e.j, e.weight);
    out << buf << '\n';
  }
}

}  // namespace corrpersist
