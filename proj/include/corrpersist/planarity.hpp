#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace corrpersist {

using AdjacencyList = std::vector<std::vector<int>>;
using VertexPair = std::pair<std::uint32_t, std::uint32_t>;

/// Combinatorial embedding: rotation[v] lists the neighbours of v in
/// clockwise order. Faces are traced by (v, w) -> (w, ccw_w(v)).
struct PlanarEmbedding {
  std::vector<std::vector<int>> rotation;

  std::size_t edge_count() const;
  std::size_t face_count() const;
  /// V - E + F == 2C over the non-isolated vertices (C = components).
  bool satisfies_euler() const;
};

/// Left-right planarity test (de Fraysseix-Rosenstiehl, in Brandes'
/// formulation). Keeps its scratch buffers between calls, so one instance
/// tests many related graphs without reallocating. Not thread-safe.
class LrPlanarity {
 public:
  /// `adj` must describe a simple undirected graph (symmetric, no loops,
  /// no repeated neighbours).
  bool is_planar(const AdjacencyList& adj);

  /// Planarity test that also produces an embedding on success.
  bool embed(const AdjacencyList& adj, PlanarEmbedding& out);

 private:
  struct Interval {
    int low = -1;
    int high = -1;
    bool empty() const { return low < 0 && high < 0; }
  };
  struct ConflictPair {
    Interval left;
    Interval right;
    void swap() { std::swap(left, right); }
  };

  bool run(const AdjacencyList& adj, PlanarEmbedding* out);
  void orient(int v);
  bool test(int v);
  bool add_constraints(int ei, int e);
  void remove_back_edges(int e);
  bool conflicting(const Interval& i, int b) const { return !i.empty() && lowpt_[i.high] > lowpt_[b]; }
  int lowest(const ConflictPair& p) const;
  int sign(int e);
  void embed_dfs(int v, PlanarEmbedding& emb);

  int n_ = 0;
  int m_ = 0;
  std::vector<int> inc_start_, inc_nbr_, inc_edge_;
  std::vector<int> height_, parent_edge_, roots_;
  std::vector<int> src_, dst_;
  std::vector<char> oriented_;
  std::vector<int> lowpt_, lowpt2_, nesting_;
  std::vector<std::vector<int>> out_;
  std::vector<int> ref_, side_, lowpt_edge_, stack_bottom_;
  std::vector<ConflictPair> stack_;
  std::vector<int> left_ref_, right_ref_, first_, chain_;
};

/// True iff the simple graph on n vertices is planar. Throws Error(Dataset)
/// for self-loops, repeated edges or out-of-range endpoints.
bool is_planar(std::size_t n, std::span<const VertexPair> edges);

/// Embedding of a planar graph, or nullopt when it is not planar.
std::optional<PlanarEmbedding> planar_embedding(std::size_t n, std::span<const VertexPair> edges);

/// 3-vertex-connectivity (n >= 4, and no vertex pair whose removal disconnects).
bool is_triconnected(const AdjacencyList& adj);

/// Planar graph that grows one edge at a time and refuses edges that would
/// break planarity.
///
/// Vertices of degree <= 2 are repeatedly suppressed (pendants dropped,
/// degree-2 vertices replaced by an edge between their neighbours); this
/// preserves planarity in both directions. Once the remaining core is
/// 3-connected its embedding is unique, and a candidate between two core
/// vertices is planar exactly when both lie on a common face. A suppressed
/// vertex hangs off either a core vertex or a core edge, so a candidate
/// joining it to the core is decided by the faces around that anchor.
/// Anything else goes through the LR test on the full graph.
class IncrementalPlanarGraph {
 public:
  explicit IncrementalPlanarGraph(std::size_t n);

  /// Adds {u, v} iff the graph stays planar. Returns false for u == v or an
  /// edge already present.
  bool try_add_edge(int u, int v);

  bool has_edge(int u, int v) const;
  std::size_t vertex_count() const { return adj_.size(); }
  std::size_t edge_count() const { return edges_; }
  const AdjacencyList& adjacency() const { return adj_; }
  /// True while a 3-connected core embedding is available.
  bool face_mode() const { return core_valid_; }

 private:
  int find(int x);
  void refresh_core();
  bool build_core();
  int shared_face(int u, int v);
  void insert_in_face(int u, int v, int face);
  int index_of(int v, int w) const;
  void relabel_face(int a, int b, int face);
  void link(int u, int v);
  bool anchored_accepts(int u, int v);

  AdjacencyList adj_;
  std::vector<char> matrix_;  // n x n
  std::vector<int> uf_parent_;
  std::size_t edges_ = 0;
  LrPlanarity lr_;

  bool core_valid_ = false;
  bool core_dirty_ = true;
  std::size_t accepts_until_check_ = 0;
  std::vector<char> in_core_;
  // Anchor of a suppressed vertex: kind 0 = none, 1 = vertex a, 2 = edge (a, b).
  std::vector<char> anchor_kind_;
  std::vector<int> anchor_a_, anchor_b_;
  std::vector<char> core_matrix_;       // n x n, suppressed graph
  std::vector<std::vector<int>> rot_;   // clockwise neighbour order in the core
  std::vector<std::vector<int>> face_;  // face id of half-edge (v -> rot_[v][k])
  std::vector<int> face_stamp_;
  int next_face_ = 0;
  int stamp_ = 0;
};

}  // namespace corrpersist
