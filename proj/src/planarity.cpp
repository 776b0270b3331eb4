#include "corrpersist/planarity.hpp"

#include "corrpersist/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace corrpersist {

namespace {

void insertion_sort_by(std::vector<int>& items, const std::vector<int>& key) {
  for (std::size_t i = 1; i < items.size(); ++i) {
    const int item = items[i];
    std::size_t j = i;
    while (j > 0 && key[static_cast<std::size_t>(items[j - 1])] > key[static_cast<std::size_t>(item)]) {
      items[j] = items[j - 1];
      --j;
    }
    items[j] = item;
  }
}

std::size_t position(const std::vector<int>& rot, int w) {
  return static_cast<std::size_t>(std::find(rot.begin(), rot.end(), w) - rot.begin());
}

// Rotation-system edits used while the LR embedding is assembled. `first`
// tracks the designated first neighbour of every vertex.
void add_half_edge_cw(PlanarEmbedding& emb, std::vector<int>& first, int v, int w, int ref) {
  auto& rot = emb.rotation[static_cast<std::size_t>(v)];
  if (ref < 0) {
    rot.assign(1, w);
    first[static_cast<std::size_t>(v)] = w;
    return;
  }
  rot.insert(rot.begin() + static_cast<std::ptrdiff_t>(position(rot, ref) + 1), w);
}

void add_half_edge_ccw(PlanarEmbedding& emb, std::vector<int>& first, int v, int w, int ref) {
  auto& rot = emb.rotation[static_cast<std::size_t>(v)];
  if (ref < 0) {
    rot.assign(1, w);
    first[static_cast<std::size_t>(v)] = w;
    return;
  }
  rot.insert(rot.begin() + static_cast<std::ptrdiff_t>(position(rot, ref)), w);
  if (first[static_cast<std::size_t>(v)] == ref) first[static_cast<std::size_t>(v)] = w;
}

AdjacencyList to_adjacency(std::size_t n, std::span<const VertexPair> edges) {
  AdjacencyList adj(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;
  seen.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) throw Error(ErrorKind::Dataset, "edge endpoint out of range");
    if (a == b) throw Error(ErrorKind::Dataset, "self-loop at vertex " + std::to_string(a));
    seen.emplace_back(std::min(a, b), std::max(a, b));
    adj[a].push_back(static_cast<int>(b));
    adj[b].push_back(static_cast<int>(a));
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw Error(ErrorKind::Dataset, "repeated edge: graph is not simple");
  }
  return adj;
}

}  // namespace

// ---------------------------------------------------------------------------
// PlanarEmbedding

std::size_t PlanarEmbedding::edge_count() const {
  std::size_t half = 0;
  for (const auto& r : rotation) half += r.size();
  return half / 2;
}

std::size_t PlanarEmbedding::face_count() const {
  std::vector<std::vector<char>> used(rotation.size());
  for (std::size_t v = 0; v < rotation.size(); ++v) used[v].assign(rotation[v].size(), 0);
  std::size_t faces = 0;
  for (std::size_t v = 0; v < rotation.size(); ++v) {
    for (std::size_t k = 0; k < rotation[v].size(); ++k) {
      if (used[v][k]) continue;
      ++faces;
      std::size_t a = v, idx = k;
      while (!used[a][idx]) {
        used[a][idx] = 1;
        const auto b = static_cast<std::size_t>(rotation[a][idx]);
        const auto& rb = rotation[b];
        const std::size_t pos = position(rb, static_cast<int>(a));
        if (pos == rb.size()) return 0;  // not a valid rotation system
        idx = (pos + rb.size() - 1) % rb.size();
        a = b;
      }
    }
  }
  return faces;
}

bool PlanarEmbedding::satisfies_euler() const {
  const std::size_t n = rotation.size();
  std::vector<int> comp(n, -1);
  std::size_t components = 0, vertices = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (rotation[s].empty() || comp[s] >= 0) continue;
    ++components;
    comp[s] = static_cast<int>(s);
    stack.push_back(s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      ++vertices;
      for (int w : rotation[v]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = static_cast<int>(s);
          stack.push_back(static_cast<std::size_t>(w));
        }
      }
    }
  }
  const auto faces = static_cast<long long>(face_count());
  const auto lhs = static_cast<long long>(vertices) - static_cast<long long>(edge_count()) + faces;
  return lhs == 2 * static_cast<long long>(components);
}

// ---------------------------------------------------------------------------
// LrPlanarity

bool LrPlanarity::is_planar(const AdjacencyList& adj) { return run(adj, nullptr); }

bool LrPlanarity::embed(const AdjacencyList& adj, PlanarEmbedding& out) { return run(adj, &out); }

bool LrPlanarity::run(const AdjacencyList& adj, PlanarEmbedding* out) {
  n_ = static_cast<int>(adj.size());
  std::size_t half_edges = 0;
  for (const auto& nb : adj) half_edges += nb.size();
  m_ = static_cast<int>(half_edges / 2);
  if (n_ > 2 && m_ > 3 * n_ - 6) return false;

  const auto n = static_cast<std::size_t>(n_);
  const auto m = static_cast<std::size_t>(m_);

  // Incidence lists in CSR form with one id per undirected edge.
  inc_start_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) inc_start_[v + 1] = inc_start_[v] + static_cast<int>(adj[v].size());
  inc_nbr_.assign(half_edges, 0);
  inc_edge_.assign(half_edges, -1);
  {
    std::vector<int> fill(inc_start_.begin(), inc_start_.end() - 1);
    int next_id = 0;
    for (std::size_t v = 0; v < n; ++v) {
      for (int w : adj[v]) {
        if (static_cast<int>(v) < w) {
          auto& fv = fill[v];
          auto& fw = fill[static_cast<std::size_t>(w)];
          inc_nbr_[static_cast<std::size_t>(fv)] = w;
          inc_edge_[static_cast<std::size_t>(fv++)] = next_id;
          inc_nbr_[static_cast<std::size_t>(fw)] = static_cast<int>(v);
          inc_edge_[static_cast<std::size_t>(fw++)] = next_id;
          ++next_id;
        }
      }
    }
  }

  height_.assign(n, -1);
  parent_edge_.assign(n, -1);
  roots_.clear();
  src_.assign(m, -1);
  dst_.assign(m, -1);
  oriented_.assign(m, 0);
  lowpt_.assign(m, 0);
  lowpt2_.assign(m, 0);
  nesting_.assign(m, 0);
  if (out_.size() < n) out_.resize(n);
  for (std::size_t v = 0; v < n; ++v) out_[v].clear();

  for (int v = 0; v < n_; ++v) {
    if (height_[static_cast<std::size_t>(v)] < 0) {
      height_[static_cast<std::size_t>(v)] = 0;
      roots_.push_back(v);
      orient(v);
    }
  }

  for (std::size_t v = 0; v < n; ++v) insertion_sort_by(out_[v], nesting_);

  ref_.assign(m, -1);
  side_.assign(m, 1);
  lowpt_edge_.assign(m, -1);
  stack_bottom_.assign(m, 0);
  stack_.clear();
  for (int root : roots_) {
    if (!test(root)) return false;
  }
  if (out == nullptr) return true;

  for (std::size_t e = 0; e < m; ++e) nesting_[e] *= sign(static_cast<int>(e));
  out->rotation.assign(n, {});
  first_.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    insertion_sort_by(out_[v], nesting_);
    int previous = -1;
    for (int e : out_[v]) {
      const int w = dst_[static_cast<std::size_t>(e)];
      add_half_edge_cw(*out, first_, static_cast<int>(v), w, previous);
      previous = w;
    }
  }
  left_ref_.assign(n, -1);
  right_ref_.assign(n, -1);
  for (int root : roots_) embed_dfs(root, *out);
  return true;
}

void LrPlanarity::orient(int v) {
  const auto vi = static_cast<std::size_t>(v);
  const int e = parent_edge_[vi];
  for (int k = inc_start_[vi]; k < inc_start_[vi + 1]; ++k) {
    const int eid = inc_edge_[static_cast<std::size_t>(k)];
    const auto ei = static_cast<std::size_t>(eid);
    if (oriented_[ei]) continue;
    const int w = inc_nbr_[static_cast<std::size_t>(k)];
    const auto wi = static_cast<std::size_t>(w);
    oriented_[ei] = 1;
    src_[ei] = v;
    dst_[ei] = w;
    out_[vi].push_back(eid);
    lowpt_[ei] = height_[vi];
    lowpt2_[ei] = height_[vi];
    if (height_[wi] < 0) {  // tree edge
      parent_edge_[wi] = eid;
      height_[wi] = height_[vi] + 1;
      orient(w);
    } else {  // back edge
      lowpt_[ei] = height_[wi];
    }
    nesting_[ei] = 2 * lowpt_[ei] + (lowpt2_[ei] < height_[vi] ? 1 : 0);
    if (e >= 0) {
      const auto pe = static_cast<std::size_t>(e);
      if (lowpt_[ei] < lowpt_[pe]) {
        lowpt2_[pe] = std::min(lowpt_[pe], lowpt2_[ei]);
        lowpt_[pe] = lowpt_[ei];
      } else if (lowpt_[ei] > lowpt_[pe]) {
        lowpt2_[pe] = std::min(lowpt2_[pe], lowpt_[ei]);
      } else {
        lowpt2_[pe] = std::min(lowpt2_[pe], lowpt2_[ei]);
      }
    }
  }
}

bool LrPlanarity::test(int v) {
  const auto vi = static_cast<std::size_t>(v);
  const int e = parent_edge_[vi];
  const auto& ordered = out_[vi];
  for (std::size_t idx = 0; idx < ordered.size(); ++idx) {
    const int ei = ordered[idx];
    const auto eu = static_cast<std::size_t>(ei);
    const int w = dst_[eu];
    stack_bottom_[eu] = static_cast<int>(stack_.size());
    if (ei == parent_edge_[static_cast<std::size_t>(w)]) {
      if (!test(w)) return false;
    } else {
      lowpt_edge_[eu] = ei;
      ConflictPair p;
      p.right = {ei, ei};
      stack_.push_back(p);
    }
    if (lowpt_[eu] < height_[vi]) {
      if (idx == 0) {
        lowpt_edge_[static_cast<std::size_t>(e)] = lowpt_edge_[eu];
      } else if (!add_constraints(ei, e)) {
        return false;
      }
    }
  }
  if (e >= 0) remove_back_edges(e);
  return true;
}

bool LrPlanarity::add_constraints(int ei, int e) {
  const auto eu = static_cast<std::size_t>(ei);
  const auto pe = static_cast<std::size_t>(e);
  ConflictPair p;
  // Merge return edges of ei into p.right.
  do {
    ConflictPair q = stack_.back();
    stack_.pop_back();
    if (!q.left.empty()) q.swap();
    if (!q.left.empty()) return false;
    if (lowpt_[static_cast<std::size_t>(q.right.low)] > lowpt_[pe]) {
      if (p.right.empty()) {
        p.right = q.right;
      } else {
        ref_[static_cast<std::size_t>(p.right.low)] = q.right.high;
      }
      p.right.low = q.right.low;
    } else {
      ref_[static_cast<std::size_t>(q.right.low)] = lowpt_edge_[pe];
    }
  } while (static_cast<int>(stack_.size()) != stack_bottom_[eu]);

  // Merge conflicting return edges of earlier siblings into p.left.
  while (!stack_.empty() && (conflicting(stack_.back().left, ei) || conflicting(stack_.back().right, ei))) {
    ConflictPair q = stack_.back();
    stack_.pop_back();
    if (conflicting(q.right, ei)) q.swap();
    if (conflicting(q.right, ei)) return false;
    if (p.right.low >= 0) ref_[static_cast<std::size_t>(p.right.low)] = q.right.high;
    if (q.right.low >= 0) p.right.low = q.right.low;
    if (p.left.empty()) {
      p.left = q.left;
    } else {
      ref_[static_cast<std::size_t>(p.left.low)] = q.left.high;
    }
    p.left.low = q.left.low;
  }
  if (!(p.left.empty() && p.right.empty())) stack_.push_back(p);
  return true;
}

int LrPlanarity::lowest(const ConflictPair& p) const {
  if (p.left.empty()) return lowpt_[static_cast<std::size_t>(p.right.low)];
  if (p.right.empty()) return lowpt_[static_cast<std::size_t>(p.left.low)];
  return std::min(lowpt_[static_cast<std::size_t>(p.left.low)], lowpt_[static_cast<std::size_t>(p.right.low)]);
}

void LrPlanarity::remove_back_edges(int e) {
  const auto pe = static_cast<std::size_t>(e);
  const int u = src_[pe];
  const int hu = height_[static_cast<std::size_t>(u)];
  // Drop whole conflict pairs whose return edges all end at u.
  while (!stack_.empty() && lowest(stack_.back()) == hu) {
    const ConflictPair p = stack_.back();
    stack_.pop_back();
    if (p.left.low >= 0) side_[static_cast<std::size_t>(p.left.low)] = -1;
  }
  if (!stack_.empty()) {
    ConflictPair p = stack_.back();
    stack_.pop_back();
    while (p.left.high >= 0 && dst_[static_cast<std::size_t>(p.left.high)] == u) {
      p.left.high = ref_[static_cast<std::size_t>(p.left.high)];
    }
    if (p.left.high < 0 && p.left.low >= 0) {
      ref_[static_cast<std::size_t>(p.left.low)] = p.right.low;
      side_[static_cast<std::size_t>(p.left.low)] = -1;
      p.left.low = -1;
    }
    while (p.right.high >= 0 && dst_[static_cast<std::size_t>(p.right.high)] == u) {
      p.right.high = ref_[static_cast<std::size_t>(p.right.high)];
    }
    if (p.right.high < 0 && p.right.low >= 0) {
      ref_[static_cast<std::size_t>(p.right.low)] = p.left.low;
      side_[static_cast<std::size_t>(p.right.low)] = -1;
      p.right.low = -1;
    }
    stack_.push_back(p);
  }
  // The side of e follows its highest return edge.
  if (lowpt_[pe] < hu && !stack_.empty()) {
    const int hl = stack_.back().left.high;
    const int hr = stack_.back().right.high;
    if (hl >= 0 && (hr < 0 || lowpt_[static_cast<std::size_t>(hl)] > lowpt_[static_cast<std::size_t>(hr)])) {
      ref_[pe] = hl;
    } else {
      ref_[pe] = hr;
    }
  }
}

int LrPlanarity::sign(int e) {
  // Iterative form of sign(e) = side[e] * sign(ref[e]), collapsing the chain.
  chain_.clear();
  int x = e;
  while (ref_[static_cast<std::size_t>(x)] >= 0) {
    chain_.push_back(x);
    x = ref_[static_cast<std::size_t>(x)];
  }
  for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) {
    const auto y = static_cast<std::size_t>(*it);
    side_[y] *= side_[static_cast<std::size_t>(ref_[y])];
    ref_[y] = -1;
  }
  return side_[static_cast<std::size_t>(e)];
}

void LrPlanarity::embed_dfs(int v, PlanarEmbedding& emb) {
  const auto vi = static_cast<std::size_t>(v);
  for (int ei : out_[vi]) {
    const auto eu = static_cast<std::size_t>(ei);
    const int w = dst_[eu];
    const auto wi = static_cast<std::size_t>(w);
    if (ei == parent_edge_[wi]) {
      add_half_edge_ccw(emb, first_, w, v, first_[wi]);
      left_ref_[vi] = w;
      right_ref_[vi] = w;
      embed_dfs(w, emb);
    } else if (side_[eu] == 1) {
      add_half_edge_cw(emb, first_, w, v, right_ref_[wi]);
    } else {
      add_half_edge_ccw(emb, first_, w, v, left_ref_[wi]);
      left_ref_[wi] = v;
    }
  }
}

// ---------------------------------------------------------------------------
// Free functions

bool is_planar(std::size_t n, std::span<const VertexPair> edges) {
  LrPlanarity lr;
  return lr.is_planar(to_adjacency(n, edges));
}

std::optional<PlanarEmbedding> planar_embedding(std::size_t n, std::span<const VertexPair> edges) {
  LrPlanarity lr;
  PlanarEmbedding emb;
  if (!lr.embed(to_adjacency(n, edges), emb)) return std::nullopt;
  return emb;
}

namespace {

// Connected and free of articulation points once `removed` is deleted.
bool biconnected_without(const AdjacencyList& adj, int removed, std::vector<int>& disc, std::vector<int>& low,
                         std::vector<std::pair<int, std::size_t>>& stack) {
  const int n = static_cast<int>(adj.size());
  const int root = removed == 0 ? 1 : 0;
  std::fill(disc.begin(), disc.end(), -1);
  int timer = 0;
  int root_children = 0;
  disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
  stack.clear();
  stack.emplace_back(root, 0);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  while (!stack.empty()) {
    auto& [v, it] = stack.back();
    const auto vi = static_cast<std::size_t>(v);
    if (it < adj[vi].size()) {
      const int w = adj[vi][it++];
      const auto wi = static_cast<std::size_t>(w);
      if (w == removed) continue;
      if (disc[wi] < 0) {
        parent[wi] = v;
        disc[wi] = low[wi] = timer++;
        if (v == root) ++root_children;
        stack.emplace_back(w, 0);
      } else if (w != parent[vi]) {
        low[vi] = std::min(low[vi], disc[wi]);
      }
    } else {
      const int finished = v;
      stack.pop_back();
      if (!stack.empty()) {
        const int p = stack.back().first;
        const auto pi = static_cast<std::size_t>(p);
        low[pi] = std::min(low[pi], low[static_cast<std::size_t>(finished)]);
        if (p != root && low[static_cast<std::size_t>(finished)] >= disc[pi]) return false;
      }
    }
  }
  if (root_children > 1) return false;
  return timer == n - 1;
}

}  // namespace

bool is_triconnected(const AdjacencyList& adj) {
  const std::size_t n = adj.size();
  if (n < 4) return false;
  for (const auto& nb : adj) {
    if (nb.size() < 3) return false;
  }
  std::vector<int> disc(n), low(n);
  std::vector<std::pair<int, std::size_t>> stack;
  for (std::size_t r = 0; r < n; ++r) {
    if (!biconnected_without(adj, static_cast<int>(r), disc, low, stack)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// IncrementalPlanarGraph

IncrementalPlanarGraph::IncrementalPlanarGraph(std::size_t n)
    : adj_(n), matrix_(n * n, 0), uf_parent_(n), in_core_(n, 0), anchor_kind_(n, 0), anchor_a_(n, -1),
      anchor_b_(n, -1) {
  std::iota(uf_parent_.begin(), uf_parent_.end(), 0);
}

int IncrementalPlanarGraph::find(int x) {
  while (uf_parent_[static_cast<std::size_t>(x)] != x) {
    auto& p = uf_parent_[static_cast<std::size_t>(x)];
    p = uf_parent_[static_cast<std::size_t>(p)];
    x = p;
  }
  return x;
}

bool IncrementalPlanarGraph::has_edge(int u, int v) const {
  return matrix_[static_cast<std::size_t>(u) * adj_.size() + static_cast<std::size_t>(v)] != 0;
}

void IncrementalPlanarGraph::link(int u, int v) {
  const std::size_t n = adj_.size();
  const auto ui = static_cast<std::size_t>(u);
  const auto vi = static_cast<std::size_t>(v);
  matrix_[ui * n + vi] = matrix_[vi * n + ui] = 1;
  ++edges_;
  uf_parent_[static_cast<std::size_t>(find(u))] = find(v);
}

bool IncrementalPlanarGraph::try_add_edge(int u, int v) {
  const std::size_t n = adj_.size();
  const auto ui = static_cast<std::size_t>(u);
  const auto vi = static_cast<std::size_t>(v);
  if (u == v || has_edge(u, v)) return false;

  refresh_core();
  if (core_valid_ && in_core_[ui] && in_core_[vi]) {
    if (!core_matrix_[ui * n + vi]) {
      const int f = shared_face(u, v);
      if (f < 0) return false;
      insert_in_face(u, v, f);
      core_matrix_[ui * n + vi] = core_matrix_[vi * n + ui] = 1;
    }
    // Otherwise u and v are already joined through suppressed vertices and
    // the new edge runs parallel to that path.
    adj_[ui].push_back(v);
    adj_[vi].push_back(u);
    link(u, v);
    return true;
  }

  if (core_valid_ && (in_core_[ui] || in_core_[vi]) && anchor_kind_[in_core_[ui] ? vi : ui] != 0) {
    if (!anchored_accepts(in_core_[ui] ? v : u, in_core_[ui] ? u : v)) return false;
    adj_[ui].push_back(v);
    adj_[vi].push_back(u);
    link(u, v);
    core_dirty_ = true;
    return true;
  }

  adj_[ui].push_back(v);
  adj_[vi].push_back(u);
  // Joining two components never breaks planarity.
  if (find(u) != find(v) || lr_.is_planar(adj_)) {
    link(u, v);
    core_dirty_ = true;
    return true;
  }
  adj_[ui].pop_back();
  adj_[vi].pop_back();
  return false;
}

void IncrementalPlanarGraph::refresh_core() {
  if (!core_dirty_) return;
  if (!core_valid_ && accepts_until_check_ > 0) {
    --accepts_until_check_;
    return;
  }
  core_dirty_ = false;
  core_valid_ = build_core();
  // The 3-connectivity check costs O(n (n + m)), so failed attempts are
  // spaced out on larger graphs.
  if (!core_valid_) accepts_until_check_ = adj_.size() / 16;
}

bool IncrementalPlanarGraph::build_core() {
  const std::size_t n = adj_.size();
  core_matrix_ = matrix_;
  std::vector<int> degree(n);
  std::vector<int> queue, removal;
  std::fill(in_core_.begin(), in_core_.end(), 1);
  std::fill(anchor_kind_.begin(), anchor_kind_.end(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = static_cast<int>(adj_[v].size());
    if (degree[v] <= 2) queue.push_back(static_cast<int>(v));
  }
  int nb[2];
  while (!queue.empty()) {
    const auto x = static_cast<std::size_t>(queue.back());
    queue.pop_back();
    if (!in_core_[x] || degree[x] > 2) continue;
    in_core_[x] = 0;
    int found = 0;
    for (std::size_t w = 0; w < n && found < degree[x]; ++w) {
      if (core_matrix_[x * n + w]) {
        nb[found++] = static_cast<int>(w);
        core_matrix_[x * n + w] = core_matrix_[w * n + x] = 0;
      }
    }
    for (int k = 0; k < found; ++k) --degree[static_cast<std::size_t>(nb[k])];
    removal.push_back(static_cast<int>(x));
    anchor_kind_[x] = static_cast<char>(found);
    anchor_a_[x] = found > 0 ? nb[0] : -1;
    anchor_b_[x] = found > 1 ? nb[1] : -1;
    if (found == 2) {
      const auto a = static_cast<std::size_t>(nb[0]);
      const auto b = static_cast<std::size_t>(nb[1]);
      if (!core_matrix_[a * n + b]) {
        core_matrix_[a * n + b] = core_matrix_[b * n + a] = 1;
        ++degree[a];
        ++degree[b];
      }
    }
    degree[x] = 0;
    for (int k = 0; k < found; ++k) {
      if (degree[static_cast<std::size_t>(nb[k])] <= 2) queue.push_back(nb[k]);
    }
  }

  // Resolve anchors onto the core, latest removal first. An edge (a, b) that
  // left the graph went with whichever endpoint was removed first.
  std::vector<int> order(n, -1);
  for (std::size_t k = 0; k < removal.size(); ++k) order[static_cast<std::size_t>(removal[k])] = static_cast<int>(k);
  for (auto it = removal.rbegin(); it != removal.rend(); ++it) {
    const auto x = static_cast<std::size_t>(*it);
    int via = -1;
    if (anchor_kind_[x] == 1 && !in_core_[static_cast<std::size_t>(anchor_a_[x])]) {
      via = anchor_a_[x];
    } else if (anchor_kind_[x] == 2) {
      const auto a = static_cast<std::size_t>(anchor_a_[x]);
      const auto b = static_cast<std::size_t>(anchor_b_[x]);
      if (!in_core_[a] && (in_core_[b] || order[a] < order[b])) {
        via = anchor_a_[x];
      } else if (!in_core_[b]) {
        via = anchor_b_[x];
      }
    }
    if (via >= 0) {
      const auto vv = static_cast<std::size_t>(via);
      anchor_kind_[x] = anchor_kind_[vv];
      anchor_a_[x] = anchor_a_[vv];
      anchor_b_[x] = anchor_b_[vv];
    }
  }

  std::vector<int> id(n, -1), vertex;
  for (std::size_t v = 0; v < n; ++v) {
    if (in_core_[v]) {
      id[v] = static_cast<int>(vertex.size());
      vertex.push_back(static_cast<int>(v));
    }
  }
  if (vertex.size() < 4) return false;
  AdjacencyList core(vertex.size());
  for (std::size_t a = 0; a < vertex.size(); ++a) {
    const auto v = static_cast<std::size_t>(vertex[a]);
    for (std::size_t w = 0; w < n; ++w) {
      if (core_matrix_[v * n + w]) core[a].push_back(id[w]);
    }
  }
  if (!is_triconnected(core)) return false;
  PlanarEmbedding emb;
  if (!lr_.embed(core, emb)) return false;  // unreachable: the graph is planar by construction

  rot_.assign(n, {});
  face_.assign(n, {});
  for (std::size_t a = 0; a < vertex.size(); ++a) {
    auto& r = rot_[static_cast<std::size_t>(vertex[a])];
    for (int b : emb.rotation[a]) r.push_back(vertex[static_cast<std::size_t>(b)]);
    face_[static_cast<std::size_t>(vertex[a])].assign(r.size(), -1);
  }
  next_face_ = 0;
  for (int v : vertex) {
    const auto vi = static_cast<std::size_t>(v);
    for (std::size_t k = 0; k < rot_[vi].size(); ++k) {
      if (face_[vi][k] < 0) relabel_face(v, rot_[vi][k], next_face_++);
    }
  }
  face_stamp_.assign(static_cast<std::size_t>(2 * n + 8), 0);
  stamp_ = 0;
  return true;
}

bool IncrementalPlanarGraph::anchored_accepts(int outer, int core) {
  // `outer` sits inside a series-parallel piece that replaced its anchor, and
  // can be drawn on either side of it.
  const auto oi = static_cast<std::size_t>(outer);
  const int a = anchor_a_[oi];
  if (anchor_kind_[oi] == 1) return a == core || shared_face(a, core) >= 0;
  const int b = anchor_b_[oi];
  if (a == core || b == core) return true;
  const int f1 = face_[static_cast<std::size_t>(a)][static_cast<std::size_t>(index_of(a, b))];
  const int f2 = face_[static_cast<std::size_t>(b)][static_cast<std::size_t>(index_of(b, a))];
  for (int f : face_[static_cast<std::size_t>(core)]) {
    if (f == f1 || f == f2) return true;
  }
  return false;
}

int IncrementalPlanarGraph::index_of(int v, int w) const {
  const auto& r = rot_[static_cast<std::size_t>(v)];
  return static_cast<int>(std::find(r.begin(), r.end(), w) - r.begin());
}

void IncrementalPlanarGraph::relabel_face(int a, int b, int face) {
  const int start_a = a, start_b = b;
  do {
    face_[static_cast<std::size_t>(a)][static_cast<std::size_t>(index_of(a, b))] = face;
    const auto& rb = rot_[static_cast<std::size_t>(b)];
    const auto pos = static_cast<std::size_t>(index_of(b, a));
    const int c = rb[(pos + rb.size() - 1) % rb.size()];
    a = b;
    b = c;
  } while (a != start_a || b != start_b);
}

int IncrementalPlanarGraph::shared_face(int u, int v) {
  if (++stamp_ == 0) {
    std::fill(face_stamp_.begin(), face_stamp_.end(), 0);
    stamp_ = 1;
  }
  for (int f : face_[static_cast<std::size_t>(u)]) face_stamp_[static_cast<std::size_t>(f)] = stamp_;
  for (int f : face_[static_cast<std::size_t>(v)]) {
    if (face_stamp_[static_cast<std::size_t>(f)] == stamp_) return f;
  }
  return -1;
}

void IncrementalPlanarGraph::insert_in_face(int u, int v, int face) {
  // At each endpoint the half-edge on `face` leaving it is followed by the
  // new edge: inserting right after its head in clockwise order makes the
  // new edge the counter-clockwise successor seen when entering the corner.
  for (const auto& [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
    auto& fa = face_[static_cast<std::size_t>(a)];
    auto& ra = rot_[static_cast<std::size_t>(a)];
    const auto k = static_cast<std::size_t>(std::find(fa.begin(), fa.end(), face) - fa.begin());
    ra.insert(ra.begin() + static_cast<std::ptrdiff_t>(k + 1), b);
    fa.insert(fa.begin() + static_cast<std::ptrdiff_t>(k + 1), -1);
  }
  relabel_face(u, v, face);
  const int fresh = next_face_++;
  if (static_cast<std::size_t>(fresh) >= face_stamp_.size()) face_stamp_.resize(face_stamp_.size() * 2, 0);
  relabel_face(v, u, fresh);
}

}  // namespace corrpersist
