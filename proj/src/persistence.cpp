#include "corrpersist/persistence.hpp"

#include "corrpersist/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace corrpersist {

const char* to_string(SimilarityMeasure measure) noexcept {
  return measure == SimilarityMeasure::EdgeSurvival ? "edge-survival" : "metacorrelation";
}

SimilarityMeasure parse_similarity_measure(const std::string& name) {
  if (name == "edge-survival" || name == "es") return SimilarityMeasure::EdgeSurvival;
  if (name == "metacorrelation" || name == "z") return SimilarityMeasure::Metacorrelation;
  throw Error(ErrorKind::Config, "unknown measure '" + name + "' (expected edge-survival or metacorrelation)");
}

double edge_survival(const FilteredGraph& ga, const FilteredGraph& gb) {
  if (ga.n_nodes != gb.n_nodes) {
    throw Error(ErrorKind::Incompatible, "edge survival between graphs on " + std::to_string(ga.n_nodes) + " and " +
                                             std::to_string(gb.n_nodes) + " nodes");
  }
  if (ga.kind != gb.kind) throw Error(ErrorKind::Incompatible, "edge survival between different graph kinds");
  if (ga.keys.size() != gb.keys.size()) {
    throw Error(ErrorKind::Incompatible, "edge survival between graphs with different edge counts");
  }
  if (ga.keys.empty()) throw Error(ErrorKind::Incompatible, "edge survival of empty graphs");
  std::size_t shared = 0;
  auto ia = ga.keys.begin(), ib = gb.keys.begin();
  while (ia != ga.keys.end() && ib != gb.keys.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(ga.keys.size());
}

Eigen::VectorXd persistence_weights(std::size_t L, double divisor) {
  if (L < 1) throw Error(ErrorKind::Config, "lookback L must be at least 1");
  if (!(divisor > 0.0)) throw Error(ErrorKind::Config, "smoothing divisor must be positive");
  const double scale = static_cast<double>(L) / divisor;
  Eigen::VectorXd w(static_cast<Eigen::Index>(L));
  // Index k = 0 is b = a - L, the oldest window; b - a - 1 = k - L - 1.
  for (std::size_t k = 0; k < L; ++k) {
    w(static_cast<Eigen::Index>(k)) = std::exp((static_cast<double>(k) - static_cast<double>(L) + 1.0) / scale);
  }
  return w / w.sum();
}

double correlation_persistence(std::span<const FilteredGraph> graphs, std::size_t a, std::size_t L, double divisor) {
  if (a >= graphs.size()) throw Error(ErrorKind::Incompatible, "window index out of range");
  if (a < L) {
    throw Error(ErrorKind::InsufficientHistory,
                "window " + std::to_string(a) + " has fewer than L=" + std::to_string(L) + " predecessors");
  }
  const Eigen::VectorXd w = persistence_weights(L, divisor);
  double acc = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    acc += w(static_cast<Eigen::Index>(k)) * edge_survival(graphs[a], graphs[a - L + k]);
  }
  return acc;
}

Eigen::VectorXd standardized_upper_triangle(const Eigen::Ref<const Eigen::MatrixXd>& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::Incompatible, "matrix is not square");
  const Eigen::Index n = rho.rows();
  if (n < 2) throw Error(ErrorKind::Size, "metacorrelation needs at least 2 assets");
  Eigen::VectorXd u(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) u(k++) = rho(i, j);
  }
  const double mean = u.mean();
  u.array() -= mean;
  const double sd = std::sqrt(u.squaredNorm() / static_cast<double>(u.size()));
  if (!(sd > 0.0)) throw Error(ErrorKind::Degenerate, "off-diagonal entries have zero variance");
  return u / sd;
}

double metacorrelation(const Eigen::Ref<const Eigen::MatrixXd>& rho_a, const Eigen::Ref<const Eigen::MatrixXd>& rho_b) {
  if (rho_a.rows() != rho_b.rows() || rho_a.cols() != rho_b.cols()) {
    throw Error(ErrorKind::Incompatible, "metacorrelation of matrices with different shapes");
  }
  const Eigen::VectorXd u = standardized_upper_triangle(rho_a);
  const Eigen::VectorXd v = standardized_upper_triangle(rho_b);
  return std::clamp(u.dot(v) / static_cast<double>(u.size()), -1.0, 1.0);
}

double metacorrelation_persistence(std::span<const Eigen::MatrixXd> rhos, std::size_t a, std::size_t L,
                                   double divisor) {
  if (a >= rhos.size()) throw Error(ErrorKind::Incompatible, "window index out of range");
  if (a < L) {
    throw Error(ErrorKind::InsufficientHistory,
                "window " + std::to_string(a) + " has fewer than L=" + std::to_string(L) + " predecessors");
  }
  const Eigen::VectorXd w = persistence_weights(L, divisor);
  double acc = 0.0;
  for (std::size_t k = 0; k < L; ++k) acc += w(static_cast<Eigen::Index>(k)) * metacorrelation(rhos[a], rhos[a - L + k]);
  return acc;
}

SimilarityMatrix similarity_matrix(std::span<const FilteredGraph> graphs) {
  if (graphs.size() < 2) throw Error(ErrorKind::Size, "similarity matrix needs at least 2 items");
  const auto n = static_cast<Eigen::Index>(graphs.size());
  SimilarityMatrix out{Eigen::MatrixXd::Identity(n, n), SimilarityMeasure::EdgeSurvival};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < a; ++b) {
      const double v = edge_survival(graphs[static_cast<std::size_t>(a)], graphs[static_cast<std::size_t>(b)]);
      out.values(a, b) = out.values(b, a) = v;
    }
  }
  return out;
}

SimilarityMatrix similarity_matrix_from_triangles(std::span<const Eigen::VectorXd> triangles) {
  if (triangles.size() < 2) throw Error(ErrorKind::Size, "similarity matrix needs at least 2 items");
  const auto n = static_cast<Eigen::Index>(triangles.size());
  SimilarityMatrix out{Eigen::MatrixXd::Identity(n, n), SimilarityMeasure::Metacorrelation};
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& u = triangles[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < a; ++b) {
      const auto& v = triangles[static_cast<std::size_t>(b)];
      if (u.size() != v.size()) throw Error(ErrorKind::Incompatible, "triangles of different lengths");
      const double z = std::clamp(u.dot(v) / static_cast<double>(u.size()), -1.0, 1.0);
      out.values(a, b) = out.values(b, a) = z;
    }
  }
  return out;
}

SimilarityMatrix similarity_matrix(std::span<const Eigen::MatrixXd> rhos) {
  std::vector<Eigen::VectorXd> triangles;
  triangles.reserve(rhos.size());
  for (const auto& r : rhos) triangles.push_back(standardized_upper_triangle(r));
  return similarity_matrix_from_triangles(triangles);
}

LagTable::LagTable(std::size_t n_windows, std::size_t max_lag)
    : n_windows_(n_windows), max_lag_(max_lag), values_(n_windows * max_lag, std::nan("")) {}

LagTable edge_survival_lags(std::span<const FilteredGraph> graphs, std::size_t max_lag) {
  LagTable table(graphs.size(), max_lag);
  for (std::size_t a = 0; a < graphs.size(); ++a) {
    for (std::size_t k = 1; k <= std::min(a, max_lag); ++k) table.set(a, k, edge_survival(graphs[a], graphs[a - k]));
  }
  return table;
}

PersistenceSeries persistence_series(const LagTable& lags, std::size_t L, SimilarityMeasure measure, double divisor) {
  if (L > lags.max_lag()) {
    throw Error(ErrorKind::Config, "L=" + std::to_string(L) + " exceeds the precomputed lag depth " +
                                       std::to_string(lags.max_lag()));
  }
  const Eigen::VectorXd w = persistence_weights(L, divisor);
  PersistenceSeries out;
  out.L = L;
  out.measure = measure;
  for (std::size_t a = L; a < lags.n_windows(); ++a) {
    double acc = 0.0;
    // w(k) weights b = a - L + k, i.e. lag L - k.
    for (std::size_t k = 0; k < L; ++k) acc += w(static_cast<Eigen::Index>(k)) * lags.at(a, L - k);
    out.window_indices.push_back(a);
    out.values.push_back(acc);
  }
  return out;
}

void write_persistence_csv(const PersistenceSeries& series, std::span<const std::size_t> window_starts,
                           std::ostream& out) {
  out << "window_start," << (series.measure == SimilarityMeasure::EdgeSurvival ? "es" : "z") << '\n';
  char buf[32];
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", series.values[k]);
    out << window_starts[series.window_indices[k]] << ',' << buf << '\n';
  }
}

}  // namespace corrpersist
