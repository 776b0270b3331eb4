#pragma once

#include "corrpersist/netfilter.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace corrpersist {

enum class SimilarityMeasure { EdgeSurvival, Metacorrelation };

const char* to_string(SimilarityMeasure measure) noexcept;
SimilarityMeasure parse_similarity_measure(const std::string& name);

/// Fraction of shared edges. Both graphs must have the same node count, kind
/// and edge count; otherwise Error(Incompatible).
double edge_survival(const FilteredGraph& ga, const FilteredGraph& gb);

/// omega_b proportional to exp((b - a - 1) / (L / divisor)) for b = a-L..a-1,
/// returned oldest first and normalised to sum 1.
Eigen::VectorXd persistence_weights(std::size_t L, double divisor = 3.0);

/// <ES>(T_a) over graphs[a-L .. a-1]. Throws Error(InsufficientHistory) if a < L.
double correlation_persistence(std::span<const FilteredGraph> graphs, std::size_t a, std::size_t L,
                               double divisor = 3.0);

/// Pearson correlation of the strict upper triangles of two matrices.
double metacorrelation(const Eigen::Ref<const Eigen::MatrixXd>& rho_a, const Eigen::Ref<const Eigen::MatrixXd>& rho_b);

double metacorrelation_persistence(std::span<const Eigen::MatrixXd> rhos, std::size_t a, std::size_t L,
                                   double divisor = 3.0);

/// Strict upper triangle of a matrix, centred and scaled to unit population
/// variance, so that the metacorrelation of two matrices is dot(u, v) / m.
/// Throws Error(Degenerate) when the entries are all equal.
Eigen::VectorXd standardized_upper_triangle(const Eigen::Ref<const Eigen::MatrixXd>& rho);

struct SimilarityMatrix {
  Eigen::MatrixXd values;
  SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival;
};

/// Pairwise similarity over all items; needs at least two.
SimilarityMatrix similarity_matrix(std::span<const FilteredGraph> graphs);
SimilarityMatrix similarity_matrix(std::span<const Eigen::MatrixXd> rhos);
/// Same from precomputed standardized triangles.
SimilarityMatrix similarity_matrix_from_triangles(std::span<const Eigen::VectorXd> triangles);

/// Similarities between each window and its `max_lag` predecessors:
/// at(a, k) = sim(T_a, T_{a-k}) for 1 <= k <= min(a, max_lag).
class LagTable {
 public:
  LagTable() = default;
  LagTable(std::size_t n_windows, std::size_t max_lag);

  std::size_t n_windows() const { return n_windows_; }
  std::size_t max_lag() const { return max_lag_; }
  double at(std::size_t a, std::size_t k) const { return values_[a * max_lag_ + (k - 1)]; }
  void set(std::size_t a, std::size_t k, double v) { values_[a * max_lag_ + (k - 1)] = v; }

 private:
  std::size_t n_windows_ = 0;
  std::size_t max_lag_ = 0;
  std::vector<double> values_;
};

LagTable edge_survival_lags(std::span<const FilteredGraph> graphs, std::size_t max_lag);

struct PersistenceSeries {
  std::vector<std::size_t> window_indices;  // every a with a >= L
  std::vector<double> values;
  std::size_t L = 0;
  SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival;
};

/// Weighted averages over the L most recent lags for every window that has
/// L predecessors. L must not exceed the table's max lag.
PersistenceSeries persistence_series(const LagTable& lags, std::size_t L, SimilarityMeasure measure,
                                     double divisor = 3.0);

/// Rows "window_start,value".
void write_persistence_csv(const PersistenceSeries& series, std::span<const std::size_t> window_starts,
                           std::ostream& out);

}  // namespace corrpersist
