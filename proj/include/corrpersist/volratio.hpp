#pragma once

#include "corrpersist/ingest.hpp"
#include "corrpersist/persistence.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <span>
#include <vector>

namespace corrpersist {

/// q = sigma_realized / sigma_est. Throws Error(Degenerate) unless sigma_est > 0.
double volatility_ratio(double sigma_est, double sigma_realized);

/// Y = 1 iff q > 1 (a tie counts as 0).
inline int volatility_target(double q) { return q > 1.0 ? 1 : 0; }

struct SignalParameters {
  std::size_t theta = 250;
  std::size_t L = 10;
  std::size_t dT = 5;
  std::size_t theta_forward = 250;
};

/// Aligned predictor and target per window. Rows cover the windows where
/// the persistence value exists and the forward window is complete.
struct SignalSeries {
  SignalParameters params;
  SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival;
  std::vector<std::size_t> window_indices;  // a, position in the window sequence
  std::vector<std::size_t> window_starts;   // first return observation of T_a
  std::vector<double> es;                   // <ES> or <z>
  std::vector<double> q;
  std::vector<int> y;
  /// q of the latest earlier window whose forward window had ended by the
  /// end of T_a; NaN when there is none.
  std::vector<double> past_q;

  std::size_t size() const { return es.size(); }
  /// Rows [first, last).
  SignalSeries slice(std::size_t first, std::size_t last) const;
  /// Rows whose past_q is defined.
  SignalSeries with_past_q() const;
};

/// Per-window quantities that do not depend on L: the estimated and
/// realized market volatility for every window of one theta.
struct VolatilityTrack {
  std::vector<WindowSpec> windows;
  std::vector<double> sigma_est;
  std::vector<double> sigma_realized;  // NaN where the forward window is incomplete
};

VolatilityTrack volatility_track(const ReturnTable& returns, const std::vector<WindowSpec>& windows,
                                 const Eigen::VectorXd& weights);

/// Index of the window that supplies the past q for window a, or -1.
long past_q_source(const std::vector<WindowSpec>& windows, std::size_t a);

/// Joins a persistence series with the volatility track.
SignalSeries assemble_signal_series(const PersistenceSeries& persistence, const VolatilityTrack& track,
                                    const SignalParameters& params);

struct WindowAnalysisOptions {
  std::size_t dT = 5;
  std::size_t theta_forward = 250;
  double divisor = 3.0;
  FilterKind kind = FilterKind::Pmfg;
  bool edge_survival = true;    // build graphs and their lag table
  bool metacorrelation = false; // lag table of metacorrelations
  std::size_t max_lag = 100;
  bool keep_graphs = false;     // retain every graph (similarity dumps)
  bool keep_triangles = false;  // retain every standardized triangle
  std::size_t workers = 1;
};

/// Everything one theta contributes, shared by all L: windows, volatilities
/// and lagged similarities.
struct WindowAnalysis {
  std::size_t theta = 0;
  VolatilityTrack track;
  LagTable es_lags;
  LagTable z_lags;
  std::vector<FilteredGraph> graphs;
  std::vector<Eigen::VectorXd> triangles;
};

WindowAnalysis analyze_windows(const ReturnTable& returns, std::size_t theta, const WindowAnalysisOptions& options,
                               const std::vector<std::string>* tickers = nullptr);

/// Message naming the data constraint that leaves a (theta, L) cell empty.
std::string signal_shortfall(const SignalParameters& params, std::size_t n_obs);

/// End-to-end series for one (theta, L): windows, smoothed correlations,
/// filtered graphs, persistence and volatility ratio. Insufficient data
/// gives an empty series and a warning naming the limiting constraint.
SignalSeries build_signal_series(const ReturnTable& returns, const SignalParameters& params, double divisor = 3.0,
                                 FilterKind kind = FilterKind::Pmfg,
                                 SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival);

/// Canonical exchange format: "window_start_index,es,q,y".
void write_signal_csv(const SignalSeries& series, std::ostream& out);

}  // namespace corrpersist
