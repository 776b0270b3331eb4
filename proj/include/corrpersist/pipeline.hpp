#pragma once

#include "corrpersist/classify.hpp"
#include "corrpersist/config.hpp"
#include "corrpersist/ingest.hpp"
#include "corrpersist/persistence.hpp"
#include "corrpersist/stats.hpp"
#include "corrpersist/volratio.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace corrpersist {

/// Similarity between every pair of windows of one theta.
struct ThetaSimilarity {
  std::size_t theta = 0;
  std::vector<std::size_t> window_starts;
  SimilarityMatrix matrix;
};

struct GridRequest {
  bool edge_survival = true;
  bool metacorrelation = false;
  bool similarity = false;  // also fill GridAnalysis::similarity
};

/// Signal series for every (theta, L) of the configured grid in theta-major
/// order. A series is empty when the data cannot support its cell; `notes`
/// then says why.
struct GridAnalysis {
  std::vector<SignalSeries> es;
  std::vector<SignalSeries> z;
  std::vector<ThetaSimilarity> es_similarity;
  std::vector<ThetaSimilarity> z_similarity;
  std::vector<std::string> notes;
};

GridAnalysis analyze_grid(const ReturnTable& returns, const RunConfig& cfg, const GridRequest& request);

struct InterplayCell {
  std::size_t theta = 0;
  std::size_t L = 0;
  SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival;
  std::size_t n_points = 0;
  std::optional<CorrelationTestResult> test;
  std::string note;  // why `test` is missing
};

/// pearson(persistence, q) with block-bootstrap intervals for one series.
InterplayCell interplay_cell(const SignalSeries& series, const BootstrapConfig& bootstrap);

std::vector<ForecastCell> forecast_grid(const std::vector<SignalSeries>& cells, const RunConfig& cfg);

/// What a subcommand wrote.
struct RunSummary {
  std::string output_dir;
  std::vector<std::string> files;  // relative to output_dir
  std::string text;                // human-readable digest for the terminal
};

/// Each writes into cfg.output_dir, together with config.txt (the resolved
/// configuration) and input.sha256 (digest of the parsed input).
RunSummary run_interplay(const PriceTable& prices, const RunConfig& cfg);
RunSummary run_forecast(const PriceTable& prices, const RunConfig& cfg);
RunSummary run_temporal(const PriceTable& prices, const RunConfig& cfg);

/// Canonical wide CSV of `prices`.
RunSummary run_normalize(const PriceTable& prices, const std::string& output_path);

}  // namespace corrpersist
