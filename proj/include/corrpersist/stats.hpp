#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrpersist {

/// Pearson correlation (two-pass). Needs equal lengths >= 3 and nonzero
/// variances; otherwise Error(Incompatible / Size / Degenerate).
double pearson(std::span<const double> x, std::span<const double> y);

/// Automatic block length for the circular block bootstrap from the
/// flat-top lag-window rule of Politis and White (2004), with the Patton,
/// Politis and White (2009) correction. Needs at least 20 observations.
std::size_t optimal_block_length(std::span<const double> x);

/// For paired resampling: the larger of the two series' lengths.
std::size_t optimal_block_length(std::span<const double> x, std::span<const double> y);

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);

struct BootstrapConfig {
  std::size_t n_resamples = 10000;
  std::optional<std::size_t> block_length;  // empty = automatic
  std::uint64_t seed = 20160301;
  std::vector<double> ci_levels{0.95, 0.99};
  std::size_t workers = 1;

  /// Throws Error(Config) on n_resamples < 100, block_length < 1 or a level
  /// outside (0, 1).
  void validate() const;
};

struct ConfidenceInterval {
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool significant = false;  // interval excludes 0
};

struct CorrelationTestResult {
  double pearson_r = 0.0;
  std::vector<ConfidenceInterval> intervals;  // one per configured level, same order
  std::size_t block_length_used = 0;
  std::size_t n_observations = 0;
  std::size_t redrawn_resamples = 0;  // zero-variance resamples replaced

  const ConfidenceInterval* interval(double level) const;
  /// "**" if the 99% interval excludes 0, "*" if only the 95% one does.
  std::string stars() const;
};

/// Percentile intervals for pearson(x, y) from a paired circular block
/// bootstrap. Resample r draws from Rng::for_stream(seed, r), so results are
/// bit-identical for a given seed regardless of worker count.
CorrelationTestResult block_bootstrap_ci(std::span<const double> x, std::span<const double> y,
                                         const BootstrapConfig& cfg);

}  // namespace corrpersist
