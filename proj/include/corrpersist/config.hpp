#pragma once

#include "corrpersist/ingest.hpp"
#include "corrpersist/netfilter.hpp"
#include "corrpersist/persistence.hpp"
#include "corrpersist/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace corrpersist {

/// Everything a run depends on. Defaults are the reference parameters.
struct RunConfig {
  std::string input;
  PriceFormat input_format = PriceFormat::Auto;
  std::vector<std::size_t> theta_grid{250, 500, 750, 1000};
  std::vector<std::size_t> L_grid{10, 25, 50, 100};
  std::size_t dT = 5;
  std::size_t theta_forward = 250;
  double smoothing_divisor = 3.0;
  FilterKind filter = FilterKind::Pmfg;
  SimilarityMeasure measure = SimilarityMeasure::EdgeSurvival;
  double f_test = 0.30;
  double p_max = 0.5;
  bool knn = true;
  std::size_t knn_k = 5;
  BootstrapConfig bootstrap;
  std::string output_dir = "corrpersist-out";
  bool dump_similarity = true;
  bool dump_correlations = false;
  bool dump_graphs = false;
  std::size_t workers = 1;

  /// Throws Error(Config) on any out-of-range value.
  void validate() const;

  /// Sets one field from its textual form; unknown keys and bad values raise
  /// Error(Config).
  void set(const std::string& key, const std::string& value);

  /// Flat "key = value" text, one line per field in a fixed order; feeding
  /// it back through parse_config reproduces this config.
  std::string render() const;
};

/// Applies "key = value" lines on top of `base`. '#' starts a comment, blank
/// lines are ignored, lists are comma-separated.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Environment variable that overrides the config file's output directory
/// (but not an explicit command-line value).
inline constexpr const char* kOutputDirEnv = "CORRPERSIST_OUTPUT_DIR";

}  // namespace corrpersist
