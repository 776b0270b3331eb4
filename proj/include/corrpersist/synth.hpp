#pragma once

#include "corrpersist/ingest.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace corrpersist {

/// One stretch of a factor model:
/// r_i(t) = sum_f loadings(i, f) F_f(t) + eps_i(t),
/// F_f ~ N(0, factor_vol(f)^2), eps_i ~ N(0, idio_vol(i)^2), all independent.
struct Regime {
  std::size_t duration = 0;   // return days
  Eigen::MatrixXd loadings;   // N x F
  Eigen::VectorXd idio_vol;   // N
  Eigen::VectorXd factor_vol; // F
};

struct SynthSpec {
  std::size_t n_assets = 0;
  std::size_t n_days = 0;  // return days; the table has n_days + 1 price rows
  std::vector<Regime> regimes;
  std::uint64_t seed = 1;

  /// Throws Error(Config) unless durations sum to n_days, shapes agree,
  /// volatilities are positive and loadings finite.
  void validate() const;
};

/// Prices start at 100 and compound the simulated log-returns. Dates are
/// consecutive weekdays from 2000-01-03. Deterministic in the seed.
PriceTable generate(const SynthSpec& spec);

/// Single regime with one common factor: every loading 1, small noise.
SynthSpec one_factor_spec(std::size_t n_assets, std::size_t n_days, std::uint64_t seed);

/// Layout of the regime-switch benchmark: a market factor plus sector
/// factors, with episodes in which part of the sector membership drifts
/// asset by asset until a volatility surge starts. One episode is a full
/// sector rotation. Volatilities are daily.
struct BenchmarkDesign {
  std::size_t n_assets = 50;
  std::size_t n_days = 3000;
  std::size_t n_sectors = 5;
  double market_vol = 0.005;
  double sector_vol = 0.008;
  double idio_vol = 0.004;
  std::size_t rotation_day = 1500;  // the full rotation runs over [rotation_day, rotation_day + rotation_span)
  std::size_t rotation_span = 250;
  double churn_fraction = 2.0;  // sector moves per asset in an ordinary episode
  double gap_min = 150, gap_max = 700;  // quiet days after a surge
  double lead_min = 200, lead_max = 300;  // churn start to surge
  double surge_min = 70, surge_max = 130;
  double surge_low = 1.8, surge_high = 2.4;  // volatility multiplier
  double background_sigma = 0.0;  // log-sd of a slow background volatility level
  double background_min = 60, background_max = 250;

  void validate() const;
};

/// Episode timing, loadings and surge sizes vary with the seed.
SynthSpec regime_switch_spec(std::uint64_t seed, const BenchmarkDesign& design = {});
PriceTable regime_switch_benchmark(std::uint64_t seed, const BenchmarkDesign& design = {});

/// Preset by name: "regime-switch" or "one-factor".
PriceTable synth_preset(const std::string& name, std::uint64_t seed);

}  // namespace corrpersist
