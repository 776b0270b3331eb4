#pragma once

#include "corrpersist/ingest.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace corrpersist {

/// Exponential smoothing over a window of `theta` observations:
/// w_t = w0 * exp((t - theta) / alpha), t = 1..theta, normalised to sum 1.
/// alpha = +inf gives uniform weights.
struct SmoothingScheme {
  std::size_t theta = 0;
  double alpha = 0.0;

  /// Decay scale theta / divisor; divisor 3 is the default throughout.
  static SmoothingScheme with_divisor(std::size_t theta, double divisor = 3.0) {
    return {theta, static_cast<double>(theta) / divisor};
  }
  static SmoothingScheme uniform(std::size_t theta) {
    return {theta, std::numeric_limits<double>::infinity()};
  }
};

/// Positive, strictly increasing (unless uniform), summing to 1.
Eigen::VectorXd ew_weights(const SmoothingScheme& scheme);

/// Weighted covariance (population convention, weights sum to 1).
Eigen::MatrixXd ew_covariance(const Eigen::Ref<const Eigen::MatrixXd>& window, const Eigen::VectorXd& weights);

/// Weighted Pearson correlation of a theta x N return window. The result is
/// exactly symmetric with a unit diagonal. A column that is constant raises
/// Error(Degenerate) naming the asset (by ticker when `tickers` is given).
Eigen::MatrixXd ew_correlation(const Eigen::Ref<const Eigen::MatrixXd>& window, const SmoothingScheme& scheme,
                               const std::vector<std::string>* tickers = nullptr);

/// Same, with precomputed weights (the pipeline reuses one weight vector per theta).
Eigen::MatrixXd ew_correlation(const Eigen::Ref<const Eigen::MatrixXd>& window, const Eigen::VectorXd& weights,
                               const std::vector<std::string>* tickers = nullptr);

/// sqrt(sum_t w_t (r_M(t) - mu_w)^2): the smoothed estimate of market volatility.
double ew_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_window, const SmoothingScheme& scheme);
double ew_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_window, const Eigen::VectorXd& weights);

/// Unweighted population standard deviation of the forward-window market return.
double realized_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_forward);

struct WindowedCorrelation {
  WindowSpec window;
  Eigen::MatrixXd rho;
  double sigma_market = 0.0;
};

/// Correlation matrix and smoothed market volatility for one window.
WindowedCorrelation analyze_window(const ReturnTable& returns, const WindowSpec& window, const Eigen::VectorXd& weights,
                                   const std::vector<std::string>* tickers = nullptr);

/// Writes an N x N matrix as CSV with round-trip precision.
void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out);

}  // namespace corrpersist
