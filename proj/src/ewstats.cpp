#include "corrpersist/ewstats.hpp"

#include "corrpersist/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace corrpersist {

Eigen::VectorXd ew_weights(const SmoothingScheme& scheme) {
  if (scheme.theta < 2) throw Error(ErrorKind::Config, "smoothing window needs theta >= 2");
  if (!(scheme.alpha > 0.0)) throw Error(ErrorKind::Config, "smoothing decay scale must be positive");
  const auto theta = static_cast<Eigen::Index>(scheme.theta);
  Eigen::VectorXd w(theta);
  if (std::isinf(scheme.alpha)) {
    w.setConstant(1.0 / static_cast<double>(theta));
    return w;
  }
  for (Eigen::Index t = 1; t <= theta; ++t) {
    w(t - 1) = std::exp(static_cast<double>(t - theta) / scheme.alpha);
  }
  return w / w.sum();
}

Eigen::MatrixXd ew_covariance(const Eigen::Ref<const Eigen::MatrixXd>& window, const Eigen::VectorXd& weights) {
  if (window.rows() != weights.size()) {
    throw Error(ErrorKind::Incompatible, "window has " + std::to_string(window.rows()) + " rows but " +
                                             std::to_string(weights.size()) + " weights");
  }
  const Eigen::RowVectorXd mean = weights.transpose() * window;
  const Eigen::MatrixXd centered = window.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * (weights.asDiagonal() * centered);
  // GEMM rounding can leave the two triangles a few ulps apart.
  for (Eigen::Index j = 0; j < cov.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) cov(j, i) = cov(i, j);
  }
  return cov;
}

Eigen::MatrixXd ew_correlation(const Eigen::Ref<const Eigen::MatrixXd>& window, const SmoothingScheme& scheme,
                               const std::vector<std::string>* tickers) {
  if (window.rows() != static_cast<Eigen::Index>(scheme.theta)) {
    throw Error(ErrorKind::Incompatible, "window length does not match smoothing scheme theta");
  }
  return ew_correlation(window, ew_weights(scheme), tickers);
}

Eigen::MatrixXd ew_correlation(const Eigen::Ref<const Eigen::MatrixXd>& window, const Eigen::VectorXd& weights,
                               const std::vector<std::string>* tickers) {
  if (window.rows() < 2) throw Error(ErrorKind::Size, "correlation window needs at least 2 observations");
  const Eigen::Index n = window.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double first = window(0, j);
    bool constant = true;
    for (Eigen::Index t = 1; t < window.rows() && constant; ++t) constant = (window(t, j) == first);
    if (constant) {
      const std::string name = tickers && static_cast<std::size_t>(j) < tickers->size()
                                   ? (*tickers)[static_cast<std::size_t>(j)]
                                   : "#" + std::to_string(j);
      throw Error(ErrorKind::Degenerate, "asset " + name + " has constant returns in the window");
    }
  }
  Eigen::MatrixXd rho = ew_covariance(window, weights);
  Eigen::VectorXd inv_sd(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(rho(j, j) > 0.0)) {
      throw Error(ErrorKind::Degenerate, "asset #" + std::to_string(j) + " has zero weighted variance");
    }
    inv_sd(j) = 1.0 / std::sqrt(rho(j, j));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double r = std::clamp(rho(i, j) * inv_sd(i) * inv_sd(j), -1.0, 1.0);
      rho(i, j) = r;
      rho(j, i) = r;
    }
    rho(j, j) = 1.0;
  }
  return rho;
}

double ew_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_window, const SmoothingScheme& scheme) {
  if (market_window.size() != static_cast<Eigen::Index>(scheme.theta)) {
    throw Error(ErrorKind::Incompatible, "market window length does not match smoothing scheme theta");
  }
  return ew_market_volatility(market_window, ew_weights(scheme));
}

double ew_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_window, const Eigen::VectorXd& weights) {
  if (market_window.size() != weights.size()) {
    throw Error(ErrorKind::Incompatible, "market window and weights differ in length");
  }
  // Shift by the first value so a constant window gives exactly zero.
  const double shift = market_window.size() > 0 ? market_window(0) : 0.0;
  const double mean = weights.dot((market_window.array() - shift).matrix());
  double var = 0.0;
  for (Eigen::Index t = 0; t < market_window.size(); ++t) {
    const double d = market_window(t) - shift - mean;
    var += weights(t) * d * d;
  }
  return std::sqrt(var);
}

double realized_market_volatility(const Eigen::Ref<const Eigen::VectorXd>& market_forward) {
  if (market_forward.size() < 2) throw Error(ErrorKind::Size, "forward window needs at least 2 observations");
  const Eigen::ArrayXd shifted = market_forward.array() - market_forward(0);
  const double mean = shifted.mean();
  const double var = (shifted - mean).square().sum() / static_cast<double>(market_forward.size());
  return std::sqrt(var);
}

WindowedCorrelation analyze_window(const ReturnTable& returns, const WindowSpec& window, const Eigen::VectorXd& weights,
                                   const std::vector<std::string>* tickers) {
  const auto start = static_cast<Eigen::Index>(window.start);
  const auto len = static_cast<Eigen::Index>(window.end - window.start);
  WindowedCorrelation out;
  out.window = window;
  out.rho = ew_correlation(returns.returns.middleRows(start, len), weights, tickers);
  out.sigma_market = ew_market_volatility(returns.market_return.segment(start, len), weights);
  return out;
}

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace corrpersist
