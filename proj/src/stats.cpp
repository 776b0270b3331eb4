#include "corrpersist/stats.hpp"

#include "corrpersist/error.hpp"
#include "corrpersist/parallel.hpp"
#include "corrpersist/rng.hpp"

#include <algorithm>
#include <cmath>

namespace corrpersist {

namespace {

// Pearson without error reporting: NaN when either side has zero variance.
double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nan("");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Incompatible, "pearson of series with lengths " + std::to_string(x.size()) + " and " +
                                             std::to_string(y.size()));
  }
  if (x.size() < 3) throw Error(ErrorKind::Size, "pearson needs at least 3 observations");
  const double r = pearson_or_nan(x, y);
  if (std::isnan(r)) throw Error(ErrorKind::Degenerate, "pearson of a series with zero variance");
  return r;
}

std::size_t optimal_block_length(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 20) throw Error(ErrorKind::Size, "block length selection needs at least 20 observations");
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= nd;
  std::vector<double> eps(n);
  for (std::size_t i = 0; i < n; ++i) eps[i] = x[i] - mean;

  const auto kn = static_cast<std::size_t>(std::max(5.0, std::floor(std::log10(nd))));
  const std::size_t m_max = static_cast<std::size_t>(std::ceil(std::sqrt(nd))) + kn;
  const double critical = 2.0 * std::sqrt(std::log10(nd) / nd);
  const double b_max = std::ceil(std::min(3.0 * std::sqrt(nd), nd / 3.0));

  // Autocovariances up to m_max + kn (needed for the insignificance run).
  const std::size_t max_lag = std::min(n - 1, m_max + kn);
  std::vector<double> acv(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = k; t < n; ++t) s += eps[t] * eps[t - k];
    acv[k] = s / nd;
  }
  if (!(acv[0] > 0.0)) throw Error(ErrorKind::Degenerate, "block length of a constant series");

  // Smallest m whose next kn autocorrelations are all insignificant.
  std::size_t m_hat = m_max;
  bool found = false;
  for (std::size_t m = 0; m + kn <= max_lag && !found; ++m) {
    bool quiet = true;
    for (std::size_t k = 1; k <= kn && quiet; ++k) quiet = std::abs(acv[m + k] / acv[0]) < critical;
    if (quiet) {
      m_hat = m;
      found = true;
    }
  }
  const std::size_t big_m = found ? std::min(2 * std::max<std::size_t>(m_hat, 1), m_max) : m_max;
  const std::size_t bm = std::min(big_m, max_lag);

  double g = 0.0, long_run = acv[0];
  for (std::size_t k = 1; k <= bm; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(bm);
    const double lambda = t <= 0.5 ? 1.0 : 2.0 * (1.0 - t);
    g += 2.0 * lambda * static_cast<double>(k) * acv[k];
    long_run += 2.0 * lambda * acv[k];
  }
  const double d_cb = 4.0 / 3.0 * long_run * long_run;
  double b = d_cb > 0.0 ? std::cbrt(2.0 * g * g / d_cb) * std::cbrt(nd) : b_max;
  if (!std::isfinite(b)) b = b_max;
  b = std::min(std::ceil(b), b_max);
  return static_cast<std::size_t>(std::max(1.0, b));
}

std::size_t optimal_block_length(std::span<const double> x, std::span<const double> y) {
  return std::max(optimal_block_length(x), optimal_block_length(y));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::Size, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void BootstrapConfig::validate() const {
  if (n_resamples < 100) throw Error(ErrorKind::Config, "bootstrap needs at least 100 resamples");
  if (block_length && *block_length < 1) throw Error(ErrorKind::Config, "block length must be at least 1");
  if (ci_levels.empty()) throw Error(ErrorKind::Config, "at least one confidence level is required");
  for (double level : ci_levels) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::Config, "confidence levels must lie in (0, 1)");
  }
}

const ConfidenceInterval* CorrelationTestResult::interval(double level) const {
  for (const auto& ci : intervals) {
    if (std::abs(ci.level - level) < 1e-12) return &ci;
  }
  return nullptr;
}

std::string CorrelationTestResult::stars() const {
  const auto* ci99 = interval(0.99);
  const auto* ci95 = interval(0.95);
  if (ci99 && ci99->significant) return "**";
  if (ci95 && ci95->significant) return "*";
  return "";
}

CorrelationTestResult block_bootstrap_ci(std::span<const double> x, std::span<const double> y,
                                         const BootstrapConfig& cfg) {
  cfg.validate();
  CorrelationTestResult result;
  result.pearson_r = pearson(x, y);
  const std::size_t n = x.size();
  result.n_observations = n;
  std::size_t b = cfg.block_length ? *cfg.block_length : optimal_block_length(x, y);
  b = std::min(b, n);
  result.block_length_used = b;

  std::vector<double> rs(cfg.n_resamples);
  std::vector<std::size_t> redraws(cfg.n_resamples, 0);
  parallel_for(cfg.n_resamples, cfg.workers, [&](std::size_t r) {
    Rng rng = Rng::for_stream(cfg.seed, r);
    std::vector<double> xs(n), ys(n);
    constexpr std::size_t kMaxAttempts = 1000;
    for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
      std::size_t filled = 0;
      while (filled < n) {
        const auto start = static_cast<std::size_t>(rng.below(n));
        for (std::size_t j = 0; j < b && filled < n; ++j, ++filled) {
          const std::size_t idx = (start + j) % n;
          xs[filled] = x[idx];
          ys[filled] = y[idx];
        }
      }
      const double v = pearson_or_nan(xs, ys);
      if (!std::isnan(v)) {
        rs[r] = v;
        return;
      }
      ++redraws[r];
    }
    throw Error(ErrorKind::Degenerate, "bootstrap resamples keep collapsing to zero variance");
  });
  for (std::size_t c : redraws) result.redrawn_resamples += c;
  if (result.redrawn_resamples * 100 > cfg.n_resamples) {
    warn("bootstrap redrew " + std::to_string(result.redrawn_resamples) + " zero-variance resamples out of " +
         std::to_string(cfg.n_resamples));
  }

  std::sort(rs.begin(), rs.end());
  for (double level : cfg.ci_levels) {
    ConfidenceInterval ci;
    ci.level = level;
    ci.lower = quantile_sorted(rs, (1.0 - level) / 2.0);
    ci.upper = quantile_sorted(rs, (1.0 + level) / 2.0);
    ci.significant = ci.lower > 0.0 || ci.upper < 0.0;
    result.intervals.push_back(ci);
  }
  return result;
}

}  // namespace corrpersist
