#include "corrpersist/volratio.hpp"

#include "corrpersist/error.hpp"
#include "corrpersist/ewstats.hpp"
#include "corrpersist/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>

namespace corrpersist {

double volatility_ratio(double sigma_est, double sigma_realized) {
  if (!(sigma_est > 0.0)) {
    throw Error(ErrorKind::Degenerate, "estimated volatility is zero; the volatility ratio is undefined");
  }
  return sigma_realized / sigma_est;
}

SignalSeries SignalSeries::slice(std::size_t first, std::size_t last) const {
  SignalSeries out;
  out.params = params;
  out.measure = measure;
  last = std::min(last, size());
  for (std::size_t k = first; k < last; ++k) {
    out.window_indices.push_back(window_indices[k]);
    out.window_starts.push_back(window_starts[k]);
    out.es.push_back(es[k]);
    out.q.push_back(q[k]);
    out.y.push_back(y[k]);
    out.past_q.push_back(past_q[k]);
  }
  return out;
}

SignalSeries SignalSeries::with_past_q() const {
  SignalSeries out;
  out.params = params;
  out.measure = measure;
  for (std::size_t k = 0; k < size(); ++k) {
    if (std::isnan(past_q[k])) continue;
    out.window_indices.push_back(window_indices[k]);
    out.window_starts.push_back(window_starts[k]);
    out.es.push_back(es[k]);
    out.q.push_back(q[k]);
    out.y.push_back(y[k]);
    out.past_q.push_back(past_q[k]);
  }
  return out;
}

VolatilityTrack volatility_track(const ReturnTable& returns, const std::vector<WindowSpec>& windows,
                                 const Eigen::VectorXd& weights) {
  VolatilityTrack track;
  track.windows = windows;
  track.sigma_est.reserve(windows.size());
  track.sigma_realized.reserve(windows.size());
  for (const auto& w : windows) {
    const auto start = static_cast<Eigen::Index>(w.start);
    const auto len = static_cast<Eigen::Index>(w.end - w.start);
    track.sigma_est.push_back(ew_market_volatility(returns.market_return.segment(start, len), weights));
    if (w.forward_complete) {
      const auto fs = static_cast<Eigen::Index>(w.forward_start);
      const auto flen = static_cast<Eigen::Index>(w.forward_end - w.forward_start);
      track.sigma_realized.push_back(realized_market_volatility(returns.market_return.segment(fs, flen)));
    } else {
      track.sigma_realized.push_back(std::nan(""));
    }
  }
  return track;
}

long past_q_source(const std::vector<WindowSpec>& windows, std::size_t a) {
  for (std::size_t b = a + 1; b-- > 0;) {
    if (windows[b].forward_complete && windows[b].forward_end <= windows[a].end) return static_cast<long>(b);
  }
  return -1;
}

SignalSeries assemble_signal_series(const PersistenceSeries& persistence, const VolatilityTrack& track,
                                    const SignalParameters& params) {
  SignalSeries out;
  out.params = params;
  out.measure = persistence.measure;
  for (std::size_t k = 0; k < persistence.values.size(); ++k) {
    const std::size_t a = persistence.window_indices[k];
    const auto& w = track.windows[a];
    if (!w.forward_complete) continue;
    double q;
    try {
      q = volatility_ratio(track.sigma_est[a], track.sigma_realized[a]);
    } catch (const Error& e) {
      throw e.with_context("window starting at observation " + std::to_string(w.start));
    }
    const long b = past_q_source(track.windows, a);
    double past = std::nan("");
    if (b >= 0 && track.sigma_est[static_cast<std::size_t>(b)] > 0.0) {
      past = track.sigma_realized[static_cast<std::size_t>(b)] / track.sigma_est[static_cast<std::size_t>(b)];
    }
    out.window_indices.push_back(a);
    out.window_starts.push_back(w.start);
    out.es.push_back(persistence.values[k]);
    out.q.push_back(q);
    out.y.push_back(volatility_target(q));
    out.past_q.push_back(past);
  }
  return out;
}

WindowAnalysis analyze_windows(const ReturnTable& returns, std::size_t theta, const WindowAnalysisOptions& options,
                               const std::vector<std::string>* tickers) {
  WindowAnalysis out;
  out.theta = theta;
  const auto windows = make_windows(returns.n_obs(), theta, options.dT, options.theta_forward);
  const Eigen::VectorXd weights = ew_weights(SmoothingScheme::with_divisor(theta, options.divisor));
  out.track = volatility_track(returns, windows, weights);
  const std::size_t n = windows.size();
  if (options.edge_survival) out.es_lags = LagTable(n, options.max_lag);
  if (options.metacorrelation) out.z_lags = LagTable(n, options.max_lag);
  if (n == 0) return out;

  std::vector<FilteredGraph> graphs(options.edge_survival ? n : 0);
  std::deque<Eigen::VectorXd> recent;  // triangles of the last max_lag windows, newest last
  const std::size_t chunk = std::max<std::size_t>(16, 4 * options.workers);
  std::vector<Eigen::VectorXd> fresh(chunk);

  for (std::size_t first = 0; first < n; first += chunk) {
    const std::size_t count = std::min(chunk, n - first);
    parallel_for(count, options.workers, [&](std::size_t k) {
      const auto& w = windows[first + k];
      try {
        const auto start = static_cast<Eigen::Index>(w.start);
        const Eigen::MatrixXd rho =
            ew_correlation(returns.returns.middleRows(start, static_cast<Eigen::Index>(theta)), weights, tickers);
        if (options.edge_survival) graphs[first + k] = build_filtered_graph(rho, options.kind);
        if (options.metacorrelation) fresh[k] = standardized_upper_triangle(rho);
      } catch (const Error& e) {
        const std::string date =
            w.start < returns.dates.size() ? " (" + returns.dates[w.start] + ")" : std::string();
        throw e.with_context("theta=" + std::to_string(theta) + ", window starting at observation " +
                             std::to_string(w.start) + date);
      }
    });
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t a = first + k;
      if (options.edge_survival) {
        for (std::size_t lag = 1; lag <= std::min(a, options.max_lag); ++lag) {
          out.es_lags.set(a, lag, edge_survival(graphs[a], graphs[a - lag]));
        }
      }
      if (options.metacorrelation) {
        const Eigen::VectorXd& u = fresh[k];
        const auto m = static_cast<double>(u.size());
        for (std::size_t lag = 1; lag <= recent.size(); ++lag) {
          const double z = u.dot(recent[recent.size() - lag]) / m;
          out.z_lags.set(a, lag, std::clamp(z, -1.0, 1.0));
        }
        if (options.keep_triangles) out.triangles.push_back(u);
        recent.push_back(std::move(fresh[k]));
        if (recent.size() > options.max_lag) recent.pop_front();
      }
    }
  }
  if (options.keep_graphs) out.graphs = std::move(graphs);
  return out;
}

std::string signal_shortfall(const SignalParameters& p, std::size_t n_obs) {
  const std::size_t needed = p.theta + p.L * p.dT + p.theta_forward;
  return "no aligned (persistence, q) pair for theta=" + std::to_string(p.theta) + ", L=" + std::to_string(p.L) +
         ": needs theta + L*dT + theta_forward = " + std::to_string(needed) + " return observations, have " +
         std::to_string(n_obs);
}

SignalSeries build_signal_series(const ReturnTable& returns, const SignalParameters& params, double divisor,
                                 FilterKind kind, SimilarityMeasure measure) {
  if (params.L < 1) throw Error(ErrorKind::Config, "lookback L must be at least 1");
  WindowAnalysisOptions options;
  options.dT = params.dT;
  options.theta_forward = params.theta_forward;
  options.divisor = divisor;
  options.kind = kind;
  options.edge_survival = measure == SimilarityMeasure::EdgeSurvival;
  options.metacorrelation = measure == SimilarityMeasure::Metacorrelation;
  options.max_lag = params.L;
  const WindowAnalysis analysis = analyze_windows(returns, params.theta, options);
  const LagTable& lags = options.edge_survival ? analysis.es_lags : analysis.z_lags;
  SignalSeries series;
  series.params = params;
  series.measure = measure;
  if (lags.n_windows() > 0) {
    series = assemble_signal_series(persistence_series(lags, params.L, measure, divisor), analysis.track, params);
  }
  if (series.size() == 0) warn(signal_shortfall(params, returns.n_obs()));
  return series;
}

void write_signal_csv(const SignalSeries& series, std::ostream& out) {
  out << "window_start_index,es,q,y\n";
  char buf[96];
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d", series.window_starts[k], series.es[k], series.q[k],
                  series.y[k]);
    out << buf << '\n';
  }
}

}  // namespace corrpersist
