#include "corrpersist/pipeline.hpp"

#include "corrpersist/error.hpp"
#include "corrpersist/ewstats.hpp"
#include "corrpersist/netfilter.hpp"
#include "corrpersist/report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace corrpersist {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Triangles for a metacorrelation similarity dump are kept only below this size.
constexpr double kTriangleBudgetBytes = 512.0 * 1024 * 1024;

std::string cell_name(std::size_t theta, std::size_t L) {
  return "theta" + std::to_string(theta) + "_L" + std::to_string(L);
}

std::string level_label(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", level * 100.0);
  return buf;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

std::string csv_opt(const std::optional<double>& v) { return v ? csv_double(*v) : std::string(); }

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : root_(dir) { summary_.output_dir = dir; }

  void write(const std::string& name, const std::string& contents) {
    write_file_atomic(root_ / name, contents);
    summary_.files.push_back(name);
  }

  void provenance(const PriceTable& prices, const RunConfig& cfg) {
    write("config.txt", cfg.render());
    write("input.sha256", prices.source_digest + "  " + (cfg.input.empty() ? "-" : cfg.input) + "\n");
  }

  RunSummary finish(std::string text) {
    summary_.text = std::move(text);
    return std::move(summary_);
  }

 private:
  fs::path root_;
  RunSummary summary_;
};

Json test_json(const CorrelationTestResult& t) {
  Json j;
  j["r"] = number(t.pearson_r);
  Json cis = Json::array();
  for (const auto& ci : t.intervals) {
    cis.push_back({{"level", ci.level}, {"lower", number(ci.lower)}, {"upper", number(ci.upper)},
                   {"excludes_zero", ci.significant}});
  }
  j["intervals"] = cis;
  j["stars"] = t.stars();
  j["block_length"] = t.block_length_used;
  j["n"] = t.n_observations;
  j["redrawn_resamples"] = t.redrawn_resamples;
  return j;
}

Json model_json(const LogisticModel& m) {
  return {{"beta0", number(m.beta0)},
          {"beta1", number(m.beta1)},
          {"converged", m.converged},
          {"separated", m.separated},
          {"iterations", m.n_iterations},
          {"log_likelihood", number(m.log_likelihood)},
          {"threshold", number(m.threshold())}};
}

Json report_json(const ClassifierReport& r) {
  Json j;
  j["predictor"] = r.predictor;
  j["model"] = r.model ? model_json(*r.model) : Json(nullptr);
  j["confusion"] = {{"q1_true_positive", r.counts.q1},
                    {"q2_false_negative", r.counts.q2},
                    {"q3_true_negative", r.counts.q3},
                    {"q4_false_positive", r.counts.q4}};
  j["p_plus"] = number(r.p_plus);
  j["tpr"] = number(r.tpr);
  j["fpr"] = number(r.fpr);
  j["auc"] = number(r.auc);
  j["p_value_vs_null"] = number(r.p_value_vs_null);
  j["stars_vs_null"] = r.p_value_vs_null ? pvalue_stars(*r.p_value_vs_null) : std::string();
  j["f_test"] = r.f_test;
  j["p_max"] = r.p_max;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  return j;
}

std::string roc_csv(const RocCurve& roc) {
  std::string out = "p_max,fpr,tpr\n";
  for (const auto& p : roc.points) {
    out += format_double(p.p_max) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
  }
  return out;
}

std::string similarity_csv(const ThetaSimilarity& s) {
  std::string out = "window_start";
  for (auto w : s.window_starts) out += "," + std::to_string(w);
  out += "\n";
  for (Eigen::Index i = 0; i < s.matrix.values.rows(); ++i) {
    out += std::to_string(s.window_starts[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < s.matrix.values.cols(); ++j) out += "," + csv_double(s.matrix.values(i, j));
    out += "\n";
  }
  return out;
}

std::string signal_csv(const SignalSeries& s) {
  std::ostringstream out;
  write_signal_csv(s, out);
  return out.str();
}

ReturnTable checked_returns(const PriceTable& prices, const RunConfig& cfg) {
  cfg.validate();
  try {
    return compute_returns(prices);
  } catch (const Error& e) {
    throw e.with_context("ingest");
  }
}

void dump_window_artifacts(const ReturnTable& returns, const RunConfig& cfg, OutputDir& out) {
  for (auto theta : cfg.theta_grid) {
    const auto windows = make_windows(returns.n_obs(), theta, cfg.dT, cfg.theta_forward);
    const Eigen::VectorXd weights = ew_weights(SmoothingScheme::with_divisor(theta, cfg.smoothing_divisor));
    const std::string dir = "theta" + std::to_string(theta) + "/";
    for (const auto& w : windows) {
      const auto wc = analyze_window(returns, w, weights, &returns.tickers);
      const std::string stem = dir + "window_" + std::to_string(w.start);
      if (cfg.dump_correlations) {
        std::ostringstream m;
        write_matrix_csv(wc.rho, m);
        out.write(stem + "_corr.csv", m.str());
      }
      if (cfg.dump_graphs) {
        std::ostringstream g;
        write_graph_csv(build_filtered_graph(wc.rho, cfg.filter), g);
        out.write(stem + "_" + to_string(cfg.filter) + ".csv", g.str());
      }
    }
  }
}

}  // namespace

GridAnalysis analyze_grid(const ReturnTable& returns, const RunConfig& cfg, const GridRequest& request) {
  cfg.validate();
  GridAnalysis grid;
  const std::size_t max_lag = *std::max_element(cfg.L_grid.begin(), cfg.L_grid.end());
  const double m = static_cast<double>(returns.n_assets()) * static_cast<double>(returns.n_assets() - 1) / 2.0;

  for (auto theta : cfg.theta_grid) {
    WindowAnalysisOptions opts;
    opts.dT = cfg.dT;
    opts.theta_forward = cfg.theta_forward;
    opts.divisor = cfg.smoothing_divisor;
    opts.kind = cfg.filter;
    opts.edge_survival = request.edge_survival;
    opts.metacorrelation = request.metacorrelation;
    opts.max_lag = max_lag;
    opts.workers = cfg.workers;
    opts.keep_graphs = request.similarity && request.edge_survival;
    if (request.similarity && request.metacorrelation) {
      const double n_windows =
          static_cast<double>(make_windows(returns.n_obs(), theta, cfg.dT, cfg.theta_forward).size());
      opts.keep_triangles = n_windows * m * sizeof(double) <= kTriangleBudgetBytes;
      if (!opts.keep_triangles) {
        warn("metacorrelation similarity matrix for theta=" + std::to_string(theta) +
             " skipped: the correlation triangles would exceed the memory budget");
      }
    }
    const WindowAnalysis analysis = analyze_windows(returns, theta, opts, &returns.tickers);

    for (auto L : cfg.L_grid) {
      const SignalParameters params{theta, L, cfg.dT, cfg.theta_forward};
      auto series_for = [&](const LagTable& lags, SimilarityMeasure measure) {
        SignalSeries s;
        s.params = params;
        s.measure = measure;
        if (lags.n_windows() > 0) {
          s = assemble_signal_series(persistence_series(lags, L, measure, cfg.smoothing_divisor), analysis.track,
                                     params);
        }
        return s;
      };
      bool empty = false;
      if (request.edge_survival) {
        grid.es.push_back(series_for(analysis.es_lags, SimilarityMeasure::EdgeSurvival));
        empty = grid.es.back().size() == 0;
      }
      if (request.metacorrelation) {
        grid.z.push_back(series_for(analysis.z_lags, SimilarityMeasure::Metacorrelation));
        empty = empty || grid.z.back().size() == 0;
      }
      if (empty) {
        grid.notes.push_back(signal_shortfall(params, returns.n_obs()));
        warn(grid.notes.back());
      }
    }

    std::vector<std::size_t> starts;
    for (const auto& w : analysis.track.windows) starts.push_back(w.start);
    if (analysis.graphs.size() >= 2) {
      grid.es_similarity.push_back({theta, starts, similarity_matrix(analysis.graphs)});
    }
    if (analysis.triangles.size() >= 2) {
      grid.z_similarity.push_back({theta, starts, similarity_matrix_from_triangles(analysis.triangles)});
    }
  }
  return grid;
}

InterplayCell interplay_cell(const SignalSeries& series, const BootstrapConfig& bootstrap) {
  InterplayCell cell;
  cell.theta = series.params.theta;
  cell.L = series.params.L;
  cell.measure = series.measure;
  cell.n_points = series.size();
  if (series.size() == 0) {
    cell.note = "no aligned windows";
    return cell;
  }
  try {
    cell.test = block_bootstrap_ci(series.es, series.q, bootstrap);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate && e.kind() != ErrorKind::Size) throw;
    cell.note = e.what();
  }
  return cell;
}

std::vector<ForecastCell> forecast_grid(const std::vector<SignalSeries>& cells, const RunConfig& cfg) {
  ForecastOptions options;
  options.f_test = cfg.f_test;
  options.p_max = cfg.p_max;
  options.knn = cfg.knn;
  options.knn_k = cfg.knn_k;
  std::vector<ForecastCell> out;
  out.reserve(cells.size());
  for (const auto& s : cells) {
    try {
      out.push_back(forecast_cell(s, options));
    } catch (const Error& e) {
      throw e.with_context("forecast " + cell_name(s.params.theta, s.params.L));
    }
  }
  return out;
}

RunSummary run_interplay(const PriceTable& prices, const RunConfig& cfg) {
  const ReturnTable returns = checked_returns(prices, cfg);
  GridRequest request;
  request.edge_survival = true;
  request.metacorrelation = true;
  request.similarity = cfg.dump_similarity;
  const GridAnalysis grid = analyze_grid(returns, cfg, request);

  OutputDir out(cfg.output_dir);
  out.provenance(prices, cfg);

  std::vector<InterplayCell> cells;
  for (std::size_t k = 0; k < grid.es.size(); ++k) {
    cells.push_back(interplay_cell(grid.es[k], cfg.bootstrap));
    cells.push_back(interplay_cell(grid.z[k], cfg.bootstrap));
  }
  for (auto& c : cells) {
    if (c.n_points == 0) c.note = signal_shortfall({c.theta, c.L, cfg.dT, cfg.theta_forward}, returns.n_obs());
  }

  std::string csv = "theta,L,measure,n,r";
  for (double level : cfg.bootstrap.ci_levels) {
    csv += ",ci" + level_label(level) + "_lo,ci" + level_label(level) + "_hi";
  }
  csv += ",stars,block_length,redrawn_resamples,note\n";
  Json jcells = Json::array();
  for (const auto& c : cells) {
    csv += std::to_string(c.theta) + "," + std::to_string(c.L) + "," + to_string(c.measure) + "," +
           std::to_string(c.n_points) + ",";
    if (c.test) {
      csv += csv_double(c.test->pearson_r);
      for (const auto& ci : c.test->intervals) csv += "," + csv_double(ci.lower) + "," + csv_double(ci.upper);
      csv += "," + c.test->stars() + "," + std::to_string(c.test->block_length_used) + "," +
             std::to_string(c.test->redrawn_resamples);
    } else {
      csv += std::string(2 * cfg.bootstrap.ci_levels.size(), ',') + ",,,";
    }
    csv += "," + csv_text(c.note) + "\n";
    Json j = {{"theta", c.theta}, {"L", c.L}, {"measure", to_string(c.measure)}, {"n", c.n_points}};
    j["test"] = c.test ? test_json(*c.test) : Json(nullptr);
    j["note"] = c.note;
    jcells.push_back(j);
  }

  Json report;
  report["filter"] = to_string(cfg.filter);
  report["input_sha256"] = prices.source_digest;
  report["bootstrap"] = {{"n_resamples", cfg.bootstrap.n_resamples},
                         {"block_length", cfg.bootstrap.block_length ? Json(*cfg.bootstrap.block_length)
                                                                     : Json("auto")},
                         {"seed", cfg.bootstrap.seed},
                         {"rng", "xoshiro256** seeded by splitmix64(seed, resample index)"}};
  report["cells"] = jcells;
  report["notes"] = grid.notes;
  out.write("interplay_grid.csv", csv);
  out.write("interplay_grid.json", dump(report));

  for (std::size_t k = 0; k < grid.es.size(); ++k) {
    const auto& p = grid.es[k].params;
    if (grid.es[k].size() > 0) out.write("signal_es_" + cell_name(p.theta, p.L) + ".csv", signal_csv(grid.es[k]));
    if (grid.z[k].size() > 0) out.write("signal_z_" + cell_name(p.theta, p.L) + ".csv", signal_csv(grid.z[k]));
  }
  for (const auto& s : grid.es_similarity) {
    out.write("similarity_es_theta" + std::to_string(s.theta) + ".csv", similarity_csv(s));
  }
  for (const auto& s : grid.z_similarity) {
    out.write("similarity_z_theta" + std::to_string(s.theta) + ".csv", similarity_csv(s));
  }
  if (cfg.dump_correlations || cfg.dump_graphs) dump_window_artifacts(returns, cfg, out);

  std::ostringstream text;
  for (auto measure : {SimilarityMeasure::EdgeSurvival, SimilarityMeasure::Metacorrelation}) {
    text << "pearson(" << (measure == SimilarityMeasure::EdgeSurvival ? "<ES>" : "<z>") << ", q), rows theta, columns L\n";
    text << "theta\\L";
    for (auto L : cfg.L_grid) text << '\t' << L;
    text << '\n';
    for (auto theta : cfg.theta_grid) {
      text << theta;
      for (const auto& c : cells) {
        if (c.theta != theta || c.measure != measure) continue;
        char buf[48];
        if (c.test) {
          std::snprintf(buf, sizeof buf, "\t%.4f%s", c.test->pearson_r, c.test->stars().c_str());
        } else {
          std::snprintf(buf, sizeof buf, "\t-");
        }
        text << buf;
      }
      text << '\n';
    }
  }
  for (const auto& note : grid.notes) text << "note: " << note << '\n';
  return out.finish(text.str());
}

RunSummary run_forecast(const PriceTable& prices, const RunConfig& cfg) {
  const ReturnTable returns = checked_returns(prices, cfg);
  GridRequest request;
  request.edge_survival = cfg.measure == SimilarityMeasure::EdgeSurvival;
  request.metacorrelation = cfg.measure == SimilarityMeasure::Metacorrelation;
  const GridAnalysis grid = analyze_grid(returns, cfg, request);
  const auto& series = request.edge_survival ? grid.es : grid.z;
  const std::vector<ForecastCell> cells = forecast_grid(series, cfg);

  OutputDir out(cfg.output_dir);
  out.provenance(prices, cfg);

  std::string csv =
      "theta,L,n_windows,trainable,n_train,n_test,p_plus_es,tpr_es,fpr_es,auc_es,p_plus_q,tpr_q,fpr_q,auc_q,"
      "p_value_vs_null,stars,p_plus_knn,note\n";
  Json jcells = Json::array();
  for (const auto& c : cells) {
    csv += std::to_string(c.theta) + "," + std::to_string(c.L) + "," + std::to_string(c.n_windows) + "," +
           (c.trainable ? "true" : "false") + ",";
    if (c.trainable) {
      csv += std::to_string(c.es.n_train) + "," + std::to_string(c.es.n_test) + "," + csv_double(c.es.p_plus) + "," +
             csv_opt(c.es.tpr) + "," + csv_opt(c.es.fpr) + "," + csv_opt(c.es.auc) + "," +
             csv_double(c.past_q.p_plus) + "," + csv_opt(c.past_q.tpr) + "," + csv_opt(c.past_q.fpr) + "," +
             csv_opt(c.past_q.auc) + "," + csv_opt(c.es.p_value_vs_null) + "," +
             (c.es.p_value_vs_null ? pvalue_stars(*c.es.p_value_vs_null) : std::string()) + "," +
             (c.knn ? csv_double(c.knn->p_plus) : std::string()) + ",";
    } else {
      csv += ",,,,,,,,,,,,,";
    }
    csv += csv_text(c.note) + "\n";

    Json j = {{"theta", c.theta}, {"L", c.L}, {"n_windows", c.n_windows}, {"trainable", c.trainable}};
    if (c.trainable) {
      j["es"] = report_json(c.es);
      j["past_q"] = report_json(c.past_q);
      j["knn"] = c.knn ? report_json(*c.knn) : Json(nullptr);
      const std::string name = cell_name(c.theta, c.L);
      out.write("roc_es_" + name + ".csv", roc_csv(c.es.roc));
      out.write("roc_past_q_" + name + ".csv", roc_csv(c.past_q.roc));
    }
    j["note"] = c.note;
    jcells.push_back(j);
  }
  Json report;
  report["measure"] = to_string(cfg.measure);
  report["filter"] = to_string(cfg.filter);
  report["input_sha256"] = prices.source_digest;
  report["f_test"] = cfg.f_test;
  report["p_max"] = cfg.p_max;
  report["cells"] = jcells;
  report["notes"] = grid.notes;
  out.write("forecast_grid.csv", csv);
  out.write("forecast.json", dump(report));

  std::ostringstream text;
  text << "out-of-sample P+ (persistence model / past-q null), rows theta, columns L\n";
  text << "theta\\L";
  for (auto L : cfg.L_grid) text << '\t' << L;
  text << '\n';
  std::size_t k = 0;
  for (auto theta : cfg.theta_grid) {
    text << theta;
    for (std::size_t l = 0; l < cfg.L_grid.size(); ++l, ++k) {
      const auto& c = cells[k];
      char buf[64];
      if (c.trainable) {
        const std::string stars = c.es.p_value_vs_null ? pvalue_stars(*c.es.p_value_vs_null) : std::string();
        std::snprintf(buf, sizeof buf, "\t%.3f%s/%.3f", c.es.p_plus, stars.c_str(), c.past_q.p_plus);
      } else {
        std::snprintf(buf, sizeof buf, "\t-");
      }
      text << buf;
    }
    text << '\n';
  }
  return out.finish(text.str());
}

RunSummary run_temporal(const PriceTable& prices, const RunConfig& cfg) {
  const ReturnTable returns = checked_returns(prices, cfg);
  GridRequest request;
  request.edge_survival = cfg.measure == SimilarityMeasure::EdgeSurvival;
  request.metacorrelation = cfg.measure == SimilarityMeasure::Metacorrelation;
  const GridAnalysis grid = analyze_grid(returns, cfg, request);
  const auto& series = request.edge_survival ? grid.es : grid.z;
  const TemporalReport report = temporal_analysis(series);

  OutputDir out(cfg.output_dir);
  out.provenance(prices, cfg);

  std::string csv = "window_end_index,date,n_plus_es,n_plus_q,cells_present\n";
  for (std::size_t k = 0; k < report.window_end.size(); ++k) {
    const std::size_t end = report.window_end[k];
    const std::string date = end >= 1 && end <= returns.dates.size() ? returns.dates[end - 1] : std::string();
    csv += std::to_string(end) + "," + date + "," + csv_double(report.n_plus_es[k]) + "," +
           csv_double(report.n_plus_q[k]) + "," + std::to_string(report.cells_present[k]) + "\n";
  }
  Json j;
  j["measure"] = to_string(cfg.measure);
  j["filter"] = to_string(cfg.filter);
  j["input_sha256"] = prices.source_digest;
  j["grid_size"] = report.grid_size;
  j["mean_n_plus_es"] = number(report.mean_es);
  j["mean_n_plus_q"] = number(report.mean_q);
  j["common_support"] = report.common_support;
  j["n_times"] = report.window_end.size();
  j["skipped_cells"] = report.skipped_cells;
  j["notes"] = grid.notes;
  out.write("temporal.csv", csv);
  out.write("temporal.json", dump(j));

  char buf[160];
  std::snprintf(buf, sizeof buf, "mean n+ over %zu common times: persistence %.4f, past-q %.4f (%zu of %zu cells used)\n",
                report.common_support, report.mean_es, report.mean_q, report.grid_size - report.skipped_cells.size(),
                report.grid_size);
  return out.finish(buf);
}

RunSummary run_normalize(const PriceTable& prices, const std::string& output_path) {
  prices.validate();
  std::ostringstream csv;
  write_wide_csv(prices, csv);
  write_file_atomic(output_path, csv.str());
  RunSummary s;
  const fs::path p(output_path);
  s.output_dir = p.has_parent_path() ? p.parent_path().string() : ".";
  s.files.push_back(p.filename().string());
  s.text = std::to_string(prices.n_assets()) + " assets x " + std::to_string(prices.n_days()) + " days, sha256 " +
           prices.source_digest + "\n";
  return s;
}

}  // namespace corrpersist
