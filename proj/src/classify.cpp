#include "corrpersist/classify.hpp"

#include "corrpersist/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace corrpersist {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

void check_xy(std::span<const double> x, std::span<const int> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Incompatible, "predictor and target lengths differ");
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorKind::Dataset, "binary target must be 0 or 1");
  }
}

bool separable(std::span<const double> x, std::span<const int> y) {
  double min1 = std::numeric_limits<double>::infinity(), max1 = -min1;
  double min0 = min1, max0 = -min1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i]) {
      min1 = std::min(min1, x[i]);
      max1 = std::max(max1, x[i]);
    } else {
      min0 = std::min(min0, x[i]);
      max0 = std::max(max0, x[i]);
    }
  }
  return max0 <= min1 || max1 <= min0;
}

}  // namespace

double logistic_log_likelihood(double beta0, double beta1, std::span<const double> x, std::span<const int> y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = beta0 + beta1 * x[i];
    ll += (y[i] ? t : 0.0) - softplus(t);
  }
  return ll;
}

std::optional<double> LogisticModel::threshold() const {
  if (beta1 == 0.0) return std::nullopt;
  return -beta0 / beta1;
}

LogisticModel fit_logistic(std::span<const double> x, std::span<const int> y) {
  check_xy(x, y);
  const std::size_t n = x.size();
  if (n < 4) throw Error(ErrorKind::Size, "logistic fit needs at least 4 points");
  const std::size_t positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (positives == 0 || positives == n) {
    throw Error(ErrorKind::Degenerate, "logistic fit needs both classes in the target");
  }
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    throw Error(ErrorKind::Degenerate, "logistic fit with a constant predictor");
  }

  constexpr std::size_t kMaxIterations = 500;
  constexpr double kTolerance = 1e-8;
  LogisticModel m;
  m.separated = separable(x, y);
  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  m.beta0 = logit(rate);
  m.beta1 = 0.0;
  double ll = logistic_log_likelihood(m.beta0, m.beta1, x, y);
  m.ll_trace.push_back(ll);

  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(m.beta0 + m.beta1 * x[i]);
      const double r = static_cast<double>(y[i]) - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * x[i];
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
    }
    if (std::hypot(g0, g1) < kTolerance) {
      m.converged = !m.separated;
      break;
    }
    // Newton direction from the information matrix; gradient direction if
    // the curvature has vanished (separated data drives weights to zero).
    const double det = h00 * h11 - h01 * h01;
    double d0, d1;
    if (det > 1e-300 && std::isfinite(det)) {
      d0 = (h11 * g0 - h01 * g1) / det;
      d1 = (h00 * g1 - h01 * g0) / det;
    } else {
      d0 = g0;
      d1 = g1;
    }
    double step = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      const double b0 = m.beta0 + step * d0, b1 = m.beta1 + step * d1;
      const double cand = logistic_log_likelihood(b0, b1, x, y);
      if (std::isfinite(cand) && cand >= ll) {
        improved = cand > ll;
        m.beta0 = b0;
        m.beta1 = b1;
        ll = cand;
        break;
      }
    }
    ++m.n_iterations;
    m.ll_trace.push_back(ll);
    if (!improved) {
      // No representable ascent left: at the optimum up to rounding, unless
      // the data are separable and the optimum sits at infinity.
      m.converged = !m.separated;
      break;
    }
  }
  m.log_likelihood = ll;
  return m;
}

int predict(const LogisticModel& model, double x, double p_max) {
  if (p_max <= 0.0) return 1;
  if (p_max >= 1.0) return 0;
  return model.beta0 + model.beta1 * x > logit(p_max) ? 1 : 0;
}

std::vector<int> predict(const LogisticModel& model, std::span<const double> x, double p_max) {
  std::vector<int> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(predict(model, v, p_max));
  return out;
}

TrainTestSplit split_train_test(const SignalSeries& series, double f_test) {
  if (!(f_test > 0.0 && f_test < 1.0)) throw Error(ErrorKind::Config, "f_test must lie in (0, 1)");
  if (f_test >= 0.4) {
    warn("f_test=" + std::to_string(f_test) + " is at or above 0.40; out-of-sample results may not be robust");
  }
  const std::size_t n = series.size();
  const auto n_test = static_cast<std::size_t>(std::llround(f_test * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw Error(ErrorKind::Size, "train/test split of " + std::to_string(n) + " windows leaves an empty side");
  }
  return {series.slice(0, n - n_test), series.slice(n - n_test, n)};
}

double ConfusionCounts::p_plus() const {
  if (total() == 0) throw Error(ErrorKind::Size, "accuracy of an empty test set");
  return static_cast<double>(q1 + q3) / static_cast<double>(total());
}

std::optional<double> ConfusionCounts::tpr() const {
  if (q1 + q2 == 0) return std::nullopt;
  return static_cast<double>(q1) / static_cast<double>(q1 + q2);
}

std::optional<double> ConfusionCounts::fpr() const {
  if (q3 + q4 == 0) return std::nullopt;
  return static_cast<double>(q4) / static_cast<double>(q3 + q4);
}

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorKind::Incompatible, "prediction and target lengths differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (actual[i]) {
      (predicted[i] ? c.q1 : c.q2)++;
    } else {
      (predicted[i] ? c.q4 : c.q3)++;
    }
  }
  return c;
}

RocCurve roc_from_scores(std::span<const double> scores, std::span<const int> labels,
                         double (*to_probability)(double)) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::Incompatible, "score and label lengths differ");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::Degenerate, "ROC curve needs both classes in the test set");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({1.0, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  // Threshold at each distinct score s: "positive" means score > s, so the
  // point for s counts every score strictly above it.
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    const double p = to_probability ? to_probability(s) : s;
    roc.points.push_back({p, static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
  }
  roc.points.push_back({0.0, 1.0, 1.0});
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const auto& a = roc.points[k - 1];
    const auto& b = roc.points[k];
    roc.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return roc;
}

RocCurve roc_curve(const LogisticModel& model, std::span<const double> x, std::span<const int> y) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = model.beta0 + model.beta1 * x[i];
  return roc_from_scores(t, y, &sigmoid);
}

double null_model_pvalue(double p_plus_es, double p_plus_q, std::size_t n) {
  if (n < 1) throw Error(ErrorKind::Size, "binomial null needs n >= 1");
  if (!(p_plus_q >= 0.0 && p_plus_q <= 1.0)) throw Error(ErrorKind::Config, "null success probability outside [0, 1]");
  const double nd = static_cast<double>(n);
  const auto k = static_cast<long long>(std::llround(nd * p_plus_es));
  if (k <= 0) return 1.0;
  if (k > static_cast<long long>(n)) return 0.0;
  if (p_plus_q <= 0.0) return 0.0;
  if (p_plus_q >= 1.0) return 1.0;
  const double lp = std::log(p_plus_q), lq = std::log1p(-p_plus_q);
  const double lgn = std::lgamma(nd + 1.0);
  // Sum the upper tail in log space, anchored at its largest term.
  std::vector<double> terms;
  terms.reserve(n - static_cast<std::size_t>(k) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (long long j = k; j <= static_cast<long long>(n); ++j) {
    const double jd = static_cast<double>(j);
    const double lt = lgn - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) + jd * lp + (nd - jd) * lq;
    terms.push_back(lt);
    top = std::max(top, lt);
  }
  double s = 0.0;
  for (double lt : terms) s += std::exp(lt - top);
  return std::min(1.0, std::exp(top + std::log(s)));
}

std::string pvalue_stars(double p) {
  if (p < 0.001) return "**";
  if (p < 0.01) return "*";
  return "";
}

std::vector<int> knn_predict(std::span<const double> train_x, std::span<const int> train_y,
                             std::span<const double> query_x, std::size_t k) {
  if (train_x.size() != train_y.size()) throw Error(ErrorKind::Incompatible, "training predictor and target differ");
  if (k < 1 || k % 2 == 0) throw Error(ErrorKind::Config, "KNN needs an odd k >= 1");
  if (k > train_x.size()) {
    throw Error(ErrorKind::Config, "KNN k=" + std::to_string(k) + " exceeds the training size " +
                                       std::to_string(train_x.size()));
  }
  std::vector<std::pair<double, std::size_t>> dist(train_x.size());
  std::vector<int> out;
  out.reserve(query_x.size());
  for (double q : query_x) {
    for (std::size_t i = 0; i < train_x.size(); ++i) dist[i] = {std::abs(train_x[i] - q), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t votes = 0;
    for (std::size_t j = 0; j < k; ++j) votes += static_cast<std::size_t>(train_y[dist[j].second]);
    out.push_back(2 * votes > k ? 1 : 0);
  }
  return out;
}

ClassifierReport evaluate(const LogisticModel& model, std::span<const double> test_x, std::span<const int> test_y,
                          double p_max) {
  check_xy(test_x, test_y);
  if (test_x.empty()) throw Error(ErrorKind::Size, "evaluation on an empty test set");
  ClassifierReport r;
  r.model = model;
  r.p_max = p_max;
  r.n_test = test_x.size();
  const auto predicted = predict(model, test_x, p_max);
  r.counts = confusion(predicted, test_y);
  r.p_plus = r.counts.p_plus();
  r.tpr = r.counts.tpr();
  r.fpr = r.counts.fpr();
  if (r.tpr && r.fpr) {
    r.roc = roc_curve(model, test_x, test_y);
    r.auc = r.roc.auc;
  }
  return r;
}

ForecastCell forecast_cell(const SignalSeries& series, const ForecastOptions& options) {
  ForecastCell cell;
  cell.theta = series.params.theta;
  cell.L = series.params.L;
  const SignalSeries sample = series.with_past_q();
  cell.n_windows = sample.size();
  TrainTestSplit split;
  try {
    split = split_train_test(sample, options.f_test);
  } catch (const Error& e) {
    cell.note = e.what();
    return cell;
  }
  auto fit = [&](const std::vector<double>& train_x, const char* name) {
    try {
      return fit_logistic(train_x, split.train.y);
    } catch (const Error& e) {
      throw e.with_context(std::string(name) + " model");
    }
  };
  try {
    const LogisticModel es_model = fit(split.train.es, "es");
    const LogisticModel q_model = fit(split.train.past_q, "past-q");
    cell.es = evaluate(es_model, split.test.es, split.test.y, options.p_max);
    cell.past_q = evaluate(q_model, split.test.past_q, split.test.y, options.p_max);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    cell.note = e.what();
    return cell;
  }
  cell.trainable = true;
  for (ClassifierReport* r : {&cell.es, &cell.past_q}) {
    r->f_test = options.f_test;
    r->n_train = split.train.size();
  }
  cell.es.predictor = "es";
  cell.past_q.predictor = "past_q";
  const double null_rate = cell.past_q.p_plus;
  if (null_rate > 0.0 && null_rate < 1.0) {
    cell.es.p_value_vs_null = null_model_pvalue(cell.es.p_plus, null_rate, cell.es.n_test);
  }
  if (options.knn && options.knn_k <= split.train.size()) {
    ClassifierReport k;
    k.predictor = "knn";
    k.f_test = options.f_test;
    k.p_max = options.p_max;
    k.n_train = split.train.size();
    k.n_test = split.test.size();
    const auto predicted = knn_predict(split.train.es, split.train.y, split.test.es, options.knn_k);
    k.counts = confusion(predicted, split.test.y);
    k.p_plus = k.counts.p_plus();
    k.tpr = k.counts.tpr();
    k.fpr = k.counts.fpr();
    if (null_rate > 0.0 && null_rate < 1.0) k.p_value_vs_null = null_model_pvalue(k.p_plus, null_rate, k.n_test);
    cell.knn = k;
  }
  return cell;
}

TemporalReport temporal_analysis(std::span<const SignalSeries> cells) {
  TemporalReport report;
  report.grid_size = cells.size();
  struct Tally {
    std::size_t present = 0, es_ok = 0, q_ok = 0;
  };
  std::map<std::size_t, Tally> by_end;
  std::size_t usable = 0;
  for (const auto& series : cells) {
    const SignalSeries sample = series.with_past_q();
    const std::string name = "theta=" + std::to_string(series.params.theta) + ",L=" + std::to_string(series.params.L);
    LogisticModel es_model, q_model;
    try {
      es_model = fit_logistic(sample.es, sample.y);
      q_model = fit_logistic(sample.past_q, sample.y);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate && e.kind() != ErrorKind::Size) throw;
      report.skipped_cells.push_back(name + ": " + e.what());
      continue;
    }
    ++usable;
    for (std::size_t k = 0; k < sample.size(); ++k) {
      auto& t = by_end[sample.window_starts[k] + sample.params.theta];
      ++t.present;
      t.es_ok += static_cast<std::size_t>(predict(es_model, sample.es[k]) == sample.y[k]);
      t.q_ok += static_cast<std::size_t>(predict(q_model, sample.past_q[k]) == sample.y[k]);
    }
  }
  double sum_es = 0.0, sum_q = 0.0, all_es = 0.0, all_q = 0.0;
  for (const auto& [end, t] : by_end) {
    const double es = static_cast<double>(t.es_ok) / static_cast<double>(t.present);
    const double q = static_cast<double>(t.q_ok) / static_cast<double>(t.present);
    report.window_end.push_back(end);
    report.n_plus_es.push_back(es);
    report.n_plus_q.push_back(q);
    report.cells_present.push_back(t.present);
    all_es += es;
    all_q += q;
    if (t.present == usable) {
      ++report.common_support;
      sum_es += es;
      sum_q += q;
    }
  }
  if (report.common_support > 0) {
    report.mean_es = sum_es / static_cast<double>(report.common_support);
    report.mean_q = sum_q / static_cast<double>(report.common_support);
  } else if (!by_end.empty()) {
    report.mean_es = all_es / static_cast<double>(by_end.size());
    report.mean_q = all_q / static_cast<double>(by_end.size());
  }
  return report;
}

}  // namespace corrpersist
