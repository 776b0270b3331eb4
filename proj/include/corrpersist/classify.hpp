#pragma once

#include "corrpersist/volratio.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrpersist {

/// 1 / (1 + exp(-t)), evaluated without overflow for any finite t.
double sigmoid(double t);

/// log(p / (1 - p)).
double logit(double p);

/// Bernoulli log-likelihood of P(Y=1 | x) = S(beta0 + beta1 x).
double logistic_log_likelihood(double beta0, double beta1, std::span<const double> x, std::span<const int> y);

struct LogisticModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  bool converged = false;
  bool separated = false;  // the classes are separable by a threshold on x
  std::size_t n_iterations = 0;
  double log_likelihood = 0.0;
  std::vector<double> ll_trace;  // starting point, then one entry per iteration

  /// Predictor value where S(beta0 + beta1 x) = 1/2, when beta1 != 0.
  std::optional<double> threshold() const;
};

/// Maximum-likelihood fit by Newton's method with step halving, so the
/// log-likelihood never decreases. Stops when the gradient norm drops below
/// 1e-8, when no step along the Newton direction raises the log-likelihood
/// any further (the optimum up to rounding), or after 500 iterations.
/// Separable data is flagged and returned unconverged. Needs >= 4 points,
/// both classes and a non-constant x.
LogisticModel fit_logistic(std::span<const double> x, std::span<const int> y);

/// 1 iff S(beta0 + beta1 x) > p_max. Evaluated on the linear predictor, so
/// p_max = 1/2 is exactly the rule beta0 + beta1 x > 0.
int predict(const LogisticModel& model, double x, double p_max = 0.5);
std::vector<int> predict(const LogisticModel& model, std::span<const double> x, double p_max = 0.5);

struct TrainTestSplit {
  SignalSeries train;
  SignalSeries test;
};

/// Chronological split: the last round(f_test * n) rows form the test set.
/// Warns when f_test >= 0.4; throws Error(Size) if either side is empty.
TrainTestSplit split_train_test(const SignalSeries& series, double f_test = 0.30);

/// |Q1| true positives, |Q2| false negatives, |Q3| true negatives,
/// |Q4| false positives.
struct ConfusionCounts {
  std::size_t q1 = 0;
  std::size_t q2 = 0;
  std::size_t q3 = 0;
  std::size_t q4 = 0;

  std::size_t total() const { return q1 + q2 + q3 + q4; }
  double p_plus() const;
  std::optional<double> tpr() const;  // absent without positives
  std::optional<double> fpr() const;  // absent without negatives
};

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual);

struct RocPoint {
  double p_max = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // p_max descending, so fpr and tpr ascend
  double auc = 0.0;
};

/// ROC of a real-valued score (higher means "1"), sweeping the threshold over
/// every distinct score plus both ends. `p_max` on each point is
/// `to_probability(threshold)`. Throws Error(Degenerate) unless both classes occur.
RocCurve roc_from_scores(std::span<const double> scores, std::span<const int> labels,
                         double (*to_probability)(double) = nullptr);

/// ROC of a fitted model on (x, y); thresholds are the model's predicted probabilities.
RocCurve roc_curve(const LogisticModel& model, std::span<const double> x, std::span<const int> y);

/// One-sided P(X >= round(n * p_plus_es)) for X ~ Binomial(n, p_plus_q).
double null_model_pvalue(double p_plus_es, double p_plus_q, std::size_t n);

/// "**" for p < 0.001, "*" for p < 0.01.
std::string pvalue_stars(double p);

/// Majority vote among the k nearest training predictor values (absolute
/// distance, ties by training order). k must be odd and at most the
/// training size.
std::vector<int> knn_predict(std::span<const double> train_x, std::span<const int> train_y,
                             std::span<const double> query_x, std::size_t k);

struct ClassifierReport {
  std::string predictor;  // "es", "past_q" or "knn"
  std::optional<LogisticModel> model;
  ConfusionCounts counts;
  double p_plus = 0.0;
  std::optional<double> tpr;
  std::optional<double> fpr;
  RocCurve roc;  // empty for KNN
  std::optional<double> auc;
  std::optional<double> p_value_vs_null;
  double f_test = 0.0;
  double p_max = 0.5;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Single-threshold evaluation of a fitted model on a test sample.
ClassifierReport evaluate(const LogisticModel& model, std::span<const double> test_x, std::span<const int> test_y,
                          double p_max = 0.5);

struct ForecastOptions {
  double f_test = 0.30;
  double p_max = 0.5;
  std::size_t knn_k = 5;
  bool knn = true;
};

/// Out-of-sample comparison for one grid cell. Every model is trained and
/// tested on the same windows: those where the past q is defined.
struct ForecastCell {
  std::size_t theta = 0;
  std::size_t L = 0;
  std::size_t n_windows = 0;
  bool trainable = false;
  std::string note;  // why the cell is untrainable
  ClassifierReport es;
  ClassifierReport past_q;
  std::optional<ClassifierReport> knn;
};

ForecastCell forecast_cell(const SignalSeries& series, const ForecastOptions& options);

/// In-sample success fractions across a grid of cells, aligned on the end of
/// the estimation window. At each time the denominator is the number of
/// cells with a prediction there.
struct TemporalReport {
  std::size_t grid_size = 0;
  std::vector<std::size_t> window_end;
  std::vector<double> n_plus_es;
  std::vector<double> n_plus_q;
  std::vector<std::size_t> cells_present;
  double mean_es = 0.0;  // over times where every cell is present
  double mean_q = 0.0;
  std::size_t common_support = 0;
  std::vector<std::string> skipped_cells;
};

TemporalReport temporal_analysis(std::span<const SignalSeries> cells);

}  // namespace corrpersist
