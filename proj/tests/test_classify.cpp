#include "corrpersist/classify.hpp"
#include "corrpersist/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace corrpersist;

namespace {

SignalSeries series_of(const std::vector<double>& es, const std::vector<double>& q, const std::vector<double>& past,
                       std::size_t theta = 250, std::size_t L = 10) {
  SignalSeries s;
  s.params.theta = theta;
  s.params.L = L;
  for (std::size_t k = 0; k < es.size(); ++k) {
    s.window_indices.push_back(k + L);
    s.window_starts.push_back(5 * (k + L));
    s.es.push_back(es[k]);
    s.q.push_back(q[k]);
    s.y.push_back(volatility_target(q[k]));
    s.past_q.push_back(past[k]);
  }
  return s;
}

// log q follows an AR(1) in window steps; the past q lags by `lag` windows.
SignalSeries persistent_q(std::size_t n, double phi, std::size_t lag, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  std::vector<double> logq(n + lag);
  double v = 0;
  for (auto& x : logq) x = v = phi * v + 0.1 * z(gen);
  std::vector<double> es(n), q(n), past(n);
  for (std::size_t k = 0; k < n; ++k) {
    es[k] = z(gen);
    q[k] = std::exp(logq[k + lag]);
    past[k] = std::exp(logq[k]);
  }
  return series_of(es, q, past);
}

double in_sample_null_rate(const SignalSeries& s) {
  const auto m = fit_logistic(s.past_q, s.y);
  const auto pred = predict(m, s.past_q);
  return confusion(pred, s.y).p_plus();
}

}  // namespace

TEST_CASE("sigmoid and logit") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  for (double t : {-800.0, -30.0, -1.3, 0.2, 4.0, 37.0, 800.0}) {
    CHECK(sigmoid(t) + sigmoid(-t) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::isfinite(sigmoid(t)));
  }
  CHECK(logit(0.75) == doctest::Approx(std::log(3.0)));
  CHECK(logit(sigmoid(1.7)) == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("logistic fit matches the grid-search oracle") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  int fitted = 0;
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<double> x(20);
    std::vector<int> y(20);
    const double b0 = z(gen) * 0.5, b1 = z(gen) * 2.0;
    for (std::size_t k = 0; k < 20; ++k) {
      x[k] = z(gen);
      y[k] = std::uniform_real_distribution<double>(0, 1)(gen) < sigmoid(b0 + b1 * x[k]) ? 1 : 0;
    }
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == 20) continue;
    const auto m = fit_logistic(x, y);
    if (m.separated) continue;
    ++fitted;
    CHECK(m.converged);
    const double best = oracle::grid_search_max_ll(x, y);
    CHECK(std::abs(m.log_likelihood - best) < 1e-4);
    CHECK(m.log_likelihood >= best - 1e-9);
    CHECK(m.log_likelihood == doctest::Approx(logistic_log_likelihood(m.beta0, m.beta1, x, y)).epsilon(1e-12));
    REQUIRE(m.ll_trace.size() == m.n_iterations + 1);
    for (std::size_t k = 1; k < m.ll_trace.size(); ++k) CHECK(m.ll_trace[k] >= m.ll_trace[k - 1]);
  }
  CHECK(fitted >= 10);
}

TEST_CASE("fit stops when rounding leaves no ascent") {
  // The gradient stalls just above the tolerance here.
  const std::vector<double> x{2.2205111953293537,   0.49224811758761061, -3.1540790605704845, -0.15954743557223874,
                              -0.19826279360383109, -0.79269835036254921, 0.5522568647565681,  -0.12337836734979325,
                              0.99811474279278467,  -1.5661857669589938,  -0.26086076370701461, -0.57299742488214045,
                              -0.89866650566880157, -0.45090310709122239, -0.8144861734444423,  0.94678726169234728,
                              -0.63897479371463595, -1.7616283939656443,  0.25576499418563042,  0.09809360030457627};
  const std::vector<int> y{0, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0};
  const auto m = fit_logistic(x, y);
  CHECK(m.converged);
  CHECK(m.n_iterations < 20);
  CHECK(std::abs(m.log_likelihood - oracle::grid_search_max_ll(x, y)) < 1e-4);
}

TEST_CASE("separable data is flagged") {
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9};
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  const auto m = fit_logistic(x, y);
  CHECK(m.separated);
  CHECK_FALSE(m.converged);
  for (std::size_t k = 1; k < m.ll_trace.size(); ++k) CHECK(m.ll_trace[k] >= m.ll_trace[k - 1]);
  // Reversed orientation.
  const std::vector<int> yr{1, 1, 1, 1, 0, 0, 0, 0};
  CHECK(fit_logistic(x, yr).separated);
}

TEST_CASE("fit preconditions") {
  CHECK_THROWS_AS(fit_logistic(std::vector<double>{1, 2, 3}, std::vector<int>{0, 1, 0}), Error);
  CHECK_THROWS_AS(fit_logistic(std::vector<double>{1, 2, 3, 4}, std::vector<int>{1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(fit_logistic(std::vector<double>{2, 2, 2, 2}, std::vector<int>{0, 1, 0, 1}), Error);
  CHECK_THROWS_AS(fit_logistic(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 1, 0}), Error);
}

TEST_CASE("uninformative predictor gives a flat slope") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  std::vector<double> x(1000);
  std::vector<int> y(1000);
  for (std::size_t k = 0; k < 1000; ++k) {
    x[k] = z(gen);
    y[k] = static_cast<int>(gen() & 1u);
  }
  CHECK(std::abs(fit_logistic(x, y).beta1) < 0.1);
}

TEST_CASE("noisy threshold is recovered") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 0.08);
  std::vector<double> x(400);
  std::vector<int> y(400);
  for (std::size_t k = 0; k < 400; ++k) {
    x[k] = u(gen);
    y[k] = x[k] + z(gen) > 0.5 ? 1 : 0;
  }
  const auto m = fit_logistic(x, y);
  REQUIRE(m.threshold());
  CHECK(*m.threshold() > 0.4);
  CHECK(*m.threshold() < 0.6);
  CHECK(m.threshold() == doctest::Approx(-m.beta0 / m.beta1));
}

TEST_CASE("prediction rule") {
  LogisticModel m;
  m.beta0 = 1.0;
  m.beta1 = -2.0;
  CHECK(predict(m, 0.5) == 0);  // exactly at the threshold
  CHECK(predict(m, 0.49) == 1);
  CHECK(predict(m, 0.9) == 0);  // negative slope: high persistence means calm
  for (double x : {-3.0, 0.0, 0.5, 2.0}) {
    CHECK(predict(m, x, 0.0) == 1);
    CHECK(predict(m, x, 1.0) == 0);
  }
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int k = 0; k < 500; ++k) {
    LogisticModel r;
    r.beta0 = z(gen);
    r.beta1 = z(gen);
    const double x = z(gen) * 3;
    const double thr = -r.beta0 / r.beta1;
    const int expect = r.beta1 > 0 ? (x > thr ? 1 : 0) : (x < thr ? 1 : 0);
    if (std::abs(x - thr) > 1e-9) CHECK(predict(r, x) == expect);
  }
  const std::vector<double> xs{0.0, 1.0};
  CHECK(predict(m, xs) == std::vector<int>{1, 0});
}

TEST_CASE("chronological split") {
  std::vector<double> v(100, 1.0);
  const auto s = series_of(v, v, v);
  const auto split = split_train_test(s, 0.3);
  CHECK(split.train.size() == 70);
  CHECK(split.test.size() == 30);
  CHECK(split.test.window_indices.front() > split.train.window_indices.back());
  const auto half = split_train_test(s, 0.5);
  CHECK(half.train.size() == half.test.size());
  ScopedWarningCapture capture;
  split_train_test(s, 0.45);
  CHECK(capture.contains("0.40"));
  CHECK_THROWS_AS(split_train_test(series_of({1.0}, {1.0}, {1.0}), 0.3), Error);
}

TEST_CASE("confusion metrics") {
  // 3 TP, 1 FN, 4 TN, 2 FP.
  const std::vector<int> pred{1, 1, 1, 0, 0, 0, 0, 0, 1, 1};
  const std::vector<int> act{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const auto c = confusion(pred, act);
  CHECK(c.q1 == 3);
  CHECK(c.q2 == 1);
  CHECK(c.q3 == 4);
  CHECK(c.q4 == 2);
  CHECK(c.p_plus() == 0.7);
  CHECK(*c.tpr() == 0.75);
  CHECK(*c.fpr() == 1.0 / 3.0);

  const auto perfect = confusion(act, act);
  CHECK(perfect.p_plus() == 1.0);
  CHECK(*perfect.fpr() == 0.0);
  CHECK_FALSE(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 0}).tpr());

  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p(37), a(37);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < 37; ++k) {
      p[k] = static_cast<int>(gen() & 1u);
      a[k] = static_cast<int>(gen() & 1u);
      hits += p[k] == a[k];
    }
    CHECK(confusion(p, a).p_plus() == doctest::Approx(static_cast<double>(hits) / 37.0).epsilon(1e-15));
  }
}

TEST_CASE("roc curves") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z;
  SUBCASE("separable scores") {
    const std::vector<double> s{0.1, 0.2, 0.3, 0.7, 0.8};
    const std::vector<int> l{0, 0, 0, 1, 1};
    const auto roc = roc_from_scores(s, l);
    CHECK(roc.auc == 1.0);
  }
  SUBCASE("endpoints and monotone transforms") {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> s(30), t(30);
      std::vector<int> l(30);
      for (std::size_t k = 0; k < 30; ++k) {
        l[k] = k % 3 == 0 ? 1 : static_cast<int>(gen() & 1u);
        s[k] = z(gen) + 0.5 * l[k];
        t[k] = std::exp(3 * s[k]) + 2.0;
      }
      l[1] = 0;
      const auto a = roc_from_scores(s, l);
      const auto b = roc_from_scores(t, l);
      REQUIRE(a.points.size() >= 2);
      CHECK(a.points.front().fpr == 0.0);
      CHECK(a.points.front().tpr == 0.0);
      CHECK(a.points.back().fpr == 1.0);
      CHECK(a.points.back().tpr == 1.0);
      for (std::size_t k = 1; k < a.points.size(); ++k) {
        CHECK(a.points[k].fpr >= a.points[k - 1].fpr);
        CHECK(a.points[k].tpr >= a.points[k - 1].tpr);
      }
      CHECK(a.auc == b.auc);
      // Mann-Whitney count.
      double wins = 0;
      int pairs = 0;
      for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < 30; ++j) {
          if (l[i] == 1 && l[j] == 0) {
            ++pairs;
            wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
          }
        }
      }
      CHECK(a.auc == doctest::Approx(wins / pairs).epsilon(1e-12));
    }
  }
  SUBCASE("uninformative scores average one half") {
    double total = 0;
    const int sims = 1000;
    for (int k = 0; k < sims; ++k) {
      std::vector<double> s(40);
      std::vector<int> l(40);
      for (std::size_t j = 0; j < 40; ++j) {
        s[j] = z(gen);
        l[j] = j < 20 ? 1 : 0;
      }
      total += roc_from_scores(s, l).auc;
    }
    CHECK(std::abs(total / sims - 0.5) < 0.02);
  }
  SUBCASE("model roc uses probabilities") {
    LogisticModel m;
    m.beta0 = 0.2;
    m.beta1 = 1.5;
    const std::vector<double> x{-1, -0.5, 0, 0.5, 1};
    const std::vector<int> y{0, 1, 0, 1, 1};
    const auto roc = roc_curve(m, x, y);
    for (const auto& p : roc.points) {
      CHECK(p.p_max >= 0.0);
      CHECK(p.p_max <= 1.0);
    }
  }
  CHECK_THROWS_AS(roc_from_scores(std::vector<double>{1, 2}, std::vector<int>{1, 1}), Error);
}

TEST_CASE("binomial null") {
  CHECK(null_model_pvalue(1.0, 0.5, 20) == doctest::Approx(std::pow(2.0, -20)).epsilon(1e-10));
  CHECK(null_model_pvalue(0.7, 0.5, 100) == doctest::Approx(3.925e-5).epsilon(0.01));
  for (std::size_t n : {20u, 100u, 333u}) {
    for (double p : {0.3, 0.5, 0.62}) {
      const double v = null_model_pvalue(p, p, n);
      const auto k = std::llround(static_cast<double>(n) * p);
      const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                  k * std::log(p) + (n - k) * std::log1p(-p));
      CHECK(std::abs(v - 0.5) <= pmf + 1e-3);
    }
  }
  CHECK(pvalue_stars(0.0005) == "**");
  CHECK(pvalue_stars(0.005) == "*");
  CHECK(pvalue_stars(0.05).empty());
}

TEST_CASE("past-q null behaviour") {
  std::mt19937_64 gen(7);
  SUBCASE("persistent volatility beats a coin") {
    double mean = 0;
    int reps = 0;
    while (reps < 20) {
      const auto s = persistent_q(400, 0.99, 50, gen);
      const auto pos = std::count(s.y.begin(), s.y.end(), 1);
      if (pos < 40 || pos > 360) continue;
      mean += in_sample_null_rate(s);
      ++reps;
    }
    CHECK(mean / reps > 0.6);
  }
  SUBCASE("i.i.d. volatility is a coin") {
    double mean = 0;
    for (int rep = 0; rep < 40; ++rep) {
      // Balanced classes, so the majority rule cannot help either.
      auto s = persistent_q(400, 0.0, 50, gen);
      mean += in_sample_null_rate(s);
    }
    CHECK(std::abs(mean / 40 - 0.5) < 0.03);
  }
  SUBCASE("abrupt switch") {
    // q above one for 200 windows, then below one; past q lags by 50.
    std::normal_distribution<double> z;
    std::vector<double> es(400), q(400), past(400);
    auto level = [](std::size_t t) { return t < 250 ? 0.3 : -0.3; };
    for (std::size_t k = 0; k < 400; ++k) {
      es[k] = z(gen);
      q[k] = std::exp(level(k) + 0.1 * z(gen));
      past[k] = std::exp(level(k < 50 ? 0 : k - 50) + 0.1 * z(gen));
    }
    const auto s = series_of(es, q, past);
    const auto m = fit_logistic(s.past_q, s.y);
    std::size_t ok_before = 0, ok_lag = 0, ok_after = 0;
    for (std::size_t k = 0; k < 400; ++k) {
      const bool ok = predict(m, s.past_q[k]) == s.y[k];
      if (k < 250) ok_before += ok;
      else if (k < 300) ok_lag += ok;
      else ok_after += ok;
    }
    CHECK(ok_before / 250.0 > 0.9);
    CHECK(ok_lag / 50.0 < 0.2);
    CHECK(ok_after / 100.0 > 0.9);
  }
}

TEST_CASE("knn") {
  const std::vector<double> tx{0.1, 0.2, 0.3, 0.8, 0.9};
  const std::vector<int> ty{1, 1, 0, 0, 0};
  CHECK(knn_predict(tx, ty, std::vector<double>{0.1, 0.5, 0.95}, 5) == std::vector<int>{0, 0, 0});
  CHECK(knn_predict(tx, ty, tx, 1) == ty);
  CHECK(knn_predict(tx, ty, std::vector<double>{0.12}, 3) == std::vector<int>{1});
  CHECK_THROWS_AS(knn_predict(tx, ty, tx, 2), Error);
  CHECK_THROWS_AS(knn_predict(tx, ty, tx, 7), Error);
}

TEST_CASE("forecast cell") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  // Persistence drives the target; the past q carries no information.
  std::vector<double> es(300), q(300), past(300, std::nan(""));
  for (std::size_t k = 0; k < 300; ++k) {
    es[k] = 0.6 + 0.1 * z(gen);
    q[k] = std::exp(-3.0 * (es[k] - 0.6) + 0.1 * z(gen));
    if (k >= 20) past[k] = std::exp(0.2 * z(gen));
  }
  const auto cell = forecast_cell(series_of(es, q, past), ForecastOptions{});
  REQUIRE(cell.trainable);
  CHECK(cell.n_windows == 280);
  CHECK(cell.es.n_train == 196);
  CHECK(cell.es.n_test == 84);
  CHECK(cell.past_q.n_test == 84);
  CHECK(cell.es.p_plus > 0.8);
  CHECK(cell.es.p_plus > cell.past_q.p_plus);
  REQUIRE(cell.es.model);
  CHECK(cell.es.model->beta1 < 0);
  REQUIRE(cell.es.p_value_vs_null);
  CHECK(*cell.es.p_value_vs_null < 0.001);
  REQUIRE(cell.knn);
  CHECK(cell.knn->n_test == 84);
  REQUIRE(cell.es.auc);
  CHECK(*cell.es.auc > 0.8);

  const auto tiny = forecast_cell(series_of({0.5}, {1.2}, {1.0}), ForecastOptions{});
  CHECK_FALSE(tiny.trainable);
  CHECK_FALSE(tiny.note.empty());
}

TEST_CASE("temporal analysis") {
  SUBCASE("all correct") {
    std::vector<double> es, q, past;
    for (int k = 0; k < 40; ++k) {
      es.push_back(k % 2 ? 0.8 : 0.4);
      q.push_back(k % 2 ? 0.7 : 1.3);
      past.push_back(k % 2 ? 0.7 : 1.3);
    }
    std::vector<SignalSeries> cells;
    // A lone flipped point keeps the fit finite.
    es.push_back(0.6);
    q.push_back(1.1);
    past.push_back(0.95);
    es.push_back(0.61);
    q.push_back(0.9);
    past.push_back(1.05);
    cells.push_back(series_of(es, q, past, 250, 10));
    const auto r = temporal_analysis(cells);
    CHECK(r.grid_size == 1);
    for (double v : r.n_plus_es) CHECK((v == 0.0 || v == 1.0));
    for (double v : r.n_plus_q) CHECK((v == 0.0 || v == 1.0));
  }
  SUBCASE("denominator follows the cells present") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> z;
    std::vector<SignalSeries> cells;
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<double> es, q, past;
      const std::size_t n = 60 + 20 * c;
      for (std::size_t k = 0; k < n; ++k) {
        es.push_back(z(gen));
        q.push_back(std::exp(0.3 * z(gen) - 0.3 * es.back()));
        past.push_back(std::exp(0.3 * z(gen)));
      }
      cells.push_back(series_of(es, q, past, 250, 10));
    }
    const auto r = temporal_analysis(cells);
    CHECK(r.grid_size == 3);
    REQUIRE(r.window_end.size() == 100);
    CHECK(r.common_support == 60);
    for (std::size_t k = 0; k < r.window_end.size(); ++k) {
      CHECK(r.cells_present[k] == (k < 60 ? 3u : (k < 80 ? 2u : 1u)));
      const double scaled = r.n_plus_es[k] * static_cast<double>(r.cells_present[k]);
      CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);
    }
    double m = 0;
    for (std::size_t k = 0; k < 60; ++k) m += r.n_plus_es[k];
    CHECK(r.mean_es == doctest::Approx(m / 60));
  }
  SUBCASE("untrainable cells are skipped") {
    std::vector<SignalSeries> cells{series_of({0.5, 0.6}, {1.2, 1.3}, {1.0, 1.1})};
    const auto r = temporal_analysis(cells);
    CHECK(r.skipped_cells.size() == 1);
    CHECK(r.window_end.empty());
  }
}
