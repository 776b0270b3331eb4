// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.
//
//   corrpersist_acceptance [N ...]
//
// With no arguments criteria 1-9 run. Criterion 10 needs a price file in
// CORRPERSIST_REPRO_DATA; without it the run exits with status 77 (skipped).

#include "corrpersist/classify.hpp"
#include "corrpersist/error.hpp"
#include "corrpersist/ewstats.hpp"
#include "corrpersist/netfilter.hpp"
#include "corrpersist/persistence.hpp"
#include "corrpersist/pipeline.hpp"
#include "corrpersist/stats.hpp"
#include "corrpersist/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace corrpersist;
namespace fs = std::filesystem;

namespace {

constexpr int kSkipped = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("corrpersist_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::vector<std::pair<int, int>> sorted_pairs(const FilteredGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : g.edges) out.emplace_back(e.i, e.j);
  std::sort(out.begin(), out.end());
  return out;
}

bool connected(const FilteredGraph& g) {
  std::vector<std::vector<int>> adj(g.n_nodes);
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<char> seen(g.n_nodes, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == g.n_nodes;
}

bool boost_planar(const FilteredGraph& fg) {
  boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS> g(fg.n_nodes);
  for (const auto& e : fg.edges) boost::add_edge(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j), g);
  return boost::boyer_myrvold_planarity_test(g);
}

// 1. PMFG correctness.
Outcome pmfg_correctness() {
  std::mt19937_64 gen(101);
  int matches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + trial % 5;
    const Eigen::MatrixXd rho = testutil::random_symmetric(n, gen);
    auto want = oracle::greedy_pmfg(rho);
    std::sort(want.begin(), want.end());
    matches += sorted_pairs(build_pmfg(rho)) == want;
  }
  std::string structure;
  bool ok = matches == 200;
  double t342 = 0.0;
  for (int n : {20, 50, 100, 342}) {
    const Eigen::MatrixXd rho = testutil::random_symmetric(n, gen);
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = build_pmfg(rho);
    if (n == 342) t342 = seconds_since(t0);
    const auto mst = build_mst(rho);
    const auto emb = planar_embedding(g.n_nodes, g.vertex_pairs());
    const bool edges = g.edge_count() == static_cast<std::size_t>(3 * n - 6);
    const bool euler = emb && emb->satisfies_euler() && emb->face_count() == static_cast<std::size_t>(2 * n - 4);
    bool contains_mst = mst.edge_count() == static_cast<std::size_t>(n - 1);
    for (const auto& e : mst.edges) contains_mst = contains_mst && g.has_edge(e.i, e.j);
    const bool good = edges && connected(g) && euler && boost_planar(g) && contains_mst;
    ok = ok && good;
    structure += fmt(" N=%d:%s", n, good ? "ok" : "bad");
  }
  ok = ok && t342 < 30.0;
  return {ok, fmt("oracle match %d/200;%s; N=342 build %.2f s", matches, structure.c_str(), t342)};
}

// 2. Rank invariance under x -> x^3.
Outcome rank_invariance() {
  std::mt19937_64 gen(202);
  int identical = 0;
  const std::size_t L = 5;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 25;
    const Eigen::MatrixXd r = testutil::random_returns(400, n, gen, 0.3 + 0.02 * (trial % 10));
    std::vector<FilteredGraph> plain, cubed;
    for (int start = 0; start + 100 <= 400; start += 25) {
      const Eigen::MatrixXd rho = ew_correlation(r.middleRows(start, 100), SmoothingScheme::with_divisor(100));
      plain.push_back(build_pmfg(rho));
      cubed.push_back(build_pmfg(rho.array().cube().matrix()));
    }
    bool same = true;
    for (std::size_t k = 0; k < plain.size(); ++k) {
      same = same && plain[k].vertex_pairs() == cubed[k].vertex_pairs();
      for (std::size_t j = 0; j < k; ++j) same = same && edge_survival(plain[k], plain[j]) == edge_survival(cubed[k], cubed[j]);
      if (k >= L) same = same && correlation_persistence(plain, k, L) == correlation_persistence(cubed, k, L);
    }
    identical += same;
  }
  return {identical == 50, fmt("bit-identical PMFG, ES and <ES> in %d/50 trials", identical)};
}

// 3. Estimator oracles.
Outcome estimator_oracles() {
  std::mt19937_64 gen(303);
  std::normal_distribution<double> z;
  double worst_corr = 0, worst_vol = 0, worst_pearson = 0, worst_meta = 0, worst_identity = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int theta = 5 + trial % 30, n = 2 + trial % 7;
    const Eigen::MatrixXd x = testutil::random_returns(theta, n, gen);
    const auto w = oracle::ew_weights(theta, 3.0);
    const auto scheme = SmoothingScheme::with_divisor(static_cast<std::size_t>(theta));
    worst_corr = std::max(worst_corr, (ew_correlation(x, scheme) - oracle::ew_correlation(x, w)).cwiseAbs().maxCoeff());

    Eigen::VectorXd m(theta);
    for (auto& v : m) v = z(gen);
    worst_vol = std::max(worst_vol, std::abs(ew_market_volatility(m, scheme) - oracle::ew_volatility(m, w)));
    const std::vector<long double> flat(static_cast<std::size_t>(theta), 1.0L / theta);
    worst_vol = std::max(worst_vol, std::abs(realized_market_volatility(m) - oracle::ew_volatility(m, flat)));

    std::vector<double> a(static_cast<std::size_t>(theta)), b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = z(gen);
      b[k] = 0.4 * a[k] + z(gen);
    }
    worst_pearson = std::max(worst_pearson, std::abs(pearson(a, b) - oracle::pearson(a, b)));

    const int k = 4 + trial % 8;
    const Eigen::MatrixXd ra = testutil::random_symmetric(k, gen), rb = testutil::random_symmetric(k, gen);
    worst_meta = std::max(worst_meta, std::abs(metacorrelation(ra, rb) - oracle::metacorrelation(ra, rb)));

    // Smoothed and realized market volatility equal the root mean of the
    // corresponding covariance matrices.
    const int t2 = 20 + trial, n2 = 3 + trial % 9;
    const Eigen::MatrixXd r = testutil::random_returns(2 * t2, n2, gen);
    const Eigen::VectorXd market = r.rowwise().mean();
    const auto w2 = ew_weights(SmoothingScheme::with_divisor(static_cast<std::size_t>(t2)));
    const double est = ew_market_volatility(market.head(t2), w2);
    const double est_cov = std::sqrt(ew_covariance(r.topRows(t2), w2).mean());
    const Eigen::MatrixXd fwd = r.bottomRows(t2);
    const Eigen::MatrixXd centred = fwd.rowwise() - fwd.colwise().mean();
    const double real_cov = std::sqrt((centred.transpose() * centred / t2).mean());
    const double real = realized_market_volatility(market.tail(t2));
    worst_identity = std::max({worst_identity, std::abs(est - est_cov), std::abs(real - real_cov),
                               std::abs(real / est - real_cov / est_cov)});
  }
  const bool ok = worst_corr <= 1e-12 && worst_vol <= 1e-12 && worst_pearson <= 1e-12 && worst_meta <= 1e-12 &&
                  worst_identity <= 1e-10;
  return {ok, fmt("max error corr %.1e, vol %.1e, pearson %.1e, metacorr %.1e, volatility identity %.1e", worst_corr,
                  worst_vol, worst_pearson, worst_meta, worst_identity)};
}

bool separable(const std::vector<double>& x, const std::vector<int>& y) {
  double lo0 = INFINITY, hi0 = -INFINITY, lo1 = INFINITY, hi1 = -INFINITY;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (y[k]) {
      lo1 = std::min(lo1, x[k]);
      hi1 = std::max(hi1, x[k]);
    } else {
      lo0 = std::min(lo0, x[k]);
      hi0 = std::max(hi0, x[k]);
    }
  }
  return hi0 < lo1 || hi1 < lo0;
}

// 4. Logistic maximum likelihood.
Outcome logistic_mle() {
  std::mt19937_64 gen(404);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int close = 0, monotone = 0, redrawn = 0;
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(20);
    std::vector<int> y(20);
    // Separable draws have no maximum; they are redrawn and covered below.
    for (;;) {
      const double b0 = 2 * u(gen) - 1, b1 = 4 * u(gen) - 2;
      int ones = 0;
      for (std::size_t k = 0; k < 20; ++k) {
        x[k] = z(gen);
        y[k] = u(gen) < sigmoid(b0 + b1 * x[k]);
        ones += y[k];
      }
      if (ones > 0 && ones < 20 && !separable(x, y)) break;
      ++redrawn;
    }
    const auto fit = fit_logistic(x, y);
    const double gap = std::abs(fit.log_likelihood - oracle::grid_search_max_ll(x, y));
    worst = std::max(worst, gap);
    close += fit.converged && gap <= 1e-4;
    bool up = fit.ll_trace.size() >= 2;
    for (std::size_t k = 1; k < fit.ll_trace.size(); ++k) up = up && fit.ll_trace[k] >= fit.ll_trace[k - 1];
    monotone += up;
  }
  std::vector<double> sx(20);
  std::vector<int> sy(20);
  for (std::size_t k = 0; k < 20; ++k) {
    sx[k] = static_cast<double>(k);
    sy[k] = k >= 10;
  }
  const bool flagged = fit_logistic(sx, sy).separated;
  return {close == 50 && monotone == 50 && flagged,
          fmt("within 1e-4 of grid oracle %d/50 (max gap %.1e), monotone ascent %d/50, separation flagged %s, %d separable "
              "draws redrawn",
              close, worst, monotone, flagged ? "yes" : "no", redrawn)};
}

// 5. Classification metrics.
Outcome classification_metrics() {
  std::vector<int> predicted, actual;
  auto add = [&](int p, int a, int count) {
    for (int k = 0; k < count; ++k) {
      predicted.push_back(p);
      actual.push_back(a);
    }
  };
  add(1, 1, 3);
  add(0, 1, 1);
  add(0, 0, 4);
  add(1, 0, 2);
  const auto c = confusion(predicted, actual);
  const bool counts = c.q1 == 3 && c.q2 == 1 && c.q3 == 4 && c.q4 == 2;
  const bool exact = c.p_plus() == 0.7 && c.tpr() == 0.75 && c.fpr() == 1.0 / 3.0;

  std::mt19937_64 gen(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double auc_sum = 0;
  int endpoints = 0;
  for (int sim = 0; sim < 1000; ++sim) {
    std::vector<double> scores(100);
    std::vector<int> labels(100);
    for (;;) {
      int ones = 0;
      for (std::size_t k = 0; k < 100; ++k) {
        scores[k] = u(gen);
        labels[k] = u(gen) < 0.5;
        ones += labels[k];
      }
      if (ones > 0 && ones < 100) break;
    }
    const auto roc = roc_from_scores(scores, labels);
    auc_sum += roc.auc;
    const auto& first = roc.points.front();
    const auto& last = roc.points.back();
    endpoints += first.fpr == 0 && first.tpr == 0 && last.fpr == 1 && last.tpr == 1;
  }
  const double mean_auc = auc_sum / 1000;

  std::vector<double> scores;
  std::vector<int> labels;
  for (int k = 0; k < 40; ++k) {
    labels.push_back(k % 2);
    scores.push_back(k % 2 + 0.5 * u(gen));
  }
  const double separable_auc = roc_from_scores(scores, labels).auc;
  const bool ok = counts && exact && endpoints == 1000 && std::abs(mean_auc - 0.5) <= 0.02 && separable_auc == 1.0;
  return {ok, fmt("confusion (3,1,4,2) exact %s; ROC endpoints %d/1000; mean AUC %.4f; separable AUC %.3f",
                  counts && exact ? "yes" : "no", endpoints, mean_auc, separable_auc)};
}

// 6. Bootstrap coverage.
Outcome bootstrap_coverage() {
  const BootstrapConfig cfg;
  int covered = 0, excluded = 0, repeatable = 0;
  for (int e = 0; e < 200; ++e) {
    std::mt19937_64 gen(600000 + static_cast<std::uint64_t>(e));
    std::normal_distribution<double> z;
    std::vector<double> x(300), y(300);
    for (std::size_t k = 0; k < 300; ++k) {
      x[k] = z(gen);
      y[k] = z(gen);
    }
    const auto res = block_bootstrap_ci(x, y, cfg);
    const auto* ci = res.interval(0.95);
    covered += ci->lower <= 0 && 0 <= ci->upper;
    excluded += block_bootstrap_ci(x, x, cfg).interval(0.95)->significant;
    if (e < 20) {
      auto threaded = cfg;
      threaded.workers = 3;
      const auto again = block_bootstrap_ci(x, y, threaded);
      bool same = again.pearson_r == res.pearson_r && again.block_length_used == res.block_length_used;
      for (std::size_t k = 0; k < res.intervals.size(); ++k) {
        same = same && again.intervals[k].lower == res.intervals[k].lower && again.intervals[k].upper == res.intervals[k].upper;
      }
      repeatable += same;
    }
  }
  const bool ok = covered >= 180 && excluded == 200 && repeatable == 20;
  return {ok, fmt("white-noise coverage %d/200 (%.1f%%); y=x excludes 0 in %d/200; bit-identical reruns %d/20", covered,
                  covered / 2.0, excluded, repeatable)};
}

// 7. Block-length selector.
Outcome block_length() {
  std::mt19937_64 gen(707);
  std::normal_distribution<double> z;
  int short_iid = 0, longer_ar = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> iid(500), ar(500);
    double state = 0;
    for (int k = -200; k < 500; ++k) {
      state = 0.9 * state + z(gen);
      if (k >= 0) ar[static_cast<std::size_t>(k)] = state;
    }
    for (auto& v : iid) v = z(gen);
    const auto b_iid = optimal_block_length(iid);
    short_iid += b_iid <= 5;
    longer_ar += optimal_block_length(ar) > b_iid;
  }
  return {short_iid >= 90 && longer_ar >= 90,
          fmt("i.i.d. length <= 5 in %d/100; AR(0.9) longer in %d/100 paired trials", short_iid, longer_ar)};
}

constexpr std::uint64_t kBenchmarkSeed = 1;

// 8. Mechanism on the regime-switch benchmark.
Outcome mechanism() {
  const BenchmarkDesign design;
  const auto prices = regime_switch_benchmark(kBenchmarkSeed, design);
  const auto dir = scratch("mechanism");
  RunConfig cfg;
  cfg.output_dir = dir.string();
  ScopedWarningCapture quiet;
  const auto t0 = std::chrono::steady_clock::now();
  run_interplay(prices, cfg);
  const double elapsed = seconds_since(t0);

  double r = NAN, lo = NAN, hi = NAN;
  const auto report = read_json(dir / "interplay_grid.json");
  for (const auto& cell : report["cells"]) {
    if (cell["theta"] != 250 || cell["L"] != 10 || cell["measure"] != "edge-survival" || cell["test"].is_null()) continue;
    r = cell["test"]["r"];
    for (const auto& ci : cell["test"]["intervals"]) {
      if (ci["level"] == 0.95) {
        lo = ci["lower"];
        hi = ci["upper"];
      }
    }
  }
  fs::remove_all(dir);

  // Two blocks: windows that end before the sector rotation starts and
  // windows that start after it.
  RunConfig one;
  one.theta_grid = {250};
  one.L_grid = {10};
  GridRequest request;
  request.similarity = true;
  const auto grid = analyze_grid(compute_returns(prices), one, request);
  const auto& sim = grid.es_similarity.at(0);
  auto side = [&](std::size_t k) {
    const auto s = sim.window_starts[k];
    return s + 250 <= design.rotation_day ? 0 : (s >= design.rotation_day ? 1 : -1);
  };
  double within = 0, between = 0;
  long n_within = 0, n_between = 0;
  for (std::size_t i = 0; i < sim.window_starts.size(); ++i) {
    for (std::size_t j = 0; j < sim.window_starts.size(); ++j) {
      const int a = side(i), b = side(j);
      if (i == j || a < 0 || b < 0) continue;
      const double v = sim.matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (a == b) {
        within += v;
        ++n_within;
      } else {
        between += v;
        ++n_between;
      }
    }
  }
  const double contrast = within / static_cast<double>(n_within) - between / static_cast<double>(n_between);
  const bool ok = r < -0.2 && hi < 0 && contrast > 0.1 && elapsed < 300.0;
  return {ok, fmt("seed %llu, theta=250 L=10: r=%.4f, 95%% CI [%.4f, %.4f]; block contrast %.3f; pipeline %.1f s",
                  static_cast<unsigned long long>(kBenchmarkSeed), r, lo, hi, contrast, elapsed)};
}

// One-sided sign test: P(X >= wins), X ~ Binomial(n, 1/2).
double sign_test(int wins, int n) {
  double p = 0;
  for (int k = wins; k <= n; ++k) p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  return p;
}

// 9. Forecasting edge across seeds.
Outcome forecasting_edge() {
  const RunConfig cfg;
  GridRequest request;
  int wins_f = 0, ties_f = 0, wins_t = 0, ties_t = 0;
  double diff_f = 0, diff_t = 0, knn_sum = 0, logistic_sum = 0;
  const int seeds = 50;
  ScopedWarningCapture quiet;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto grid = analyze_grid(compute_returns(regime_switch_benchmark(static_cast<std::uint64_t>(seed))), cfg, request);
    double pe = 0, pq = 0, pk = 0;
    int cells = 0;
    for (const auto& c : forecast_grid(grid.es, cfg)) {
      if (!c.trainable) continue;
      pe += c.es.p_plus;
      pq += c.past_q.p_plus;
      if (c.knn) pk += c.knn->p_plus;
      ++cells;
    }
    if (cells == 0) continue;
    pe /= cells;
    pq /= cells;
    knn_sum += pk / cells;
    logistic_sum += pe;
    wins_f += pe > pq;
    ties_f += pe == pq;
    diff_f += pe - pq;
    const auto temporal = temporal_analysis(grid.es);
    wins_t += temporal.mean_es > temporal.mean_q;
    ties_t += temporal.mean_es == temporal.mean_q;
    diff_t += temporal.mean_es - temporal.mean_q;
  }
  const double p_f = sign_test(wins_f, seeds - ties_f), p_t = sign_test(wins_t, seeds - ties_t);
  return {p_f < 0.05 && p_t < 0.05,
          fmt("out-of-sample P+ wins %d/%d (p=%.2g, mean diff %+.3f); temporal n+ wins %d/%d (p=%.2g, mean diff %+.3f); "
              "mean P+ logistic %.3f, KNN %.3f",
              wins_f, seeds - ties_f, p_f, diff_f / seeds, wins_t, seeds - ties_t, p_t, diff_t / seeds, logistic_sum / seeds,
              knn_sum / seeds)};
}

// 10. Reference values for the 342-asset NYSE daily closes, 1997-2012.
Outcome reproduction() {
  const char* path = std::getenv("CORRPERSIST_REPRO_DATA");
  if (!path || !*path) return {false, "CORRPERSIST_REPRO_DATA not set", true};
  const auto prices = load_prices(path);
  const auto dir = scratch("reproduction");
  RunConfig cfg;
  cfg.output_dir = (dir / "interplay").string();
  ScopedWarningCapture quiet;
  run_interplay(prices, cfg);
  const auto grid = read_json(dir / "interplay" / "interplay_grid.json");
  int filled = 0;
  double r = NAN;
  for (const auto& cell : grid["cells"]) {
    if (cell["test"].is_null()) continue;
    ++filled;
    if (cell["theta"] == 1000 && cell["L"] == 100 && cell["measure"] == "edge-survival") r = cell["test"]["r"];
  }
  cfg.output_dir = (dir / "forecast").string();
  run_forecast(prices, cfg);
  double p_plus = NAN, auc = NAN;
  const auto forecast = read_json(dir / "forecast" / "forecast.json");
  for (const auto& cell : forecast["cells"]) {
    if (cell["theta"] == 500 && cell["L"] == 10 && cell["trainable"] == true) {
      p_plus = cell["es"]["p_plus"];
      if (!cell["es"]["auc"].is_null()) auc = cell["es"]["auc"];
    }
  }
  fs::remove_all(dir);
  const std::size_t expected = 2 * cfg.theta_grid.size() * cfg.L_grid.size();
  const bool ok = filled == static_cast<int>(expected) && std::abs(r - -0.6874) <= 0.05 && std::abs(p_plus - 0.704) <= 0.05 &&
                  std::abs(auc - 0.775) <= 0.05;
  return {ok, fmt("%zu assets; grid cells %d/%zu; r(1000,100)=%.4f (ref -0.6874); P+(500,10)=%.3f (ref 0.704); "
                  "AUC(500,10)=%.3f (ref 0.775)",
                  prices.n_assets(), filled, expected, r, p_plus, auc)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, pmfg_correctness},   {2, rank_invariance}, {3, estimator_oracles}, {4, logistic_mle},
      {5, classification_metrics}, {6, bootstrap_coverage}, {7, block_length}, {8, mechanism},
      {9, forecasting_edge},   {10, reproduction},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (!criteria.count(k)) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1-10)\n", argv[a]);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  int failed = 0, skipped = 0;
  for (int k : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria.at(k)();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const char* verdict = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
    std::printf("criterion %2d %s  %s [%.1f s]\n", k, verdict, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass && !o.skipped;
    skipped += o.skipped;
  }
  if (failed) return 1;
  return skipped == static_cast<int>(selected.size()) ? kSkipped : 0;
}
