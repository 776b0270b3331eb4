#include "corrpersist/error.hpp"
#include "corrpersist/ewstats.hpp"
#include "corrpersist/synth.hpp"
#include "corrpersist/volratio.hpp"

#include <doctest.h>

#include <cmath>

using namespace corrpersist;

namespace {

Regime regime(std::size_t days, const Eigen::MatrixXd& loadings, double idio, const Eigen::VectorXd& factor_vol) {
  Regime r;
  r.duration = days;
  r.loadings = loadings;
  r.idio_vol = Eigen::VectorXd::Constant(loadings.rows(), idio);
  r.factor_vol = factor_vol;
  return r;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& r) {
  const Eigen::MatrixXd c = r.rowwise() - r.colwise().mean();
  return c.transpose() * c / static_cast<double>(r.rows());
}

double mean_offdiag(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  return (m.sum() - m.trace()) / static_cast<double>(n * (n - 1));
}

}  // namespace

TEST_CASE("zero loadings give uncorrelated assets") {
  SynthSpec spec;
  spec.n_assets = 20;
  spec.n_days = 500;
  spec.seed = 3;
  spec.regimes.push_back(regime(500, Eigen::MatrixXd::Zero(20, 1), 0.01, Eigen::VectorXd::Constant(1, 0.01)));
  const auto prices = generate(spec);
  CHECK(prices.n_days() == 501);
  CHECK(prices.n_assets() == 20);
  CHECK(prices.prices.row(0).isApprox(Eigen::RowVectorXd::Constant(20, 100.0)));
  const auto r = compute_returns(prices);
  const Eigen::MatrixXd c = sample_cov(r.returns);
  const Eigen::VectorXd sd = c.diagonal().cwiseSqrt();
  const Eigen::MatrixXd rho = sd.asDiagonal().inverse() * c * sd.asDiagonal().inverse();
  CHECK(mean_offdiag(rho.cwiseAbs()) < 0.1);
}

TEST_CASE("one dominant factor correlates every pair") {
  const auto spec = one_factor_spec(20, 1000, 4);
  const auto r = compute_returns(generate(spec));
  const Eigen::MatrixXd c = sample_cov(r.returns);
  const Eigen::VectorXd sd = c.diagonal().cwiseSqrt();
  const Eigen::MatrixXd rho = sd.asDiagonal().inverse() * c * sd.asDiagonal().inverse();
  CHECK(mean_offdiag(rho) > 0.5);
}

TEST_CASE("sample covariance converges to the factor model") {
  SynthSpec spec;
  spec.n_assets = 20;
  spec.n_days = 3000;
  spec.seed = 5;
  Eigen::MatrixXd load(20, 3);
  for (int i = 0; i < 20; ++i) {
    load(i, 0) = 1.0;
    load(i, 1) = i < 10 ? 0.8 : 0.0;
    load(i, 2) = i >= 10 ? 0.6 : -0.2;
  }
  Eigen::VectorXd fvol(3);
  fvol << 0.01, 0.007, 0.005;
  spec.regimes.push_back(regime(3000, load, 0.008, fvol));
  const auto r = compute_returns(generate(spec));
  const Eigen::MatrixXd model =
      load * fvol.array().square().matrix().asDiagonal() * load.transpose() + 0.008 * 0.008 * Eigen::MatrixXd::Identity(20, 20);
  const double err = (sample_cov(r.returns) - model).norm() / model.norm();
  CHECK(err < 0.15);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate(one_factor_spec(8, 300, 9));
  const auto b = generate(one_factor_spec(8, 300, 9));
  const auto c = generate(one_factor_spec(8, 300, 10));
  CHECK(a.prices == b.prices);
  CHECK(a.dates == b.dates);
  CHECK(a.tickers == b.tickers);
  CHECK(a.prices != c.prices);
  CHECK(a.dates.front() == "2000-01-03");
  CHECK(a.dates[5] == "2000-01-10");  // weekdays only
}

TEST_CASE("spec validation") {
  auto spec = one_factor_spec(8, 300, 1);
  spec.regimes[0].duration = 299;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = one_factor_spec(8, 300, 1);
  spec.regimes[0].idio_vol(3) = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = one_factor_spec(8, 300, 1);
  spec.regimes[0].loadings = Eigen::MatrixXd::Ones(7, 1);
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = one_factor_spec(8, 300, 1);
  spec.regimes[0].loadings(0, 0) = std::nan("");
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("a volatility doubling ahead pushes q above one") {
  SynthSpec spec;
  spec.n_assets = 10;
  spec.n_days = 1000;
  spec.seed = 6;
  const Eigen::MatrixXd load = Eigen::MatrixXd::Ones(10, 1);
  spec.regimes.push_back(regime(600, load, 0.01, Eigen::VectorXd::Constant(1, 0.01)));
  spec.regimes.push_back(regime(400, load, 0.02, Eigen::VectorXd::Constant(1, 0.02)));
  const auto returns = compute_returns(generate(spec));
  const auto windows = make_windows(returns.n_obs(), 250, 5, 250);
  const auto track = volatility_track(returns, windows, ew_weights(SmoothingScheme::with_divisor(250)));
  std::size_t checked = 0;
  for (std::size_t a = 0; a < windows.size(); ++a) {
    const auto& w = windows[a];
    if (!w.forward_complete || w.end > 600) continue;
    // Forward window at least half inside the doubled stretch.
    if (w.forward_end < 600 + 125) continue;
    CHECK(track.sigma_realized[a] / track.sigma_est[a] > 1.0);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("benchmark layout") {
  const auto spec = regime_switch_spec(1);
  CHECK(spec.n_assets == 50);
  CHECK(spec.n_days == 3000);
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.regimes.size() > 10);
  const auto a = regime_switch_benchmark(1);
  CHECK(a.n_days() == 3001);
  CHECK(a.n_assets() == 50);
  CHECK(a.prices == regime_switch_benchmark(1).prices);
  CHECK(a.prices != regime_switch_benchmark(2).prices);
  CHECK_NOTHROW(a.validate());

  BenchmarkDesign small;
  small.n_assets = 12;
  small.n_days = 1200;
  small.rotation_day = 600;
  small.rotation_span = 100;
  const auto b = regime_switch_benchmark(3, small);
  CHECK(b.n_assets() == 12);
  CHECK(b.n_days() == 1201);
}

TEST_CASE("benchmark design validation") {
  BenchmarkDesign d;
  d.n_sectors = 1;
  CHECK_THROWS_AS(d.validate(), Error);
  d = BenchmarkDesign{};
  d.rotation_day = 2900;
  CHECK_THROWS_AS(d.validate(), Error);
  d = BenchmarkDesign{};
  d.gap_min = 800;
  CHECK_THROWS_AS(d.validate(), Error);
  d = BenchmarkDesign{};
  d.surge_low = 0.5;
  CHECK_THROWS_AS(d.validate(), Error);
  d = BenchmarkDesign{};
  d.churn_fraction = -1;
  CHECK_THROWS_AS(d.validate(), Error);
}

TEST_CASE("presets") {
  CHECK(synth_preset("one-factor", 2).n_assets() == 20);
  CHECK(synth_preset("one-factor", 2).n_days() == 1001);
  CHECK(synth_preset("regime-switch", 2).n_assets() == 50);
  CHECK_THROWS_AS(synth_preset("garch", 2), Error);
}
