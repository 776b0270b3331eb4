#include "corrpersist/synth.hpp"

#include "corrpersist/error.hpp"
#include "corrpersist/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace corrpersist {

void SynthSpec::validate() const {
  if (n_assets < 1) throw Error(ErrorKind::Config, "synthetic market needs at least one asset");
  std::size_t total = 0;
  for (std::size_t k = 0; k < regimes.size(); ++k) {
    const auto& r = regimes[k];
    const std::string where = "regime " + std::to_string(k) + ": ";
    total += r.duration;
    if (static_cast<std::size_t>(r.loadings.rows()) != n_assets) {
      throw Error(ErrorKind::Config, where + "loadings must have one row per asset");
    }
    if (r.loadings.cols() != r.factor_vol.size()) {
      throw Error(ErrorKind::Config, where + "one factor volatility per loading column is required");
    }
    if (static_cast<std::size_t>(r.idio_vol.size()) != n_assets) {
      throw Error(ErrorKind::Config, where + "one idiosyncratic volatility per asset is required");
    }
    if (!r.loadings.allFinite()) throw Error(ErrorKind::Config, where + "loadings must be finite");
    if (!(r.idio_vol.array() > 0.0).all() || !(r.factor_vol.array() > 0.0).all() || !r.idio_vol.allFinite() ||
        !r.factor_vol.allFinite()) {
      throw Error(ErrorKind::Config, where + "volatilities must be positive and finite");
    }
  }
  if (total != n_days) {
    throw Error(ErrorKind::Config, "regime durations sum to " + std::to_string(total) + " but n_days is " +
                                       std::to_string(n_days));
  }
}

namespace {

// Civil date from days since 1970-01-01 (Howard Hinnant's algorithm).
std::string civil_date(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const long doe = z - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  const long d = doy - (153 * mp + 2) / 5 + 1;
  const long m = mp < 10 ? mp + 3 : mp - 9;
  const long y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04ld-%02ld-%02ld", y, m, d);
  return buf;
}

std::vector<std::string> weekdays(std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  long day = 10959;  // 2000-01-03, a Monday
  while (out.size() < count) {
    const long weekday = (day + 3) % 7;  // 0 = Monday
    if (weekday < 5) out.push_back(civil_date(day));
    ++day;
  }
  return out;
}

}  // namespace

PriceTable generate(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_assets);
  Rng rng(spec.seed);
  PriceTable table;
  table.dates = weekdays(spec.n_days + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03ld", static_cast<long>(i + 1));
    table.tickers.emplace_back(buf);
  }
  table.prices.resize(static_cast<Eigen::Index>(spec.n_days + 1), n);
  Eigen::VectorXd log_price = Eigen::VectorXd::Constant(n, std::log(100.0));
  table.prices.row(0).setConstant(100.0);
  Eigen::Index row = 1;
  for (const auto& regime : spec.regimes) {
    const Eigen::Index f = regime.loadings.cols();
    Eigen::VectorXd factors(f);
    for (std::size_t t = 0; t < regime.duration; ++t, ++row) {
      for (Eigen::Index k = 0; k < f; ++k) factors(k) = regime.factor_vol(k) * rng.normal();
      for (Eigen::Index i = 0; i < n; ++i) {
        log_price(i) += regime.loadings.row(i).dot(factors) + regime.idio_vol(i) * rng.normal();
      }
      table.prices.row(row) = log_price.array().exp().transpose();
    }
  }
  table.source_digest = "synthetic";
  return table;
}

SynthSpec one_factor_spec(std::size_t n_assets, std::size_t n_days, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_assets = n_assets;
  spec.n_days = n_days;
  spec.seed = seed;
  Regime r;
  r.duration = n_days;
  r.loadings = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n_assets), 1);
  r.factor_vol = Eigen::VectorXd::Constant(1, 0.01);
  r.idio_vol = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_assets), 0.004);
  spec.regimes.push_back(std::move(r));
  return spec;
}

namespace {

// Sector factors sit in columns 1..n_sectors, column 0 is the market.
struct Structure {
  std::vector<std::size_t> sector;
  Eigen::VectorXd beta;
  Eigen::VectorXd strength;
};

void redraw_asset(Structure& s, std::size_t i, Rng& rng) {
  s.beta(static_cast<Eigen::Index>(i)) = 0.6 + 0.6 * rng.uniform();
  s.strength(static_cast<Eigen::Index>(i)) = 0.4 + 0.9 * rng.uniform();
}

Eigen::MatrixXd loadings_of(const Structure& s, std::size_t n_sectors) {
  const auto n = static_cast<Eigen::Index>(s.sector.size());
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(n_sectors + 1));
  for (Eigen::Index r = 0; r < n; ++r) {
    lam(r, 0) = s.beta(r);
    lam(r, static_cast<Eigen::Index>(1 + s.sector[static_cast<std::size_t>(r)])) = s.strength(r);
  }
  return lam;
}

double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

void BenchmarkDesign::validate() const {
  if (n_assets < 4 || n_sectors < 2 || n_days < 2) throw Error(ErrorKind::Config, "benchmark is too small");
  if (!(market_vol > 0 && sector_vol > 0 && idio_vol > 0)) {
    throw Error(ErrorKind::Config, "benchmark volatilities must be positive");
  }
  if (!(churn_fraction >= 0 && churn_fraction <= 8)) throw Error(ErrorKind::Config, "churn_fraction must lie in [0, 8]");
  if (!(gap_min >= 1 && gap_min <= gap_max && lead_min >= 0 && lead_min <= lead_max && surge_min >= 1 &&
        surge_min <= surge_max && surge_low >= 1 && surge_low <= surge_high && background_sigma >= 0 &&
        background_min >= 1 && background_min <= background_max)) {
    throw Error(ErrorKind::Config, "inconsistent benchmark ranges");
  }
  if (rotation_span < 1 || rotation_day + rotation_span >= n_days) {
    throw Error(ErrorKind::Config, "the sector rotation must end before the last day");
  }
}

SynthSpec regime_switch_spec(std::uint64_t seed, const BenchmarkDesign& d) {
  d.validate();
  const std::size_t n = d.n_assets;
  const std::size_t days = d.n_days;

  // Layout draws use their own streams so the return noise stream is the
  // plain seed.
  Rng rng = Rng::for_stream(seed, 0x5eed);
  std::vector<Structure> versions(1);
  Structure& first = versions[0];
  first.sector.resize(n);
  first.beta.resize(static_cast<Eigen::Index>(n));
  first.strength.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    first.sector[i] = i % d.n_sectors;
    redraw_asset(first, i, rng);
  }

  std::vector<std::size_t> version(days, 0);
  std::vector<double> mult(days, 1.0);

  // Episodes: churn at c, surge over [c + lead, c + lead + length), then a
  // quiet gap. The episode closest to rotation_day is replaced by the full
  // rotation.
  bool rotated = d.rotation_day >= days;
  double t = between(rng, d.gap_min, d.gap_max);
  while (static_cast<std::size_t>(t) < days) {
    auto churn = static_cast<std::size_t>(t);
    const auto lead = static_cast<std::size_t>(between(rng, d.lead_min, d.lead_max));
    const auto length = static_cast<std::size_t>(between(rng, d.surge_min, d.surge_max));
    const double m = between(rng, d.surge_low, d.surge_high);
    bool rotation = false;
    if (!rotated && (churn >= d.rotation_day ||
                     static_cast<double>(churn + lead + length) + d.gap_min / 2 > static_cast<double>(d.rotation_day))) {
      // Drop this episode in favour of the rotation.
      churn = d.rotation_day;
      rotation = true;
      rotated = true;
    }
    // Assets change sector one at a time, evenly spread over the lead, so
    // the structure drifts for the whole run-up to the surge.
    const std::size_t span = rotation ? d.rotation_span : lead;
    std::vector<std::size_t> movers;
    std::vector<std::size_t> target(n);
    if (rotation) {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      for (std::size_t k = 0; k < n; ++k) target[order[k]] = k % d.n_sectors;
      movers = order;
    } else {
      const auto moved = static_cast<std::size_t>(d.churn_fraction * static_cast<double>(n));
      for (std::size_t k = 0; k < moved; ++k) {
        const auto i = static_cast<std::size_t>(rng.below(n));
        movers.push_back(i);
        target[i] = (versions.back().sector[i] + 1 + rng.below(d.n_sectors - 1)) % d.n_sectors;
      }
    }
    for (std::size_t k = 0; k < movers.size(); ++k) {
      const std::size_t i = movers[k];
      const std::size_t day = churn + (2 * k + 1) * span / (2 * movers.size());
      if (day >= days) break;
      Structure next = versions.back();
      next.sector[i] = target[i];
      redraw_asset(next, i, rng);
      versions.push_back(std::move(next));
      for (std::size_t t2 = day; t2 < days; ++t2) version[t2] = versions.size() - 1;
    }
    if (rotation) {
      // The surge follows the end of the rotation.
      const std::size_t begin = std::min(churn + span, days);
      const std::size_t end = std::min(begin + length, days);
      for (std::size_t day = begin; day < end; ++day) mult[day] *= m;
      t = static_cast<double>(end) + between(rng, d.gap_min, d.gap_max);
      continue;
    }
    const std::size_t begin = std::min(churn + lead, days);
    const std::size_t end = std::min(begin + length, days);
    for (std::size_t day = begin; day < end; ++day) mult[day] *= m;
    t = static_cast<double>(end) + between(rng, d.gap_min, d.gap_max);
  }

  if (d.background_sigma > 0) {
    Rng bg = Rng::for_stream(seed, 0xb9);
    std::size_t day = 0;
    while (day < days) {
      const auto len = static_cast<std::size_t>(between(bg, d.background_min, d.background_max));
      const double level = std::exp(d.background_sigma * bg.normal());
      for (std::size_t k = day; k < std::min(day + len, days); ++k) mult[k] *= level;
      day += len;
    }
  }

  SynthSpec spec;
  spec.n_assets = n;
  spec.n_days = days;
  spec.seed = seed;
  std::size_t begin = 0;
  for (std::size_t day = 1; day <= days; ++day) {
    if (day < days && version[day] == version[begin] && mult[day] == mult[begin]) continue;
    Regime r;
    r.duration = day - begin;
    r.loadings = loadings_of(versions[version[begin]], d.n_sectors);
    r.factor_vol = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d.n_sectors + 1), d.sector_vol * mult[begin]);
    r.factor_vol(0) = d.market_vol * mult[begin];
    r.idio_vol = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), d.idio_vol * mult[begin]);
    spec.regimes.push_back(std::move(r));
    begin = day;
  }
  return spec;
}

PriceTable regime_switch_benchmark(std::uint64_t seed, const BenchmarkDesign& design) {
  return generate(regime_switch_spec(seed, design));
}

PriceTable synth_preset(const std::string& name, std::uint64_t seed) {
  if (name == "regime-switch") return regime_switch_benchmark(seed);
  if (name == "one-factor") return generate(one_factor_spec(20, 1000, seed));
  throw Error(ErrorKind::Config, "unknown synthetic preset '" + name + "' (expected regime-switch or one-factor)");
}

}  // namespace corrpersist
