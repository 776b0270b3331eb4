#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace corrpersist {

/// Aligned daily closing prices: row t is a trading day, column i an asset.
/// Dates are opaque ISO-8601 labels; only their order matters.
struct PriceTable {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;  // T x N, strictly positive
  std::string source_digest;  // SHA-256 of the bytes the table was parsed from

  std::size_t n_days() const { return dates.size(); }
  std::size_t n_assets() const { return tickers.size(); }

  /// Throws Error(Dataset) unless dates strictly increase, prices are finite
  /// and positive, shapes agree and at least 4 assets remain.
  void validate() const;
};

/// Log-returns; row t is the return from day t to day t+1 and is labelled
/// with the later date.
struct ReturnTable {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;        // (T-1) x N
  Eigen::VectorXd market_return;  // equal-weight cross-sectional mean per row

  std::size_t n_obs() const { return static_cast<std::size_t>(returns.rows()); }
  std::size_t n_assets() const { return static_cast<std::size_t>(returns.cols()); }
};

enum class PriceFormat { Auto, Wide, Long };

PriceFormat parse_price_format(const std::string& name);

/// Parses CSV text. Assets missing any date are dropped with a warning;
/// syntax problems raise Error(Format) naming the line, invariant violations
/// raise Error(Dataset).
PriceTable parse_prices(std::istream& in, PriceFormat format, const std::string& source_name = "<stream>");

PriceTable load_prices(const std::filesystem::path& path, PriceFormat format = PriceFormat::Auto);

/// Canonical wide CSV: header "date,<tickers...>", prices printed with
/// round-trip precision.
void write_wide_csv(const PriceTable& table, std::ostream& out);

ReturnTable compute_returns(const PriceTable& prices);

/// One estimation window [start, end) and its forward window
/// [forward_start, forward_end), all in return-observation indices.
struct WindowSpec {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t forward_start = 0;
  std::size_t forward_end = 0;
  bool forward_complete = false;
};

/// Windows [s, s+theta) for s = 0, dT, 2dT, ... while s + theta <= t_total.
/// A window whose forward window runs past the data is kept but flagged
/// forward-incomplete.
std::vector<WindowSpec> make_windows(std::size_t t_total, std::size_t theta, std::size_t dT,
                                     std::size_t theta_forward);

/// Hex SHA-256 of a byte string (input provenance).
std::string sha256_hex(const std::string& bytes);

}  // namespace corrpersist
