#include "corrpersist/ingest.hpp"

#include "corrpersist/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace corrpersist {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_iso_date(const std::string& s) {
  if (s.size() < 10) return false;
  for (std::size_t i = 0; i < 10; ++i) {
    const bool dash = (i == 4 || i == 7);
    if (dash ? s[i] != '-' : !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

Error format_error(const std::string& source, std::size_t line, const std::string& msg) {
  return Error(ErrorKind::Format, source + ":" + std::to_string(line) + ": " + msg);
}

double parse_price(const std::string& cell, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw format_error(source, line, "cannot parse price '" + cell + "'");
  }
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::Dataset,
                source + ":" + std::to_string(line) + ": non-positive price " + cell);
  }
  return value;
}

// Cells keyed by (ticker, date); a missing cell is simply absent.
struct RawCells {
  std::vector<std::string> ticker_order;
  std::map<std::string, std::unordered_map<std::string, double>> by_ticker;
  std::vector<std::string> dates;  // unsorted union
};

PriceTable align(RawCells raw, const std::string& source) {
  std::sort(raw.dates.begin(), raw.dates.end());
  raw.dates.erase(std::unique(raw.dates.begin(), raw.dates.end()), raw.dates.end());

  std::vector<std::string> kept;
  for (const auto& ticker : raw.ticker_order) {
    const auto& cells = raw.by_ticker[ticker];
    if (cells.size() == raw.dates.size()) {
      kept.push_back(ticker);
    } else {
      warn(source + ": dropping asset " + ticker + " (" +
           std::to_string(raw.dates.size() - cells.size()) + " missing dates)");
    }
  }

  PriceTable table;
  table.dates = raw.dates;
  table.tickers = kept;
  table.prices.resize(static_cast<Eigen::Index>(raw.dates.size()), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto& cells = raw.by_ticker[kept[j]];
    for (std::size_t t = 0; t < raw.dates.size(); ++t) {
      table.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = cells.at(raw.dates[t]);
    }
  }
  if (kept.size() < 4) {
    throw Error(ErrorKind::Dataset, source + ": only " + std::to_string(kept.size()) +
                                        " complete assets survive alignment (need at least 4)");
  }
  table.validate();
  return table;
}

RawCells read_wide(const std::vector<std::string>& header, std::istream& in, std::size_t& line_no,
                   const std::string& source) {
  RawCells raw;
  if (header.size() < 2) throw format_error(source, 1, "wide CSV needs a date column and at least one ticker");
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j].empty()) throw format_error(source, 1, "empty ticker name in header");
    if (raw.by_ticker.count(header[j])) throw format_error(source, 1, "duplicate ticker " + header[j]);
    raw.ticker_order.push_back(header[j]);
    raw.by_ticker[header[j]];
  }
  std::unordered_map<std::string, std::size_t> seen_dates;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw format_error(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                              std::to_string(fields.size()));
    }
    if (!is_iso_date(fields[0])) throw format_error(source, line_no, "bad ISO-8601 date '" + fields[0] + "'");
    if (auto [it, fresh] = seen_dates.emplace(fields[0], line_no); !fresh) {
      throw format_error(source, line_no, "date " + fields[0] + " repeats line " + std::to_string(it->second));
    }
    raw.dates.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      if (fields[j].empty() || lower(fields[j]) == "na" || lower(fields[j]) == "nan") continue;
      raw.by_ticker[header[j]][fields[0]] = parse_price(fields[j], source, line_no);
    }
  }
  return raw;
}

RawCells read_long(const std::vector<std::string>& header, std::istream& in, std::size_t& line_no,
                   const std::string& source) {
  int date_col = -1, ticker_col = -1, price_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto h = lower(header[j]);
    if (h == "date") date_col = static_cast<int>(j);
    if (h == "ticker" || h == "symbol") ticker_col = static_cast<int>(j);
    if (h == "price" || h == "close") price_col = static_cast<int>(j);
  }
  if (header.size() != 3) throw format_error(source, 1, "long CSV needs exactly date,ticker,price columns");
  if (date_col < 0 || ticker_col < 0 || price_col < 0) {
    date_col = 0;
    ticker_col = 1;
    price_col = 2;
  }

  RawCells raw;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw format_error(source, line_no, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    const auto& date = fields[static_cast<std::size_t>(date_col)];
    const auto& ticker = fields[static_cast<std::size_t>(ticker_col)];
    if (!is_iso_date(date)) throw format_error(source, line_no, "bad ISO-8601 date '" + date + "'");
    if (ticker.empty()) throw format_error(source, line_no, "empty ticker");
    const double price = parse_price(fields[static_cast<std::size_t>(price_col)], source, line_no);
    auto found = raw.by_ticker.find(ticker);
    if (found == raw.by_ticker.end()) {
      raw.ticker_order.push_back(ticker);
      found = raw.by_ticker.emplace(ticker, std::unordered_map<std::string, double>{}).first;
    }
    if (!found->second.emplace(date, price).second) {
      throw format_error(source, line_no, "duplicate cell (" + date + ", " + ticker + ")");
    }
    raw.dates.push_back(date);
  }
  return raw;
}

}  // namespace

void PriceTable::validate() const {
  const auto t = static_cast<Eigen::Index>(dates.size());
  const auto n = static_cast<Eigen::Index>(tickers.size());
  if (prices.rows() != t || prices.cols() != n) {
    throw Error(ErrorKind::Dataset, "price matrix shape does not match dates x tickers");
  }
  if (n < 4) throw Error(ErrorKind::Dataset, "need at least 4 assets, have " + std::to_string(n));
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw Error(ErrorKind::Dataset, "dates not strictly increasing at " + dates[i]);
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < t; ++i) {
      const double p = prices(i, j);
      if (!std::isfinite(p) || p <= 0.0) {
        throw Error(ErrorKind::Dataset, "non-positive price for " + tickers[static_cast<std::size_t>(j)] +
                                            " on " + dates[static_cast<std::size_t>(i)]);
      }
    }
  }
}

PriceFormat parse_price_format(const std::string& name) {
  const auto n = lower(name);
  if (n == "auto") return PriceFormat::Auto;
  if (n == "wide" || n == "csv-wide") return PriceFormat::Wide;
  if (n == "long" || n == "csv-long") return PriceFormat::Long;
  throw Error(ErrorKind::Config, "unknown price format '" + name + "' (expected auto, wide or long)");
}

PriceTable parse_prices(std::istream& in, PriceFormat format, const std::string& source_name) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  std::istringstream text(bytes);

  std::string header_line;
  std::size_t line_no = 0;
  while (std::getline(text, header_line)) {
    ++line_no;
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    if (!trim(header_line).empty()) break;
  }
  if (trim(header_line).empty()) throw format_error(source_name, line_no, "missing header row");
  const auto header = split_csv_line(header_line);

  if (format == PriceFormat::Auto) {
    bool has_ticker = false, has_price = false;
    for (const auto& h : header) {
      const auto l = lower(h);
      has_ticker |= (l == "ticker" || l == "symbol");
      has_price |= (l == "price" || l == "close");
    }
    format = (header.size() == 3 && has_ticker && has_price) ? PriceFormat::Long : PriceFormat::Wide;
  }

  RawCells raw = format == PriceFormat::Long ? read_long(header, text, line_no, source_name)
                                             : read_wide(header, text, line_no, source_name);
  PriceTable table = align(std::move(raw), source_name);
  table.source_digest = sha256_hex(bytes);
  return table;
}

PriceTable load_prices(const std::filesystem::path& path, PriceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_prices(in, format, path.string());
}

void write_wide_csv(const PriceTable& table, std::ostream& out) {
  out << "date";
  for (const auto& t : table.tickers) out << ',' << t;
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < table.dates.size(); ++t) {
    out << table.dates[t];
    for (Eigen::Index j = 0; j < table.prices.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", table.prices(static_cast<Eigen::Index>(t), j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

ReturnTable compute_returns(const PriceTable& prices) {
  const Eigen::Index t = prices.prices.rows();
  if (t < 2) throw Error(ErrorKind::Dataset, "need at least 2 days of prices to form returns");
  ReturnTable r;
  r.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  r.tickers = prices.tickers;
  const Eigen::MatrixXd logs = prices.prices.array().log().matrix();
  r.returns = logs.bottomRows(t - 1) - logs.topRows(t - 1);
  r.market_return = r.returns.rowwise().mean();
  return r;
}

std::vector<WindowSpec> make_windows(std::size_t t_total, std::size_t theta, std::size_t dT,
                                     std::size_t theta_forward) {
  if (theta < 2) throw Error(ErrorKind::Config, "window length theta must be >= 2");
  if (dT < 1) throw Error(ErrorKind::Config, "window shift dT must be >= 1");
  if (theta_forward < 2) throw Error(ErrorKind::Config, "forward window length must be >= 2");
  std::vector<WindowSpec> windows;
  if (t_total < theta) {
    warn("only " + std::to_string(t_total) + " return observations, shorter than theta=" +
         std::to_string(theta) + "; no windows");
    return windows;
  }
  for (std::size_t s = 0; s + theta <= t_total; s += dT) {
    WindowSpec w;
    w.start = s;
    w.end = s + theta;
    w.forward_start = w.end;
    w.forward_end = w.end + theta_forward;
    w.forward_complete = w.forward_end <= t_total;
    windows.push_back(w);
  }
  return windows;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace corrpersist
