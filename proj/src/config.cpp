#include "corrpersist/config.hpp"

#include "corrpersist/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace corrpersist {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Error bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  return Error(ErrorKind::Config, "invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

std::size_t to_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw bad_value(key, value, "a non-negative integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw bad_value(key, value, "an unsigned integer");
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw bad_value(key, value, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw bad_value(key, value, "true or false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest form that round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

const char* format_name(PriceFormat f) {
  switch (f) {
    case PriceFormat::Wide:
      return "wide";
    case PriceFormat::Long:
      return "long";
    default:
      return "auto";
  }
}

}  // namespace

void RunConfig::validate() const {
  if (theta_grid.empty() || L_grid.empty()) throw Error(ErrorKind::Config, "theta and L grids must not be empty");
  for (auto t : theta_grid) {
    if (t < 2) throw Error(ErrorKind::Config, "every theta must be at least 2");
  }
  for (auto l : L_grid) {
    if (l < 1) throw Error(ErrorKind::Config, "every L must be positive");
  }
  if (dT < 1) throw Error(ErrorKind::Config, "dT must be positive");
  if (theta_forward < 2) throw Error(ErrorKind::Config, "theta_forward must be at least 2");
  if (!(smoothing_divisor > 0.0)) throw Error(ErrorKind::Config, "smoothing_divisor must be positive");
  if (!(f_test > 0.0 && f_test < 1.0)) throw Error(ErrorKind::Config, "f_test must lie in (0, 1)");
  if (!(p_max >= 0.0 && p_max <= 1.0)) throw Error(ErrorKind::Config, "p_max must lie in [0, 1]");
  if (knn_k < 1 || knn_k % 2 == 0) throw Error(ErrorKind::Config, "knn_k must be odd and positive");
  if (workers < 1) throw Error(ErrorKind::Config, "workers must be positive");
  if (output_dir.empty()) throw Error(ErrorKind::Config, "output_dir must not be empty");
  bootstrap.validate();
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto counts = [&] {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(value)) out.push_back(to_count(key, item));
    if (out.empty()) throw bad_value(key, value, "a comma-separated list of integers");
    return out;
  };
  if (key == "input") {
    input = value;
  } else if (key == "input_format") {
    input_format = parse_price_format(value);
  } else if (key == "theta_grid") {
    theta_grid = counts();
  } else if (key == "L_grid") {
    L_grid = counts();
  } else if (key == "dT") {
    dT = to_count(key, value);
  } else if (key == "theta_forward") {
    theta_forward = to_count(key, value);
  } else if (key == "smoothing_divisor") {
    smoothing_divisor = to_real(key, value);
  } else if (key == "filter") {
    filter = parse_filter_kind(value);
  } else if (key == "measure") {
    measure = parse_similarity_measure(value);
  } else if (key == "f_test") {
    f_test = to_real(key, value);
  } else if (key == "p_max") {
    p_max = to_real(key, value);
  } else if (key == "knn") {
    knn = to_bool(key, value);
  } else if (key == "knn_k") {
    knn_k = to_count(key, value);
  } else if (key == "n_resamples") {
    bootstrap.n_resamples = to_count(key, value);
  } else if (key == "block_length") {
    if (value == "auto") {
      bootstrap.block_length.reset();
    } else {
      bootstrap.block_length = to_count(key, value);
    }
  } else if (key == "seed") {
    bootstrap.seed = to_u64(key, value);
  } else if (key == "ci_levels") {
    bootstrap.ci_levels.clear();
    for (const auto& item : split_list(value)) bootstrap.ci_levels.push_back(to_real(key, item));
  } else if (key == "output_dir") {
    output_dir = value;
  } else if (key == "dump_similarity") {
    dump_similarity = to_bool(key, value);
  } else if (key == "dump_correlations") {
    dump_correlations = to_bool(key, value);
  } else if (key == "dump_graphs") {
    dump_graphs = to_bool(key, value);
  } else if (key == "workers") {
    workers = to_count(key, value);
    bootstrap.workers = workers;
  } else {
    throw Error(ErrorKind::Config, "unknown configuration key '" + key + "'");
  }
}

std::string RunConfig::render() const {
  std::string levels;
  for (std::size_t k = 0; k < bootstrap.ci_levels.size(); ++k) levels += (k ? "," : "") + real(bootstrap.ci_levels[k]);
  std::ostringstream out;
  out << "input = " << input << '\n'
      << "input_format = " << format_name(input_format) << '\n'
      << "theta_grid = " << join_counts(theta_grid) << '\n'
      << "L_grid = " << join_counts(L_grid) << '\n'
      << "dT = " << dT << '\n'
      << "theta_forward = " << theta_forward << '\n'
      << "smoothing_divisor = " << real(smoothing_divisor) << '\n'
      << "filter = " << to_string(filter) << '\n'
      << "measure = " << to_string(measure) << '\n'
      << "f_test = " << real(f_test) << '\n'
      << "p_max = " << real(p_max) << '\n'
      << "knn = " << (knn ? "true" : "false") << '\n'
      << "knn_k = " << knn_k << '\n'
      << "n_resamples = " << bootstrap.n_resamples << '\n'
      << "block_length = " << (bootstrap.block_length ? std::to_string(*bootstrap.block_length) : "auto") << '\n'
      << "seed = " << bootstrap.seed << '\n'
      << "ci_levels = " << levels << '\n'
      << "output_dir = " << output_dir << '\n'
      << "dump_similarity = " << (dump_similarity ? "true" : "false") << '\n'
      << "dump_correlations = " << (dump_correlations ? "true" : "false") << '\n'
      << "dump_graphs = " << (dump_graphs ? "true" : "false") << '\n'
      << "workers = " << workers << '\n';
  return out.str();
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      base.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw e.with_context("config line " + std::to_string(line_no));
    }
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

}  // namespace corrpersist
