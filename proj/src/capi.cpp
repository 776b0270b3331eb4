#include "corrpersist/corrpersist.h"

#include "corrpersist/config.hpp"
#include "corrpersist/error.hpp"
#include "corrpersist/ingest.hpp"
#include "corrpersist/netfilter.hpp"
#include "corrpersist/persistence.hpp"
#include "corrpersist/pipeline.hpp"
#include "corrpersist/stats.hpp"
#include "corrpersist/synth.hpp"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

struct cp_config {
  corrpersist::RunConfig cfg;
  std::string rendered;
};

struct cp_prices {
  corrpersist::PriceTable table;
};

struct cp_summary {
  corrpersist::RunSummary summary;
};

namespace {

thread_local std::string g_last_error;

cp_status status_for(corrpersist::ErrorKind kind) {
  using corrpersist::ErrorKind;
  switch (kind) {
    case ErrorKind::Format:
    case ErrorKind::Dataset:
    case ErrorKind::Size:
    case ErrorKind::InsufficientHistory:
    case ErrorKind::Incompatible:
      return CP_ERR_DATA;
    case ErrorKind::Config:
      return CP_ERR_CONFIG;
    case ErrorKind::Degenerate:
      return CP_ERR_NUMERIC;
    case ErrorKind::Io:
      return CP_ERR_IO;
  }
  return CP_ERR_INTERNAL;
}

cp_status fail(cp_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
cp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CP_OK;
  } catch (const corrpersist::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CP_ERR_INTERNAL, "unknown error");
  }
}

void hand_out(corrpersist::RunSummary s, cp_summary** out) {
  if (out) *out = new cp_summary{std::move(s)};
}

cp_status run(const cp_prices* prices, const cp_config* cfg, cp_summary** out,
              corrpersist::RunSummary (*fn)(const corrpersist::PriceTable&, const corrpersist::RunConfig&)) {
  if (out) *out = nullptr;
  if (!prices || !cfg) return fail(CP_ERR_INVALID_ARGUMENT, "null handle");
  return guarded([&] { hand_out(fn(prices->table, cfg->cfg), out); });
}

corrpersist::FilteredGraph graph_from_pairs(std::size_t n, const uint32_t* pairs, std::size_t n_edges) {
  corrpersist::FilteredGraph g;
  g.n_nodes = n;
  for (std::size_t k = 0; k < n_edges; ++k) {
    const uint32_t a = std::min(pairs[2 * k], pairs[2 * k + 1]);
    const uint32_t b = std::max(pairs[2 * k], pairs[2 * k + 1]);
    if (b >= n || a == b) {
      throw corrpersist::Error(corrpersist::ErrorKind::Dataset, "edge " + std::to_string(k) + " is invalid");
    }
    g.edges.push_back({static_cast<int>(a), static_cast<int>(b), 0.0});
    g.keys.push_back(static_cast<uint32_t>(a * n + b));
  }
  std::sort(g.keys.begin(), g.keys.end());
  if (std::adjacent_find(g.keys.begin(), g.keys.end()) != g.keys.end()) {
    throw corrpersist::Error(corrpersist::ErrorKind::Dataset, "repeated edge");
  }
  return g;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "0.1.0"; }

const char* cp_status_name(cp_status status) {
  switch (status) {
    case CP_OK:
      return "ok";
    case CP_ERR_INTERNAL:
      return "internal error";
    case CP_ERR_DATA:
      return "data error";
    case CP_ERR_CONFIG:
      return "configuration error";
    case CP_ERR_NUMERIC:
      return "numerical degeneracy";
    case CP_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case CP_ERR_IO:
      return "i/o error";
  }
  return "unknown status";
}

const char* cp_last_error(void) { return g_last_error.c_str(); }

void cp_set_warning_callback(cp_warning_fn fn, void* user) {
  if (!fn) {
    corrpersist::set_warning_handler({});
    return;
  }
  corrpersist::set_warning_handler([fn, user](const std::string& msg) { fn(msg.c_str(), user); });
}

cp_status cp_config_new(cp_config** out) {
  if (!out) return fail(CP_ERR_INVALID_ARGUMENT, "null output pointer");
  *out = nullptr;
  return guarded([&] { *out = new cp_config{}; });
}

void cp_config_free(cp_config* cfg) { delete cfg; }

cp_status cp_config_load_file(cp_config* cfg, const char* path) {
  if (!cfg || !path) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg = corrpersist::load_config_file(path, cfg->cfg); });
}

cp_status cp_config_set(cp_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

cp_status cp_config_validate(const cp_config* cfg) {
  if (!cfg) return fail(CP_ERR_INVALID_ARGUMENT, "null handle");
  return guarded([&] { cfg->cfg.validate(); });
}

const char* cp_config_render(cp_config* cfg) {
  if (!cfg) return "";
  cfg->rendered = cfg->cfg.render();
  return cfg->rendered.c_str();
}

cp_status cp_prices_load(const char* path, const char* format, cp_prices** out) {
  if (!path || !out) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto f = corrpersist::parse_price_format(format ? format : "auto");
    *out = new cp_prices{corrpersist::load_prices(path, f)};
  });
}

cp_status cp_prices_synth(const char* preset, uint64_t seed, cp_prices** out) {
  if (!preset || !out) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new cp_prices{corrpersist::synth_preset(preset, seed)}; });
}

void cp_prices_free(cp_prices* prices) { delete prices; }

size_t cp_prices_n_assets(const cp_prices* prices) { return prices ? prices->table.n_assets() : 0; }

size_t cp_prices_n_days(const cp_prices* prices) { return prices ? prices->table.n_days() : 0; }

const char* cp_prices_digest(const cp_prices* prices) { return prices ? prices->table.source_digest.c_str() : ""; }

cp_status cp_prices_write_csv(const cp_prices* prices, const char* path, cp_summary** out) {
  if (out) *out = nullptr;
  if (!prices || !path) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { hand_out(corrpersist::run_normalize(prices->table, path), out); });
}

cp_status cp_run_interplay(const cp_prices* prices, const cp_config* cfg, cp_summary** out) {
  return run(prices, cfg, out, &corrpersist::run_interplay);
}

cp_status cp_run_forecast(const cp_prices* prices, const cp_config* cfg, cp_summary** out) {
  return run(prices, cfg, out, &corrpersist::run_forecast);
}

cp_status cp_run_temporal(const cp_prices* prices, const cp_config* cfg, cp_summary** out) {
  return run(prices, cfg, out, &corrpersist::run_temporal);
}

void cp_summary_free(cp_summary* summary) { delete summary; }

const char* cp_summary_text(const cp_summary* summary) { return summary ? summary->summary.text.c_str() : ""; }

const char* cp_summary_output_dir(const cp_summary* summary) {
  return summary ? summary->summary.output_dir.c_str() : "";
}

size_t cp_summary_file_count(const cp_summary* summary) { return summary ? summary->summary.files.size() : 0; }

const char* cp_summary_file(const cp_summary* summary, size_t index) {
  if (!summary || index >= summary->summary.files.size()) return nullptr;
  return summary->summary.files[index].c_str();
}

cp_status cp_filtered_graph(const double* rho, size_t n, const char* kind, uint32_t* edges, size_t capacity,
                            size_t* n_edges) {
  if (!rho || !kind || !n_edges || (capacity > 0 && !edges)) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto k = corrpersist::parse_filter_kind(kind);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        rho, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd dense = m;
    const auto g = corrpersist::build_filtered_graph(dense, k);
    *n_edges = g.edge_count();
    for (std::size_t e = 0; e < g.edges.size() && e < capacity; ++e) {
      edges[2 * e] = static_cast<uint32_t>(g.edges[e].i);
      edges[2 * e + 1] = static_cast<uint32_t>(g.edges[e].j);
    }
  });
}

cp_status cp_edge_survival(size_t n, const uint32_t* edges_a, const uint32_t* edges_b, size_t n_edges, double* out) {
  if (!edges_a || !edges_b || !out) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = corrpersist::edge_survival(graph_from_pairs(n, edges_a, n_edges), graph_from_pairs(n, edges_b, n_edges));
  });
}

cp_status cp_pearson(const double* x, const double* y, size_t n, double* out) {
  if (!x || !y || !out) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = corrpersist::pearson({x, n}, {y, n}); });
}

}  // extern "C"
