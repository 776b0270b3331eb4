#ifndef CORRPERSIST_H
#define CORRPERSIST_H

#include <stddef.h>
#include <stdint.h>

#if defined(CORRPERSIST_BUILDING_LIBRARY)
#define CP_API __attribute__((visibility("default")))
#else
#define CP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_INTERNAL = 1,
  CP_ERR_DATA = 2,     /* unparsable or invalid input data */
  CP_ERR_CONFIG = 3,   /* bad parameter or configuration text */
  CP_ERR_NUMERIC = 4,  /* numerical degeneracy */
  CP_ERR_INVALID_ARGUMENT = 5,
  CP_ERR_IO = 6
} cp_status;

typedef struct cp_config cp_config;
typedef struct cp_prices cp_prices;
typedef struct cp_summary cp_summary;

CP_API const char* cp_version(void);
CP_API const char* cp_status_name(cp_status status);

/* Message of the last failing call on this thread; "" if none. */
CP_API const char* cp_last_error(void);

/* Receives every non-fatal warning. NULL restores printing to stderr. */
typedef void (*cp_warning_fn)(const char* message, void* user);
CP_API void cp_set_warning_callback(cp_warning_fn fn, void* user);

/* ---- configuration ---- */

CP_API cp_status cp_config_new(cp_config** out);
CP_API void cp_config_free(cp_config* cfg);
/* Applies "key = value" lines from a file on top of the current values. */
CP_API cp_status cp_config_load_file(cp_config* cfg, const char* path);
CP_API cp_status cp_config_set(cp_config* cfg, const char* key, const char* value);
CP_API cp_status cp_config_validate(const cp_config* cfg);
/* Effective configuration as text. The string lives until the next call
   on the same handle. */
CP_API const char* cp_config_render(cp_config* cfg);

/* ---- price tables ---- */

/* format: "auto", "wide" or "long"; NULL means auto. */
CP_API cp_status cp_prices_load(const char* path, const char* format, cp_prices** out);
/* preset: "regime-switch" or "one-factor". */
CP_API cp_status cp_prices_synth(const char* preset, uint64_t seed, cp_prices** out);
CP_API void cp_prices_free(cp_prices* prices);
CP_API size_t cp_prices_n_assets(const cp_prices* prices);
CP_API size_t cp_prices_n_days(const cp_prices* prices);
/* Hex SHA-256 of the bytes the table was read from ("synthetic" for presets). */
CP_API const char* cp_prices_digest(const cp_prices* prices);
/* Canonical wide CSV. */
CP_API cp_status cp_prices_write_csv(const cp_prices* prices, const char* path, cp_summary** out);

/* ---- subcommands ---- */

/* Each writes its reports into the configured output directory. `out` may
   be NULL; otherwise it receives a summary to free with cp_summary_free. */
CP_API cp_status cp_run_interplay(const cp_prices* prices, const cp_config* cfg, cp_summary** out);
CP_API cp_status cp_run_forecast(const cp_prices* prices, const cp_config* cfg, cp_summary** out);
CP_API cp_status cp_run_temporal(const cp_prices* prices, const cp_config* cfg, cp_summary** out);

CP_API void cp_summary_free(cp_summary* summary);
CP_API const char* cp_summary_text(const cp_summary* summary);
CP_API const char* cp_summary_output_dir(const cp_summary* summary);
CP_API size_t cp_summary_file_count(const cp_summary* summary);
CP_API const char* cp_summary_file(const cp_summary* summary, size_t index);

/* ---- building blocks ---- */

/* Filtered graph of an n x n row-major correlation matrix. kind: "pmfg" or
   "mst". Writes up to `capacity` edges as (i, j) pairs into `edges` (2 per
   edge, in acceptance order) and the edge count into `n_edges`. */
CP_API cp_status cp_filtered_graph(const double* rho, size_t n, const char* kind, uint32_t* edges,
                                   size_t capacity, size_t* n_edges);

/* Fraction of shared edges between two graphs given as (i, j) pair lists. */
CP_API cp_status cp_edge_survival(size_t n, const uint32_t* edges_a, const uint32_t* edges_b, size_t n_edges,
                                  double* out);

CP_API cp_status cp_pearson(const double* x, const double* y, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
