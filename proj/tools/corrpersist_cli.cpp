#include "corrpersist/corrpersist.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kOther = 1, kData = 2, kConfig = 3, kNumeric = 4 };

int exit_code(cp_status s) {
  switch (s) {
    case CP_OK:
      return kOk;
    case CP_ERR_DATA:
      return kData;
    case CP_ERR_CONFIG:
    case CP_ERR_INVALID_ARGUMENT:
      return kConfig;
    case CP_ERR_NUMERIC:
      return kNumeric;
    default:
      return kOther;
  }
}

int report_failure(cp_status s, const char* stage) {
  std::fprintf(stderr, "error (%s) in %s: %s\n", cp_status_name(s), stage, cp_last_error());
  return exit_code(s);
}

struct ConfigDeleter {
  void operator()(cp_config* c) const { cp_config_free(c); }
};
struct PricesDeleter {
  void operator()(cp_prices* p) const { cp_prices_free(p); }
};
struct SummaryDeleter {
  void operator()(cp_summary* s) const { cp_summary_free(s); }
};
using ConfigPtr = std::unique_ptr<cp_config, ConfigDeleter>;
using PricesPtr = std::unique_ptr<cp_prices, PricesDeleter>;
using SummaryPtr = std::unique_ptr<cp_summary, SummaryDeleter>;

void print_summary(const cp_summary* s, bool quiet) {
  std::fputs(cp_summary_text(s), stdout);
  if (quiet) return;
  std::printf("wrote %zu file(s) to %s\n", cp_summary_file_count(s), cp_summary_output_dir(s));
}

// Flags shared by interplay, forecast and temporal. Every flag maps onto one
// config key and only overrides the config when given.
struct AnalysisFlags {
  std::string config_file;
  bool print_config = false;
  bool quiet = false;
  std::map<std::string, std::string> values;
  std::vector<std::string> raw_sets;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "Configuration file (key = value lines)");
    app->add_flag("--print-config", print_config, "Print the effective configuration and exit");
    app->add_flag("-q,--quiet", quiet, "Only print the result table");
    add(app, "-i,--input", "input", "Price CSV (wide or long)");
    add(app, "--format", "input_format", "Input layout: auto, wide or long");
    add(app, "-o,--output-dir", "output_dir", "Output directory");
    add(app, "--theta", "theta_grid", "Window lengths, comma separated");
    add(app, "--L", "L_grid", "Persistence look-backs, comma separated");
    add(app, "--dT", "dT", "Window shift in observations");
    add(app, "--theta-forward", "theta_forward", "Forward window length");
    add(app, "--divisor", "smoothing_divisor", "Decay scale divisor (theta/divisor, L/divisor)");
    add(app, "--filter", "filter", "Network filter: pmfg or mst");
    add(app, "--measure", "measure", "Similarity: edge-survival or metacorrelation");
    add(app, "--f-test", "f_test", "Test fraction of the chronological split");
    add(app, "--p-max", "p_max", "Decision threshold on the predicted probability");
    add(app, "--knn-k", "knn_k", "Neighbours for the KNN comparison (odd)");
    add(app, "--knn", "knn", "Include the KNN comparison: true or false");
    add(app, "--resamples", "n_resamples", "Bootstrap resamples");
    add(app, "--block-length", "block_length", "Bootstrap block length or 'auto'");
    add(app, "--seed", "seed", "Bootstrap seed");
    add(app, "--ci-levels", "ci_levels", "Confidence levels, comma separated");
    add(app, "--workers", "workers", "Worker threads");
    add(app, "--dump-similarity", "dump_similarity", "Write window similarity matrices: true or false");
    add(app, "--dump-correlations", "dump_correlations", "Write every window's correlation matrix: true or false");
    add(app, "--dump-graphs", "dump_graphs", "Write every window's filtered graph: true or false");
    app->add_option("--set", raw_sets, "Any config key as key=value (repeatable)");
  }

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  // defaults < config file < environment (output dir only) < flags.
  int resolve(ConfigPtr& cfg) {
    cp_config* raw = nullptr;
    cp_status s = cp_config_new(&raw);
    if (s != CP_OK) return report_failure(s, "configuration");
    cfg.reset(raw);
    if (!config_file.empty()) {
      s = cp_config_load_file(raw, config_file.c_str());
      if (s != CP_OK) return report_failure(s, "configuration");
    }
    if (const char* env = std::getenv("CORRPERSIST_OUTPUT_DIR"); env && *env) {
      s = cp_config_set(raw, "output_dir", env);
      if (s != CP_OK) return report_failure(s, "configuration");
    }
    for (const auto& [key, value] : values) {
      s = cp_config_set(raw, key.c_str(), value.c_str());
      if (s != CP_OK) return report_failure(s, "configuration");
    }
    for (const auto& kv : raw_sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error (configuration error): --set expects key=value, got '%s'\n", kv.c_str());
        return kConfig;
      }
      s = cp_config_set(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
      if (s != CP_OK) return report_failure(s, "configuration");
    }
    s = cp_config_validate(raw);
    if (s != CP_OK) return report_failure(s, "configuration");
    return kOk;
  }
};

int run_analysis(AnalysisFlags& flags, cp_status (*fn)(const cp_prices*, const cp_config*, cp_summary**),
                 const char* name) {
  ConfigPtr cfg;
  if (int rc = flags.resolve(cfg); rc != kOk) return rc;
  if (flags.print_config) {
    std::fputs(cp_config_render(cfg.get()), stdout);
    return kOk;
  }
  const auto input = flags.values.find("input");
  std::string path;
  if (input != flags.values.end()) {
    path = input->second;
  } else {
    // The config file may name the input.
    const std::string text = cp_config_render(cfg.get());
    const auto pos = text.find("input = ");
    if (pos != std::string::npos) path = text.substr(pos + 8, text.find('\n', pos) - pos - 8);
  }
  if (path.empty()) {
    std::fprintf(stderr, "error (configuration error): no input file (use --input or 'input' in the config)\n");
    return kConfig;
  }
  const auto format = flags.values.count("input_format") ? flags.values["input_format"] : std::string();
  cp_prices* raw = nullptr;
  cp_status s = cp_prices_load(path.c_str(), format.empty() ? nullptr : format.c_str(), &raw);
  if (s == CP_ERR_IO) s = CP_ERR_DATA;  // unreadable input is a data error
  if (s != CP_OK) return report_failure(s, "ingest");
  PricesPtr prices(raw);
  cp_summary* summary = nullptr;
  s = fn(prices.get(), cfg.get(), &summary);
  if (s != CP_OK) return report_failure(s, name);
  SummaryPtr owned(summary);
  print_summary(summary, flags.quiet);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-structure persistence and volatility forecasting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cp_version());

  std::string norm_input, norm_format = "auto", norm_output;
  auto* normalize = app.add_subcommand("normalize", "Rewrite a price file as canonical wide CSV");
  normalize->add_option("-i,--input", norm_input, "Price CSV (wide or long)")->required();
  normalize->add_option("--format", norm_format, "Input layout: auto, wide or long");
  normalize->add_option("-o,--output", norm_output, "Output CSV path")->required();

  AnalysisFlags interplay_flags, forecast_flags, temporal_flags;
  auto* interplay =
      app.add_subcommand("interplay", "Correlation of persistence with the volatility ratio over the grid");
  interplay_flags.attach(interplay);
  auto* forecast = app.add_subcommand("forecast", "Out-of-sample volatility-direction forecasts over the grid");
  forecast_flags.attach(forecast);
  auto* temporal = app.add_subcommand("temporal", "In-sample fraction of correct predictions through time");
  temporal_flags.attach(temporal);

  std::string synth_preset = "regime-switch", synth_output;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic price table");
  synth->add_option("--preset", synth_preset, "regime-switch or one-factor")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("-o,--output", synth_output, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  if (*normalize) {
    cp_prices* raw = nullptr;
    cp_status s = cp_prices_load(norm_input.c_str(), norm_format.c_str(), &raw);
    if (s == CP_ERR_IO) s = CP_ERR_DATA;
    if (s != CP_OK) return report_failure(s, "ingest");
    PricesPtr prices(raw);
    cp_summary* summary = nullptr;
    s = cp_prices_write_csv(prices.get(), norm_output.c_str(), &summary);
    if (s != CP_OK) return report_failure(s, "normalize");
    SummaryPtr owned(summary);
    print_summary(summary, false);
    return kOk;
  }
  if (*synth) {
    cp_prices* raw = nullptr;
    cp_status s = cp_prices_synth(synth_preset.c_str(), synth_seed, &raw);
    if (s != CP_OK) return report_failure(s, "synth");
    PricesPtr prices(raw);
    cp_summary* summary = nullptr;
    s = cp_prices_write_csv(prices.get(), synth_output.c_str(), &summary);
    if (s != CP_OK) return report_failure(s, "synth");
    SummaryPtr owned(summary);
    print_summary(summary, false);
    return kOk;
  }
  if (*interplay) return run_analysis(interplay_flags, &cp_run_interplay, "interplay");
  if (*forecast) return run_analysis(forecast_flags, &cp_run_forecast, "forecast");
  if (*temporal) return run_analysis(temporal_flags, &cp_run_temporal, "temporal");
  return kOther;
}
