// Command-line front end: fit, forecast, detect, impute, synth, bench, replay.

#include "escells/benchmark.hpp"
#include "escells/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace escells;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

struct FitCmd {
  std::string input;
  int period = 0;
  std::optional<int> window;
  double decay = 0.9;
  double lambda1 = 1.0;
  double lambda2 = 10.0;
  std::string loss = "absolute";
  int max_iterations = SolverConfig{}.max_iterations;
  double tolerance = SolverConfig{}.tolerance;
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  std::string output;

  Json to_json() const {
    Json j{{"input", input},       {"period", period},   {"decay", decay},
           {"lambda1", lambda1},   {"lambda2", lambda2}, {"loss", loss},
           {"max_iterations", max_iterations}, {"tolerance", tolerance},
           {"timestamp_column", timestamp_column}, {"value_column", value_column}};
    j["window"] = window ? Json(*window) : Json(nullptr);
    return j;
  }
  static FitCmd from_json(const Json& j) {
    FitCmd c;
    c.input = j.at("input").get<std::string>();
    c.period = j.at("period").get<int>();
    if (!j.at("window").is_null()) c.window = j.at("window").get<int>();
    c.decay = j.at("decay").get<double>();
    c.lambda1 = j.at("lambda1").get<double>();
    c.lambda2 = j.at("lambda2").get<double>();
    c.loss = j.at("loss").get<std::string>();
    c.max_iterations = j.at("max_iterations").get<int>();
    c.tolerance = j.at("tolerance").get<double>();
    c.timestamp_column = j.at("timestamp_column").get<std::string>();
    c.value_column = j.at("value_column").get<std::string>();
    return c;
  }
};

struct ForecastCmd {
  std::string fit;
  int horizon = 0;
  int paths = 10000;
  double level = 0.99;
  std::uint64_t seed = 0;
  std::string residuals = "empirical";
  int threads = 1;
  std::string output;

  Json to_json() const {
    return Json{{"fit", fit},   {"horizon", horizon},     {"paths", paths},    {"level", level},
                {"seed", seed}, {"residuals", residuals}, {"threads", threads}};
  }
  static ForecastCmd from_json(const Json& j) {
    ForecastCmd c;
    c.fit = j.at("fit").get<std::string>();
    c.horizon = j.at("horizon").get<int>();
    c.paths = j.at("paths").get<int>();
    c.level = j.at("level").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.residuals = j.at("residuals").get<std::string>();
    c.threads = j.at("threads").get<int>();
    return c;
  }
};

struct DetectCmd {
  std::string fit;
  double fraction = 0.015;
  std::string output;
  Json to_json() const { return Json{{"fit", fit}, {"fraction", fraction}}; }
  static DetectCmd from_json(const Json& j) {
    return DetectCmd{j.at("fit").get<std::string>(), j.at("fraction").get<double>(), {}};
  }
};

struct ImputeCmd {
  std::string fit;
  std::string output;
  Json to_json() const { return Json{{"fit", fit}}; }
  static ImputeCmd from_json(const Json& j) {
    return ImputeCmd{j.at("fit").get<std::string>(), {}};
  }
};

struct SynthCmd {
  std::string preset;
  std::string config;
  std::string output;
  Json to_json() const { return Json{{"preset", preset}, {"config", config}}; }
  static SynthCmd from_json(const Json& j) {
    return SynthCmd{j.at("preset").get<std::string>(), j.at("config").get<std::string>(), {}};
  }
};

struct BenchCmd {
  std::string methods = "hw,rhw,escells";
  std::size_t split = 800;
  int horizon = 200;
  int window = 10;
  std::string input;
  int period = 12;
  std::string preset;
  std::string config;
  std::optional<int> cell_half_width;  // default 4 periods
  double lambda1 = 1.0;
  double lambda2 = 1000.0;
  bool hw_fit = false;
  int threads = 1;
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  std::string output = "bench.json";

  Json to_json() const {
    Json j{{"methods", methods}, {"split", split},   {"horizon", horizon}, {"window", window},
           {"input", input},     {"period", period}, {"preset", preset},   {"config", config},
           {"lambda1", lambda1}, {"lambda2", lambda2}, {"hw_fit", hw_fit}, {"threads", threads},
           {"timestamp_column", timestamp_column}, {"value_column", value_column}};
    j["cell_half_width"] = cell_half_width ? Json(*cell_half_width) : Json(nullptr);
    return j;
  }
  static BenchCmd from_json(const Json& j) {
    BenchCmd c;
    c.methods = j.at("methods").get<std::string>();
    c.split = j.at("split").get<std::size_t>();
    c.horizon = j.at("horizon").get<int>();
    c.window = j.at("window").get<int>();
    c.input = j.at("input").get<std::string>();
    c.period = j.at("period").get<int>();
    c.preset = j.at("preset").get<std::string>();
    c.config = j.at("config").get<std::string>();
    if (!j.at("cell_half_width").is_null()) c.cell_half_width = j.at("cell_half_width").get<int>();
    c.lambda1 = j.at("lambda1").get<double>();
    c.lambda2 = j.at("lambda2").get<double>();
    c.hw_fit = j.at("hw_fit").get<bool>();
    c.threads = j.at("threads").get<int>();
    c.timestamp_column = j.at("timestamp_column").get<std::string>();
    c.value_column = j.at("value_column").get<std::string>();
    return c;
  }
};

Json input_record(const std::string& path) {
  return Json{{"path", path}, {"digest", content_digest(read_file(path))}};
}

/// Replays must see the same inputs the original run saw.
void verify_inputs(const RunManifest& m) {
  for (const auto& [name, rec] : m.inputs.items()) {
    const std::string path = rec.at("path").get<std::string>();
    const std::string digest = content_digest(read_file(path));
    if (digest != rec.at("digest").get<std::string>())
      throw InputError("input '" + name + "' (" + path + ") changed since the manifest was written");
  }
}

Json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

std::string default_output(const std::string& base, const std::string& suffix) {
  return companion_path(base, suffix).string();
}

int run_fit(const FitCmd& c) {
  if (c.period < 2) throw InputError("--period must be at least 2");
  const LoadedSeries loaded = load_csv(c.input, CsvColumns{c.timestamp_column, c.value_column});
  FitOptions o;
  o.period = c.period;
  o.half_width = c.window;
  o.decay = c.decay;
  o.lambda1 = c.lambda1;
  o.lambda2 = c.lambda2;
  o.loss = c.loss == "squared" ? DataLoss::Squared : DataLoss::Absolute;
  if (c.loss != "squared" && c.loss != "absolute") throw InputError("--loss must be absolute or squared");
  o.solver.max_iterations = c.max_iterations;
  o.solver.tolerance = c.tolerance;

  RunManifest m;
  m.command = "fit";
  m.config = c.to_json();
  m.config["fit_options"] = fit_options_to_json(o);
  m.inputs["series"] = input_record(c.input);

  const FitResult fit = fit_escells(loaded.series, o);
  write_atomic(c.output, dump(fit_to_json(fit, m, loaded.timestamps)));
  write_atomic(companion_path(c.output, ".decomposition.csv"), decomposition_csv(fit.decomposition, m));
  write_atomic(companion_path(c.output, ".residuals.csv"), residuals_csv(fit.residuals, m));
  write_atomic(companion_path(c.output, ".increments.csv"), increments_csv(fit.increments, m));

  std::fprintf(stderr, "solver: %s after %d iterations, optimality residual %.3e, %.2f s\n",
               to_string(fit.stats.status).c_str(), fit.stats.iterations, fit.stats.residual, fit.stats.wall_time_s);
  std::printf("fit: %zu points (%zu observed), period %d, K %d -> %s\n", fit.series.size(),
              fit.series.observed_count(), o.period, o.resolved_half_width(), c.output.c_str());
  if (!fit.stats.converged()) {
    std::fprintf(stderr, "warning: solver did not converge; results written with status max_iterations\n");
    return kNotConverged;
  }
  return kOk;
}

int run_forecast(const ForecastCmd& c) {
  if (c.horizon < 1) throw InputError("--horizon must be at least 1");
  if (c.paths < 1) throw InputError("--paths must be at least 1");
  if (!(c.level > 0.0 && c.level < 1.0)) throw InputError("--level must lie in (0, 1)");
  if (c.residuals != "empirical" && c.residuals != "gaussian") throw InputError("--residuals must be empirical or gaussian");
  const FitResult fit = fit_from_json(load_json(c.fit));
  RunManifest m;
  m.command = "forecast";
  m.config = c.to_json();
  m.inputs["fit"] = input_record(c.fit);
  SimulationOptions so;
  so.threads = std::max(1, c.threads);
  so.residual_source = c.residuals == "gaussian" ? ResidualSource::Gaussian : ResidualSource::Empirical;
  const ForecastResult f = forecast(fit.structure, fit.centered.states.back(), fit.pools, c.horizon, c.paths, c.seed, c.level, so);
  write_atomic(c.output, dump(forecast_to_json(f, m)));
  write_atomic(companion_path(c.output, ".bands.csv"), bands_csv(f, m));
  std::printf("forecast: horizon %d, %d paths, level %.3g -> %s\n", c.horizon, c.paths, c.level, c.output.c_str());
  return fit.stats.converged() ? kOk : kNotConverged;
}

int run_detect(const DetectCmd& c) {
  if (!(c.fraction > 0.0 && c.fraction < 0.5)) throw InputError("--fraction must lie in (0, 0.5)");
  const FitResult fit = fit_from_json(load_json(c.fit));
  RunManifest m;
  m.command = "detect";
  m.config = c.to_json();
  m.inputs["fit"] = input_record(c.fit);
  const AnomalyReport r = detect_anomalies(fit.residuals, c.fraction);
  write_atomic(c.output, dump(anomalies_to_json(r, fit.residuals, m)));
  write_atomic(companion_path(c.output, ".csv"), anomalies_csv(r, fit.residuals, m));
  std::printf("detect: %zu of %zu residuals flagged -> %s\n", r.indices.size(), fit.residuals.size(), c.output.c_str());
  return kOk;
}

int run_impute(const ImputeCmd& c) {
  const Json doc = load_json(c.fit);
  const FitResult fit = fit_from_json(doc);
  RunManifest m;
  m.command = "impute";
  m.config = c.to_json();
  m.inputs["fit"] = input_record(c.fit);
  const TimeSeries filled = impute(fit.series, fit.centered.states, fit.structure);
  const std::vector<std::string> stamps = timestamps_from_json(doc);
  write_atomic(c.output, format_csv(filled, stamps, manifest_comment(m)));
  Json j{{"manifest", m.to_json()}, {"kind", "imputation"}, {"series", series_to_json(filled)}};
  Json filled_at = Json::array();
  for (std::size_t t = 0; t < fit.series.size(); ++t)
    if (!fit.series.observed(static_cast<std::ptrdiff_t>(t))) filled_at.push_back(t);
  j["imputed_indices"] = filled_at;
  write_atomic(companion_path(c.output, ".json"), dump(j));
  std::printf("impute: %zu missing values filled -> %s\n", filled_at.size(), c.output.c_str());
  return kOk;
}

int run_synth(const SynthCmd& c) {
  if (c.preset.empty() == c.config.empty()) throw InputError("give exactly one of --preset or --config");
  RunManifest m;
  m.command = "synth";
  SynthConfig cfg;
  if (!c.preset.empty()) {
    try {
      cfg = preset(c.preset);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  } else {
    cfg = synth_config_from_json(load_json(c.config));
    m.inputs["config"] = input_record(c.config);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  m.config = c.to_json();
  m.config["synth_config"] = synth_config_to_json(cfg);
  const SynthData d = synth_generate(cfg);
  write_atomic(c.output, dump(synth_to_json(d, cfg, m)));
  save_csv(companion_path(c.output, ".csv"), d.series, {}, manifest_comment(m));
  write_atomic(companion_path(c.output, ".truth.csv"), truth_csv(d, m));
  std::printf("synth: %zu points, %zu outliers -> %s\n", d.series.size(), d.outlier_indices.size(), c.output.c_str());
  return kOk;
}

int run_bench(const BenchCmd& c) {
  const int sources = (!c.input.empty()) + (!c.preset.empty()) + (!c.config.empty());
  if (sources > 1) throw InputError("give at most one of --input, --preset, --config");
  RunManifest m;
  m.command = "bench";
  TimeSeries ts;
  int period = c.period;
  if (!c.input.empty()) {
    ts = load_csv(c.input, CsvColumns{c.timestamp_column, c.value_column}).series;
    m.inputs["series"] = input_record(c.input);
  } else {
    SynthConfig cfg;
    if (!c.config.empty()) {
      cfg = synth_config_from_json(load_json(c.config));
      m.inputs["config"] = input_record(c.config);
    } else {
      try {
        cfg = preset(c.preset.empty() ? "fig1" : c.preset);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
    }
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    ts = synth_generate(cfg).series;
    period = cfg.period;
    m.config["synth_config"] = synth_config_to_json(cfg);
  }
  if (period < 2) throw InputError("--period must be at least 2");

  BenchmarkOptions o;
  try {
    o.methods = parse_methods(c.methods);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  o.split = c.split;
  o.horizon = c.horizon;
  o.window = c.window;
  o.escells.period = period;
  o.escells.half_width = c.cell_half_width.value_or(4 * period);
  o.escells.lambda1 = c.lambda1;
  o.escells.lambda2 = c.lambda2;
  o.hw.fit = c.hw_fit;
  o.threads = std::max(1, c.threads);
  const Json cfg_json = c.to_json();
  for (const auto& [k, v] : cfg_json.items()) m.config[k] = v;
  m.config["fit_options"] = fit_options_to_json(o.escells);

  const BenchmarkTable t = run_benchmark(ts, o);
  write_atomic(c.output, dump(benchmark_to_json(t, m)));
  write_atomic(companion_path(c.output, ".mape.csv"), mape_csv(t, m));
  std::printf("bench: split %zu, horizon %d, window %d\n", t.split, t.horizon, t.window);
  for (const MethodScore& s : t.methods) std::printf("  %-8s median MAPE %8.3f  mean MAPE %8.3f\n", s.name.c_str(), s.median_mape, s.mean_mape);
  for (const RatioSummary& r : t.ratios)
    std::printf("  %s / escells: median ratio %.3f, escells <= %s at %.1f%% of %zu positions\n", r.name.c_str(), r.median_ratio,
                r.name.c_str(), 100.0 * r.dominance_fraction, r.positions);
  std::fprintf(stderr, "bench: %.2f s\n", t.wall_time_s);
  const MethodScore* es = t.find("escells");
  if (es && es->status && *es->status != SolverStatus::Converged) return kNotConverged;
  return kOk;
}

RunManifest manifest_from_file(const std::string& path) {
  const std::string text = read_file(path);
  const std::string tag = "# manifest ";
  try {
    if (text.rfind(tag, 0) == 0) {
      const std::size_t end = text.find('\n');
      return RunManifest::from_json(Json::parse(text.substr(tag.size(), end - tag.size())));
    }
    return RunManifest::from_json(Json::parse(text).at("manifest"));
  } catch (const Json::exception& e) {
    throw InputError(path + ": no readable manifest: " + e.what());
  }
}

int run_replay(const std::string& manifest_path, const std::string& output) {
  const RunManifest m = manifest_from_file(manifest_path);
  if (m.tool != "escells") throw InputError("manifest was not written by escells");
  if (m.version != tool_version())
    std::fprintf(stderr, "warning: manifest written by version %s, replaying with %s\n", m.version.c_str(), tool_version().c_str());
  verify_inputs(m);
  const Json& cfg = m.config;
  const auto with_output = [&](auto cmd) {
    cmd.output = output;
    return cmd;
  };
  try {
    if (m.command == "fit") return run_fit(with_output(FitCmd::from_json(cfg)));
    if (m.command == "forecast") return run_forecast(with_output(ForecastCmd::from_json(cfg)));
    if (m.command == "detect") return run_detect(with_output(DetectCmd::from_json(cfg)));
    if (m.command == "impute") return run_impute(with_output(ImputeCmd::from_json(cfg)));
    if (m.command == "synth") return run_synth(with_output(SynthCmd::from_json(cfg)));
    if (m.command == "bench") return run_bench(with_output(BenchCmd::from_json(cfg)));
  } catch (const Json::exception& e) {
    throw InputError(std::string("manifest config: ") + e.what());
  }
  throw InputError("manifest names unknown command '" + m.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust exponential smoothing with linked local cells"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  FitCmd fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the model to a CSV series");
  fit_cmd->add_option("--input", fit.input, "CSV with timestamp,value columns")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--period", fit.period, "Season length p")->required();
  fit_cmd->add_option("--window", fit.window, "Cell half-width K (default p)");
  fit_cmd->add_option("--decay", fit.decay, "Window weight decay in (0, 1)");
  fit_cmd->add_option("--lambda1", fit.lambda1, "Seasonal total-variation weight");
  fit_cmd->add_option("--lambda2", fit.lambda2, "Cell-linking weight");
  fit_cmd->add_option("--loss", fit.loss, "absolute or squared");
  fit_cmd->add_option("--max-iterations", fit.max_iterations);
  fit_cmd->add_option("--tolerance", fit.tolerance, "Optimality residual tolerance");
  fit_cmd->add_option("--timestamp-column", fit.timestamp_column);
  fit_cmd->add_option("--value-column", fit.value_column);
  fit_cmd->add_option("--output", fit.output, "Fit JSON path")->required();

  ForecastCmd fc;
  CLI::App* fc_cmd = app.add_subcommand("forecast", "Simulate forecast paths from a fit");
  fc_cmd->add_option("--fit", fc.fit)->required()->check(CLI::ExistingFile);
  fc_cmd->add_option("--horizon", fc.horizon)->required();
  fc_cmd->add_option("--paths", fc.paths);
  fc_cmd->add_option("--level", fc.level);
  fc_cmd->add_option("--seed", fc.seed);
  fc_cmd->add_option("--residuals", fc.residuals, "empirical or gaussian");
  fc_cmd->add_option("--threads", fc.threads);
  fc_cmd->add_option("--output", fc.output, "Default: <fit>.forecast.json");

  DetectCmd dc;
  CLI::App* dc_cmd = app.add_subcommand("detect", "Flag the most extreme residuals");
  dc_cmd->add_option("--fit", dc.fit)->required()->check(CLI::ExistingFile);
  dc_cmd->add_option("--fraction", dc.fraction);
  dc_cmd->add_option("--output", dc.output, "Default: <fit>.anomalies.json");

  ImputeCmd ic;
  CLI::App* ic_cmd = app.add_subcommand("impute", "Fill missing values from a fit");
  ic_cmd->add_option("--fit", ic.fit)->required()->check(CLI::ExistingFile);
  ic_cmd->add_option("--output", ic.output, "Default: <fit>.imputed.csv");

  SynthCmd sc;
  CLI::App* sc_cmd = app.add_subcommand("synth", "Generate a synthetic series with ground truth");
  sc_cmd->add_option("--preset", sc.preset, "Named preset (fig1)");
  sc_cmd->add_option("--config", sc.config, "JSON generator configuration")->check(CLI::ExistingFile);
  sc_cmd->add_option("--output", sc.output, "Default: synth_<preset>.json");

  BenchCmd bc;
  CLI::App* bc_cmd = app.add_subcommand("bench", "Compare forecast MAPE of hw, rhw and escells");
  bc_cmd->add_option("--methods", bc.methods);
  bc_cmd->add_option("--split", bc.split, "First held-out index");
  bc_cmd->add_option("--horizon", bc.horizon);
  bc_cmd->add_option("--window", bc.window, "MAPE window");
  bc_cmd->add_option("--input", bc.input, "CSV series (default: fig1 preset)")->check(CLI::ExistingFile);
  bc_cmd->add_option("--period", bc.period, "Season length for --input");
  bc_cmd->add_option("--preset", bc.preset);
  bc_cmd->add_option("--config", bc.config)->check(CLI::ExistingFile);
  bc_cmd->add_option("--cell-half-width", bc.cell_half_width, "ES-Cells K (default 4 periods)");
  bc_cmd->add_option("--lambda1", bc.lambda1);
  bc_cmd->add_option("--lambda2", bc.lambda2);
  bc_cmd->add_flag("--hw-fit", bc.hw_fit, "Fit HW parameters instead of the hand-tuned values");
  bc_cmd->add_option("--threads", bc.threads);
  bc_cmd->add_option("--timestamp-column", bc.timestamp_column);
  bc_cmd->add_option("--value-column", bc.value_column);
  bc_cmd->add_option("--output", bc.output);

  std::string replay_manifest, replay_output;
  CLI::App* rp_cmd = app.add_subcommand("replay", "Repeat a run from the manifest embedded in its output");
  rp_cmd->add_option("--manifest", replay_manifest)->required()->check(CLI::ExistingFile);
  rp_cmd->add_option("--output", replay_output, "Path for the reproduced output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*fc_cmd) {
      if (fc.output.empty()) fc.output = default_output(fc.fit, ".forecast.json");
      return run_forecast(fc);
    }
    if (*dc_cmd) {
      if (dc.output.empty()) dc.output = default_output(dc.fit, ".anomalies.json");
      return run_detect(dc);
    }
    if (*ic_cmd) {
      if (ic.output.empty()) ic.output = default_output(ic.fit, ".imputed.csv");
      return run_impute(ic);
    }
    if (*sc_cmd) {
      if (sc.output.empty()) sc.output = "synth_" + (sc.preset.empty() ? fs::path(sc.config).stem().string() : sc.preset) + ".json";
      return run_synth(sc);
    }
    if (*bc_cmd) return run_bench(bc);
    if (*rp_cmd) return run_replay(replay_manifest, replay_output);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
