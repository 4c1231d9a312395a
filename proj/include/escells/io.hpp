#pragma once
// CSV ingestion, result serialization and run manifests.

#include "escells/analytics.hpp"
#include "escells/benchmark.hpp"
#include "escells/fit.hpp"
#include "escells/forecast.hpp"
#include "escells/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace escells {

using Json = nlohmann::json;

std::string tool_version();

/// Malformed user input; `line` is 1-based, 0 when not tied to a line.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvColumns {
  std::string timestamp = "timestamp";
  std::string value = "value";
};

struct LoadedSeries {
  TimeSeries series;
  std::vector<std::string> timestamps;
};

/// Header-named columns; lines starting with '#' are skipped. An empty or
/// non-numeric value is missing. Timestamps must be unique and increasing:
/// numeric when every timestamp parses as a number, otherwise compared as
/// strings (ISO 8601 orders correctly).
LoadedSeries parse_csv(std::istream& in, const CsvColumns& columns = {});
LoadedSeries load_csv(const std::filesystem::path& path, const CsvColumns& columns = {});

/// `timestamp,value` with empty value fields for missing points. Without
/// timestamps the index is written. Values are printed round-trip exact.
std::string format_csv(const TimeSeries& ts, const std::vector<std::string>& timestamps = {},
                       const std::string& comment = {});
void save_csv(const std::filesystem::path& path, const TimeSeries& ts,
              const std::vector<std::string>& timestamps = {}, const std::string& comment = {});

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string content_digest(const std::string& bytes);

/// Configuration of one CLI run. `command` names the subcommand and
/// `config` holds every option needed to repeat it.
struct RunManifest {
  std::string tool = "escells";
  std::string version = tool_version();
  std::string command;
  Json config = Json::object();
  Json inputs = Json::object();  // name -> {"path", "digest"}

  Json to_json() const;
  static RunManifest from_json(const Json& j);
  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// The manifest as a single-line comment for CSV companions.
std::string manifest_comment(const RunManifest& m);

Json fit_options_to_json(const FitOptions& o);
FitOptions fit_options_from_json(const Json& j);
Json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const Json& j);

Json series_to_json(const TimeSeries& ts);
TimeSeries series_from_json(const Json& j);

/// Fit document: manifest, options, series, raw states, decomposition,
/// residuals, increments, pools and solver statistics (no timings).
Json fit_to_json(const FitResult& fit, const RunManifest& manifest,
                 const std::vector<std::string>& timestamps = {});
/// Rebuilds a fit from its options, series and raw states.
FitResult fit_from_json(const Json& j);
std::vector<std::string> timestamps_from_json(const Json& j);

Json forecast_to_json(const ForecastResult& f, const RunManifest& manifest);
Json anomalies_to_json(const AnomalyReport& r, const ResidualSeries& residuals, const RunManifest& manifest);
Json benchmark_to_json(const BenchmarkTable& t, const RunManifest& manifest);
Json synth_to_json(const SynthData& d, const SynthConfig& c, const RunManifest& manifest);

/// Flat companions for plotting tools. Each starts with the manifest comment.
/// Decomposition: t,level,trend,seasonal with one row per time point.
std::string decomposition_csv(const Decomposition& d, const RunManifest& manifest);
std::string residuals_csv(const ResidualSeries& r, const RunManifest& manifest);
std::string increments_csv(const std::vector<Vector>& g, const RunManifest& manifest);
/// horizon,mean,inner_lo,inner_hi,outer_lo,outer_hi
std::string bands_csv(const ForecastResult& f, const RunManifest& manifest);
std::string anomalies_csv(const AnomalyReport& r, const ResidualSeries& residuals, const RunManifest& manifest);
/// position,<method> per method (MAPE percent)
std::string mape_csv(const BenchmarkTable& t, const RunManifest& manifest);
std::string truth_csv(const SynthData& d, const RunManifest& manifest);

/// `base` with its extension replaced by `suffix` (e.g. ".bands.csv").
std::filesystem::path companion_path(const std::filesystem::path& base, const std::string& suffix);

/// Pretty-printed JSON text with a trailing newline.
std::string dump(const Json& j);

}  // namespace escells
