#include "escells/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace escells {

std::string tool_version() { return "0.1.0"; }

InputError::InputError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '\n')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '\n')) --b;
  std::string out(s.substr(a, b - a));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cur.push_back(c);
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

Json double_array(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
  return a;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const Json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

Json vectors_json(std::span<const Vector> vs) {
  Json a = Json::array();
  for (const Vector& v : vs) a.push_back(vector_json(v));
  return a;
}

Json band_json(const Band& b) { return Json{{"lower", double_array(b.lower)}, {"upper", double_array(b.upper)}}; }

Json component_json(const ComponentForecast& c) {
  return Json{{"mean", double_array(c.mean)}, {"band", band_json(c.band)}};
}

std::string loss_name(DataLoss l) { return l == DataLoss::Absolute ? "absolute" : "squared"; }
DataLoss loss_from(const std::string& s) {
  if (s == "absolute") return DataLoss::Absolute;
  if (s == "squared") return DataLoss::Squared;
  throw InputError("unknown loss '" + s + "'");
}
std::string init_name(Initialization i) { return i == Initialization::Zero ? "zero" : "local_fit"; }
Initialization init_from(const std::string& s) {
  if (s == "zero") return Initialization::Zero;
  if (s == "local_fit") return Initialization::LocalFit;
  throw InputError("unknown initialization '" + s + "'");
}

Json stats_json(const SolverStats& s) {
  Json j{{"status", to_string(s.status)},
         {"converged", s.converged()},
         {"iterations", s.iterations},
         {"optimality_residual", s.residual},
         {"objective", s.objective},
         {"primal_residual", s.primal_residual},
         {"dual_residual", s.dual_residual},
         {"final_rho", s.final_rho},
         {"refactorizations", s.refactorizations},
         {"polished", s.polished}};
  Json trace = Json::array();
  for (const auto& [it, v] : s.objective_trace) trace.push_back(Json::array({it, v}));
  j["objective_trace"] = trace;
  Json rtrace = Json::array();
  for (const auto& [it, v] : s.residual_trace) rtrace.push_back(Json::array({it, v}));
  j["residual_trace"] = rtrace;
  return j;
}

SolverStats stats_from(const Json& j) {
  SolverStats s;
  s.status = j.at("status").get<std::string>() == "converged" ? SolverStatus::Converged : SolverStatus::MaxIterations;
  s.iterations = j.at("iterations").get<int>();
  s.residual = j.at("optimality_residual").get<double>();
  s.objective = j.at("objective").get<double>();
  s.primal_residual = j.value("primal_residual", 0.0);
  s.dual_residual = j.value("dual_residual", 0.0);
  s.final_rho = j.value("final_rho", 0.0);
  s.refactorizations = j.value("refactorizations", 0);
  s.polished = j.value("polished", false);
  for (const Json& e : j.value("objective_trace", Json::array())) s.objective_trace.emplace_back(e[0].get<int>(), e[1].get<double>());
  for (const Json& e : j.value("residual_trace", Json::array())) s.residual_trace.emplace_back(e[0].get<int>(), e[1].get<double>());
  return s;
}

std::string csv_header(const RunManifest& m, const std::string& columns) {
  return manifest_comment(m) + "\n" + columns + "\n";
}

}  // namespace

LoadedSeries parse_csv(std::istream& in, const CsvColumns& columns) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw InputError("missing header", lineno);
  const auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("malformed header: no column named '" + name + "'", lineno);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ts_col = col(columns.timestamp);
  const std::size_t val_col = col(columns.value);
  const std::size_t header_line = lineno;

  LoadedSeries out;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size())
      throw InputError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()), lineno);
    const std::string& stamp = fields[ts_col];
    if (stamp.empty()) throw InputError("empty timestamp", lineno);
    out.timestamps.push_back(stamp);
    lines.push_back(lineno);
    const std::optional<double> v = parse_number(fields[val_col]);
    values.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
    mask.push_back(v ? 1 : 0);
  }
  if (values.empty()) throw InputError("no data rows after the header", header_line);

  bool numeric = true;
  std::vector<double> stamps;
  for (const std::string& s : out.timestamps) {
    const std::optional<double> v = parse_number(s);
    if (!v) { numeric = false; break; }
    stamps.push_back(*v);
  }
  for (std::size_t i = 1; i < out.timestamps.size(); ++i) {
    const bool equal = numeric ? stamps[i] == stamps[i - 1] : out.timestamps[i] == out.timestamps[i - 1];
    const bool back = numeric ? stamps[i] < stamps[i - 1] : out.timestamps[i] < out.timestamps[i - 1];
    if (equal)
      throw InputError("duplicate timestamp '" + out.timestamps[i] + "' (also on line " + std::to_string(lines[i - 1]) + ")", lines[i]);
    if (back)
      throw InputError("timestamp '" + out.timestamps[i] + "' is earlier than '" + out.timestamps[i - 1] + "' on line " +
                           std::to_string(lines[i - 1]),
                       lines[i]);
  }
  out.series = TimeSeries(std::move(values), std::move(mask));
  return out;
}

LoadedSeries load_csv(const std::filesystem::path& path, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return parse_csv(in, columns);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const TimeSeries& ts, const std::vector<std::string>& timestamps, const std::string& comment) {
  if (!timestamps.empty() && timestamps.size() != ts.size())
    throw std::invalid_argument("format_csv: timestamp count differs from series length");
  std::string out;
  if (!comment.empty()) out += comment + "\n";
  out += "timestamp,value\n";
  for (std::size_t t = 0; t < ts.size(); ++t) {
    out += timestamps.empty() ? std::to_string(t) : timestamps[t];
    out += ',';
    if (ts.observed(static_cast<std::ptrdiff_t>(t))) out += format_double(ts.value(t));
    out += '\n';
  }
  return out;
}

void save_csv(const std::filesystem::path& path, const TimeSeries& ts, const std::vector<std::string>& timestamps,
              const std::string& comment) {
  write_atomic(path, format_csv(ts, timestamps, comment));
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move result into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json RunManifest::to_json() const {
  return Json{{"tool", tool}, {"version", version}, {"command", command}, {"config", config}, {"inputs", inputs}};
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  m.tool = j.at("tool").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.inputs = j.value("inputs", Json::object());
  return m;
}

std::string manifest_comment(const RunManifest& m) { return "# manifest " + m.to_json().dump(); }

Json fit_options_to_json(const FitOptions& o) {
  const SolverConfig& s = o.solver;
  return Json{{"period", o.period},
              {"half_width", o.resolved_half_width()},
              {"decay", o.decay},
              {"lambda1", o.lambda1},
              {"lambda2", o.lambda2},
              {"loss", loss_name(o.loss)},
              {"pool_trim", o.resolved_trim()},
              {"solver",
               {{"max_iterations", s.max_iterations},
                {"tolerance", s.tolerance},
                {"rho", s.rho},
                {"relaxation", s.relaxation},
                {"check_interval", s.check_interval},
                {"adapt_interval", s.adapt_interval},
                {"adapt_until", s.adapt_until},
                {"splitting_gate", s.splitting_gate},
                {"full_check_interval", s.full_check_interval},
                {"polish_iterations", s.polish_iterations},
                {"kink_tolerance", s.kink_tolerance},
                {"trace_stride", s.trace_stride},
                {"init", init_name(s.init)},
                {"seed", s.seed}}}};
}

FitOptions fit_options_from_json(const Json& j) {
  FitOptions o;
  o.period = j.at("period").get<int>();
  if (j.contains("half_width")) o.half_width = j.at("half_width").get<int>();
  o.decay = j.value("decay", o.decay);
  o.lambda1 = j.value("lambda1", o.lambda1);
  o.lambda2 = j.value("lambda2", o.lambda2);
  if (j.contains("loss")) o.loss = loss_from(j.at("loss").get<std::string>());
  if (j.contains("pool_trim")) o.pool_trim = j.at("pool_trim").get<int>();
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    SolverConfig& c = o.solver;
    c.max_iterations = s.value("max_iterations", c.max_iterations);
    c.tolerance = s.value("tolerance", c.tolerance);
    c.rho = s.value("rho", c.rho);
    c.relaxation = s.value("relaxation", c.relaxation);
    c.check_interval = s.value("check_interval", c.check_interval);
    c.adapt_interval = s.value("adapt_interval", c.adapt_interval);
    c.adapt_until = s.value("adapt_until", c.adapt_until);
    c.splitting_gate = s.value("splitting_gate", c.splitting_gate);
    c.full_check_interval = s.value("full_check_interval", c.full_check_interval);
    c.polish_iterations = s.value("polish_iterations", c.polish_iterations);
    c.kink_tolerance = s.value("kink_tolerance", c.kink_tolerance);
    c.trace_stride = s.value("trace_stride", c.trace_stride);
    if (s.contains("init")) c.init = init_from(s.at("init").get<std::string>());
    c.seed = s.value("seed", c.seed);
  }
  return o;
}

Json synth_config_to_json(const SynthConfig& c) {
  Json shifts = Json::array();
  for (const Shift& s : c.shifts) shifts.push_back({{"time", s.time}, {"level_delta", s.level_delta}, {"trend_delta", s.trend_delta}});
  Json segments = Json::array();
  for (const NoiseSegment& s : c.noise_segments) segments.push_back({{"start", s.start}, {"sigma", s.sigma}});
  return Json{{"length", c.length},
              {"period", c.period},
              {"base_level", c.base_level},
              {"base_trend", c.base_trend},
              {"shifts", shifts},
              {"seasonal_amplitude", c.seasonal_amplitude},
              {"noise_sigma", c.noise_sigma},
              {"noise_modulation", c.noise_modulation},
              {"noise_cycle", c.noise_cycle},
              {"noise_segments", segments},
              {"outlier_fraction", c.outlier_fraction},
              {"outlier_scale", c.outlier_scale},
              {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("synth config must be a JSON object");
  static const std::vector<std::string> known{"length", "period", "base_level", "base_trend", "shifts",
                                               "seasonal_amplitude", "noise_sigma", "noise_modulation",
                                               "noise_cycle", "noise_segments", "outlier_fraction",
                                               "outlier_scale", "seed"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw InputError("unknown synth config key '" + key + "'");
  SynthConfig c;
  try {
    c.length = j.value("length", c.length);
    c.period = j.value("period", c.period);
    c.base_level = j.value("base_level", c.base_level);
    c.base_trend = j.value("base_trend", c.base_trend);
    for (const Json& s : j.value("shifts", Json::array()))
      c.shifts.push_back(Shift{s.at("time").get<std::size_t>(), s.value("level_delta", 0.0), s.value("trend_delta", 0.0)});
    c.seasonal_amplitude = j.value("seasonal_amplitude", c.seasonal_amplitude);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.noise_modulation = j.value("noise_modulation", c.noise_modulation);
    c.noise_cycle = j.value("noise_cycle", c.noise_cycle);
    for (const Json& s : j.value("noise_segments", Json::array()))
      c.noise_segments.push_back(NoiseSegment{s.at("start").get<std::size_t>(), s.at("sigma").get<double>()});
    c.outlier_fraction = j.value("outlier_fraction", c.outlier_fraction);
    c.outlier_scale = j.value("outlier_scale", c.outlier_scale);
    c.seed = j.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw InputError(std::string("synth config: ") + e.what());
  }
  return c;
}

Json series_to_json(const TimeSeries& ts) { return double_array(ts.values()); }

TimeSeries series_from_json(const Json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const Json& e : j) v.push_back(e.is_null() ? std::numeric_limits<double>::quiet_NaN() : e.get<double>());
  return TimeSeries(std::move(v));
}

Json fit_to_json(const FitResult& fit, const RunManifest& manifest, const std::vector<std::string>& timestamps) {
  Json j;
  j["manifest"] = manifest.to_json();
  j["kind"] = "fit";
  j["options"] = fit_options_to_json(fit.options);
  j["series"] = series_to_json(fit.series);
  if (!timestamps.empty()) j["timestamps"] = timestamps;
  j["raw_states"] = {{"first_index", fit.raw.first_index}, {"states", vectors_json(fit.raw.states)}};
  j["decomposition"] = {{"level", double_array(fit.decomposition.level)},
                        {"trend", double_array(fit.decomposition.trend)},
                        {"seasonal", double_array(fit.decomposition.seasonal)}};
  j["residuals"] = {{"times", fit.residuals.times}, {"values", double_array(fit.residuals.values)}};
  j["increments"] = vectors_json(fit.increments);
  j["pools"] = {{"trim", fit.options.resolved_trim()},
                {"residuals", double_array(fit.pools.residuals)},
                {"increments", vectors_json(fit.pools.increments)}};
  j["stats"] = stats_json(fit.stats);
  return j;
}

FitResult fit_from_json(const Json& j) {
  try {
    if (j.value("kind", std::string()) != "fit") throw InputError("not a fit document");
    const FitOptions options = fit_options_from_json(j.at("options"));
    const TimeSeries series = series_from_json(j.at("series"));
    StateSequence raw;
    raw.first_index = j.at("raw_states").at("first_index").get<int>();
    for (const Json& s : j.at("raw_states").at("states")) raw.states.push_back(vector_from(s));
    if (raw.states.size() != series.size()) throw InputError("fit document: state count differs from series length");
    for (const Vector& s : raw.states)
      if (s.size() != options.period + 2) throw InputError("fit document: state dimension differs from period + 2");
    return finish_fit(series, options, std::move(raw), stats_from(j.at("stats")));
  } catch (const Json::exception& e) {
    throw InputError(std::string("fit document: ") + e.what());
  }
}

std::vector<std::string> timestamps_from_json(const Json& j) {
  if (!j.contains("timestamps")) return {};
  return j.at("timestamps").get<std::vector<std::string>>();
}

Json forecast_to_json(const ForecastResult& f, const RunManifest& manifest) {
  return Json{{"manifest", manifest.to_json()},
              {"kind", "forecast"},
              {"horizon", f.horizon},
              {"n_paths", f.n_paths},
              {"seed", f.seed},
              {"level", f.level},
              {"mean", double_array(f.mean)},
              {"inner", band_json(f.inner)},
              {"outer", band_json(f.outer)},
              {"components",
               {{"level", component_json(f.level_component)},
                {"trend", component_json(f.trend_component)},
                {"seasonal", component_json(f.seasonal_component)}}}};
}

Json anomalies_to_json(const AnomalyReport& r, const ResidualSeries& residuals, const RunManifest& manifest) {
  Json values = Json::array();
  for (std::size_t t : r.indices) {
    const auto it = std::find(residuals.times.begin(), residuals.times.end(), t);
    values.push_back(it == residuals.times.end() ? Json(nullptr)
                                                 : Json(residuals.values[static_cast<std::size_t>(it - residuals.times.begin())]));
  }
  return Json{{"manifest", manifest.to_json()}, {"kind", "anomalies"}, {"fraction", r.fraction},
              {"median", r.median},           {"low", r.low},             {"high", r.high},
              {"indices", r.indices},         {"residuals", values},      {"pool_size", residuals.size()}};
}

Json benchmark_to_json(const BenchmarkTable& t, const RunManifest& manifest) {
  Json methods = Json::array();
  for (const MethodScore& m : t.methods) {
    Json e{{"name", m.name},
           {"forecast", double_array(m.forecast)},
           {"mape", {{"positions", m.mape.positions}, {"values", double_array(m.mape.values)}, {"skipped", m.mape.skipped}}},
           {"median_mape", m.median_mape},
           {"mean_mape", m.mean_mape}};
    if (m.status) e["solver_status"] = to_string(*m.status);
    methods.push_back(e);
  }
  Json ratios = Json::array();
  for (const RatioSummary& r : t.ratios)
    ratios.push_back({{"method", r.name}, {"median_ratio", r.median_ratio}, {"dominance_fraction", r.dominance_fraction},
                      {"positions", r.positions}});
  return Json{{"manifest", manifest.to_json()}, {"kind", "benchmark"}, {"split", t.split}, {"horizon", t.horizon},
              {"window", t.window}, {"actual", double_array(t.actual)}, {"methods", methods}, {"ratios", ratios}};
}

Json synth_to_json(const SynthData& d, const SynthConfig& c, const RunManifest& manifest) {
  return Json{{"manifest", manifest.to_json()},
              {"kind", "synth"},
              {"config", synth_config_to_json(c)},
              {"series", series_to_json(d.series)},
              {"truth",
               {{"level", double_array(d.truth.level)},
                {"trend", double_array(d.truth.trend)},
                {"seasonal", double_array(d.truth.seasonal)},
                {"signal", double_array(d.signal)},
                {"noise", double_array(d.noise)},
                {"outliers", double_array(d.outliers)}}},
              {"outlier_indices", d.outlier_indices}};
}

std::string decomposition_csv(const Decomposition& d, const RunManifest& m) {
  std::string out = csv_header(m, "t,level,trend,seasonal");
  for (std::size_t t = 0; t < d.level.size(); ++t)
    out += std::to_string(t) + ',' + format_double(d.level[t]) + ',' + format_double(d.trend[t]) + ',' +
           format_double(d.seasonal[t]) + '\n';
  return out;
}

std::string residuals_csv(const ResidualSeries& r, const RunManifest& m) {
  std::string out = csv_header(m, "t,residual");
  for (std::size_t i = 0; i < r.size(); ++i) out += std::to_string(r.times[i]) + ',' + format_double(r.values[i]) + '\n';
  return out;
}

std::string increments_csv(const std::vector<Vector>& g, const RunManifest& m) {
  std::string cols = "t";
  const Eigen::Index n = g.empty() ? 0 : g.front().size();
  for (Eigen::Index k = 0; k < n; ++k) cols += ",g" + std::to_string(k);
  std::string out = csv_header(m, cols);
  for (std::size_t t = 0; t < g.size(); ++t) {
    out += std::to_string(t + 1);
    for (Eigen::Index k = 0; k < n; ++k) out += ',' + format_double(g[t](k));
    out += '\n';
  }
  return out;
}

std::string bands_csv(const ForecastResult& f, const RunManifest& m) {
  std::string out = csv_header(m, "horizon,mean,inner_lo,inner_hi,outer_lo,outer_hi");
  for (int h = 0; h < f.horizon; ++h) {
    const std::size_t i = static_cast<std::size_t>(h);
    out += std::to_string(h + 1) + ',' + format_double(f.mean[i]) + ',' + format_double(f.inner.lower[i]) + ',' +
           format_double(f.inner.upper[i]) + ',' + format_double(f.outer.lower[i]) + ',' + format_double(f.outer.upper[i]) + '\n';
  }
  return out;
}

std::string anomalies_csv(const AnomalyReport& r, const ResidualSeries& residuals, const RunManifest& m) {
  std::string out = csv_header(m, "t,residual");
  for (std::size_t t : r.indices) {
    const auto it = std::find(residuals.times.begin(), residuals.times.end(), t);
    out += std::to_string(t) + ',';
    if (it != residuals.times.end()) out += format_double(residuals.values[static_cast<std::size_t>(it - residuals.times.begin())]);
    out += '\n';
  }
  return out;
}

std::string mape_csv(const BenchmarkTable& t, const RunManifest& m) {
  std::string cols = "position";
  for (const MethodScore& s : t.methods) cols += ',' + s.name;
  std::string out = csv_header(m, cols);
  if (t.methods.empty()) return out;
  const MapeSeries& first = t.methods.front().mape;
  for (std::size_t i = 0; i < first.positions.size(); ++i) {
    out += std::to_string(t.split + first.positions[i]);
    for (const MethodScore& s : t.methods) out += ',' + format_double(s.mape.values[i]);
    out += '\n';
  }
  return out;
}

std::string truth_csv(const SynthData& d, const RunManifest& m) {
  std::string out = csv_header(m, "t,value,level,trend,seasonal,signal,noise,outlier");
  for (std::size_t t = 0; t < d.series.size(); ++t) {
    out += std::to_string(t) + ',';
    if (d.series.observed(static_cast<std::ptrdiff_t>(t))) out += format_double(d.series.value(t));
    out += ',' + format_double(d.truth.level[t]) + ',' + format_double(d.truth.trend[t]) + ',' +
           format_double(d.truth.seasonal[t]) + ',' + format_double(d.signal[t]) + ',' + format_double(d.noise[t]) + ',' +
           format_double(d.outliers[t]) + '\n';
  }
  return out;
}

std::filesystem::path companion_path(const std::filesystem::path& base, const std::string& suffix) {
  std::filesystem::path p = base;
  p.replace_extension();
  return std::filesystem::path(p.string() + suffix);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace escells
