#include "escells/io.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace escells;
namespace fs = std::filesystem;

namespace {

LoadedSeries parse(const std::string& text, const CsvColumns& c = {}) {
  std::istringstream in(text);
  return parse_csv(in, c);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.line();
  }
  FAIL("expected an input error");
  return 0;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("escells_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const FitResult& small_fit() {
  static const FitResult fit = [] {
    testing::Gen g(77);
    TimeSeries ts = g.seasonal_series(80, 4, 0.5, 0.03);
    std::vector<double> y(ts.values().begin(), ts.values().end());
    y[20] = NAN;
    FitOptions o;
    o.period = 4;
    o.lambda2 = 5.0;
    return fit_escells(TimeSeries(y), o);
  }();
  return fit;
}

}  // namespace

TEST_CASE("csv parsing") {
  const LoadedSeries s = parse("# comment\ntimestamp,value\n1,2.5\n2,\n3,x\n4,-1e3\n");
  CHECK(s.series.size() == 4);
  CHECK(s.series.value(0) == 2.5);
  CHECK_FALSE(s.series.observed(1));
  CHECK_FALSE(s.series.observed(2));
  CHECK(s.series.value(3) == -1000.0);
  CHECK(s.timestamps == std::vector<std::string>{"1", "2", "3", "4"});

  CsvColumns c;
  c.timestamp = "when";
  c.value = "count";
  const LoadedSeries named = parse("count,other,when\n5,a,2020-01-01\n6,b,2020-01-02\n", c);
  CHECK(named.series.values()[1] == 6.0);
  CHECK(named.timestamps[0] == "2020-01-01");

  // Numeric timestamps compare as numbers.
  CHECK(parse("timestamp,value\n9,1\n10,2\n").series.size() == 2);
}

TEST_CASE("csv errors carry line numbers") {
  CHECK(parse_error_line("") == 0);
  CHECK(parse_error_line("time,value\n1,2\n") == 1);
  CHECK(parse_error_line("timestamp,value\n1,2\n2\n") == 3);
  CHECK(parse_error_line("timestamp,value\n1,2\n1,3\n") == 3);
  CHECK(parse_error_line("timestamp,value\n3,2\n2,3\n") == 3);
  CHECK(parse_error_line("# c\ntimestamp,value\n") == 2);
  CHECK(parse_error_line("timestamp,value\n,4\n") == 2);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), InputError);
}

TEST_CASE("csv round trip is exact") {
  testing::Gen g(2);
  std::vector<double> v = g.doubles(50);
  v[3] = NAN;
  v[10] = 1.0 / 3.0;
  v[11] = -0.0;
  v[12] = 1e-300;
  const TimeSeries ts(v);
  const LoadedSeries back = parse(format_csv(ts, {}, "# note"));
  CHECK(back.series == ts);
  for (std::size_t t = 0; t < ts.size(); ++t)
    if (ts.observed(static_cast<std::ptrdiff_t>(t))) CHECK(back.series.value(t) == ts.value(t));
  CHECK_THROWS_AS(format_csv(ts, {"a"}), std::invalid_argument);
}

TEST_CASE("atomic writes") {
  TempDir dir;
  const fs::path p = dir.path / "out.json";
  write_atomic(p, "first");
  write_atomic(p, "second");
  CHECK(read_file(p) == "second");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) entries += e.is_regular_file() ? 1 : 0;
  CHECK(entries == 1);
  CHECK_THROWS(write_atomic(dir.path / "missing" / "x.json", "y"));
  CHECK(companion_path("a/b/run.json", ".bands.csv") == fs::path("a/b/run.bands.csv"));
}

TEST_CASE("content digest") {
  CHECK(content_digest("") == "cbf29ce484222325");
  CHECK(content_digest("a") == "af63dc4c8601ec8c");
  CHECK(content_digest("foobar") == "85944171f73967e8");
}

TEST_CASE("manifest and option round trips") {
  RunManifest m;
  m.command = "fit";
  m.config = {{"period", 7}, {"seed", 3}};
  m.inputs["series"] = {{"path", "x.csv"}, {"digest", content_digest("x")}};
  CHECK(RunManifest::from_json(m.to_json()) == m);
  CHECK(manifest_comment(m).rfind("# ", 0) == 0);
  CHECK(manifest_comment(m).find('\n') == std::string::npos);

  FitOptions o;
  o.period = 5;
  o.half_width = 3;
  o.decay = 0.7;
  o.lambda1 = 0.25;
  o.loss = DataLoss::Squared;
  o.solver.max_iterations = 1234;
  o.pool_trim = 2;
  const FitOptions back = fit_options_from_json(fit_options_to_json(o));
  CHECK(fit_options_to_json(back) == fit_options_to_json(o));
  CHECK(back.half_width == 3);
  CHECK(back.loss == DataLoss::Squared);

  const SynthConfig c = fig1_preset();
  CHECK(synth_config_to_json(synth_config_from_json(synth_config_to_json(c))) == synth_config_to_json(c));
  CHECK_THROWS_AS(synth_config_from_json(Json{{"lenght", 3}}), InputError);
  CHECK_THROWS_AS(synth_config_from_json(Json::array()), InputError);
}

TEST_CASE("series json keeps missing values") {
  const TimeSeries ts({1.0, NAN, 3.0});
  const TimeSeries back = series_from_json(series_to_json(ts));
  CHECK(back == ts);
}

TEST_CASE("fit documents round trip") {
  const FitResult& f = small_fit();
  RunManifest m;
  m.command = "fit";
  const Json j = fit_to_json(f, m);
  const FitResult back = fit_from_json(Json::parse(dump(j)));
  CHECK(back.series == f.series);
  CHECK(back.decomposition.level == f.decomposition.level);
  CHECK(back.decomposition.seasonal == f.decomposition.seasonal);
  CHECK(back.residuals.values == f.residuals.values);
  CHECK(back.stats.status == f.stats.status);
  CHECK(dump(fit_to_json(back, m)) == dump(j));

  Json bad = j;
  bad["kind"] = "forecast";
  CHECK_THROWS_AS(fit_from_json(bad), InputError);
}

TEST_CASE("flat companions") {
  const FitResult& f = small_fit();
  RunManifest m;
  m.command = "fit";
  const std::string d = decomposition_csv(f.decomposition, m);
  // Manifest comment, header, one row per time point.
  CHECK(count_lines(d) == f.series.size() + 2);
  CHECK(d.find("t,level,trend,seasonal\n") != std::string::npos);

  const ForecastResult r = forecast(f.structure, f.centered.states.back(), f.pools, 7, 100, 1, 0.9);
  const std::string b = bands_csv(r, m);
  CHECK(count_lines(b) == 9);
  CHECK(b.find("horizon,mean,inner_lo,inner_hi,outer_lo,outer_hi\n") != std::string::npos);
  const Json fj = forecast_to_json(r, m);
  CHECK(fj["manifest"] == m.to_json());
  CHECK(fj["horizon"] == 7);

  const AnomalyReport a = detect_anomalies(f.residuals, 0.05);
  const std::string ac = anomalies_csv(a, f.residuals, m);
  CHECK(count_lines(ac) == a.indices.size() + 2);
}
