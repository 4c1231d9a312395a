#include "escells/benchmark.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace escells;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.length = 240;
  c.period = 12;
  c.base_level = 50.0;
  c.noise_sigma = 0.5;
  c.outlier_fraction = 0.02;
  c.outlier_scale = 10.0;
  c.seed = 8;
  return c;
}

BenchmarkOptions small_options() {
  BenchmarkOptions o;
  o.split = 200;
  o.horizon = 40;
  o.window = 10;
  o.escells.period = 12;
  return o;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::HoltWinters, Method::RobustHoltWinters, Method::EsCells}) CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_methods("hw,escells,hw") == std::vector<Method>{Method::HoltWinters, Method::EsCells});
  CHECK_THROWS_AS(parse_method("arima"), std::invalid_argument);
  CHECK_THROWS_AS(parse_methods(","), std::invalid_argument);
}

TEST_CASE("an oracle forecaster scores zero") {
  const SynthData d = synth_generate(small_config());
  BenchmarkOptions o = small_options();
  o.methods = {Method::EsCells};
  const std::vector<double> future(d.series.values().begin() + 200, d.series.values().begin() + 240);
  o.extra = {{"oracle", [&](const TimeSeries& train, int h) {
                CHECK(train.size() == 200);
                return std::vector<double>(future.begin(), future.begin() + h);
              }}};
  const BenchmarkTable t = run_benchmark(d.series, o);
  const MethodScore* oracle = t.find("oracle");
  REQUIRE(oracle);
  CHECK(oracle->mape.values.size() == 31);
  for (double v : oracle->mape.values) CHECK(v == 0.0);
  CHECK(oracle->median_mape == 0.0);
  REQUIRE(t.ratios.size() == 1);
  CHECK(t.ratios[0].name == "oracle");
  CHECK(t.ratios[0].dominance_fraction == 0.0);
  CHECK(t.find("escells")->status.has_value());
  CHECK_FALSE(oracle->status.has_value());
}

TEST_CASE("tables are deterministic and thread-count independent") {
  const SynthConfig c = small_config();
  BenchmarkOptions o = small_options();
  const BenchmarkTable a = run_benchmark(c, o);
  o.threads = 3;
  const BenchmarkTable b = run_benchmark(c, o);
  REQUIRE(a.methods.size() == 3);
  for (std::size_t k = 0; k < a.methods.size(); ++k) {
    CHECK(a.methods[k].name == b.methods[k].name);
    CHECK(a.methods[k].forecast == b.methods[k].forecast);
    CHECK(a.methods[k].mape.values == b.methods[k].mape.values);
  }
  REQUIRE(a.ratios.size() == 2);
  CHECK(a.ratios[0].median_ratio == b.ratios[0].median_ratio);
  CHECK(a.ratios[0].positions == 31);
  CHECK(a.actual.size() == 40);
}

TEST_CASE("ratio summary arithmetic") {
  // One method is uniformly twice as far off as the other.
  const TimeSeries ts(std::vector<double>(60, 10.0));
  BenchmarkOptions o;
  o.methods = {};
  o.split = 40;
  o.horizon = 20;
  o.window = 5;
  o.escells.period = 4;
  o.extra = {{"escells", [](const TimeSeries&, int h) { return std::vector<double>(h, 11.0); }},
             {"double", [](const TimeSeries&, int h) { return std::vector<double>(h, 12.0); }}};
  const BenchmarkTable t = run_benchmark(ts, o);
  REQUIRE(t.ratios.size() == 1);
  CHECK(t.ratios[0].median_ratio == doctest::Approx(2.0));
  CHECK(t.ratios[0].dominance_fraction == 1.0);
  CHECK(t.find("escells")->mean_mape == doctest::Approx(10.0));
}

TEST_CASE("a reference series replaces the held-out actuals") {
  const SynthData d = synth_generate(small_config());
  BenchmarkOptions o = small_options();
  o.methods = {Method::HoltWinters};
  const BenchmarkTable t = run_benchmark(d.series, o, d.signal);
  for (int h = 0; h < 40; ++h) CHECK(t.actual[h] == d.signal[200 + h]);
  CHECK_THROWS_AS(run_benchmark(d.series, o, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("insufficient evaluation data") {
  const SynthData d = synth_generate(small_config());
  BenchmarkOptions o = small_options();
  o.split = 220;
  CHECK_THROWS_AS(run_benchmark(d.series, o), std::invalid_argument);
  o = small_options();
  o.horizon = 0;
  CHECK_THROWS_AS(run_benchmark(d.series, o), std::invalid_argument);
  o = small_options();
  o.window = 41;
  CHECK_THROWS_AS(run_benchmark(d.series, o), std::invalid_argument);
  o = small_options();
  std::vector<double> y(d.series.values().begin(), d.series.values().end());
  y[210] = NAN;
  CHECK_THROWS_AS(run_benchmark(TimeSeries(y), o), std::invalid_argument);
}

TEST_CASE("baseline forecasters tolerate training gaps") {
  const SynthData d = synth_generate(small_config());
  std::vector<double> y(d.series.values().begin(), d.series.values().begin() + 200);
  for (int t = 100; t < 110; ++t) y[t] = NAN;
  const ModelStructure s = build_structure(12);
  const std::vector<double> f = forecast_hw(TimeSeries(y), s, HWFitOptions{}, 12);
  CHECK(f.size() == 12);
  for (double v : f) CHECK(std::isfinite(v));
  const std::vector<double> r = forecast_rhw(TimeSeries(y), s, HWFitOptions{}, RobustFilterParams{}, 12);
  for (double v : r) CHECK(std::isfinite(v));
}
