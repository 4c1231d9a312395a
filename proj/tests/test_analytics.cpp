#include "escells/analytics.hpp"
#include "escells/fit.hpp"
#include "escells/synth.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace escells;

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("decomposition extracts coordinates") {
  const ModelStructure s = build_structure(2);
  const std::vector<Vector> x{(Vector(4) << 5, 0.1, 2, -2).finished()};
  const Decomposition d = decompose(x, s);
  CHECK(d.level == std::vector<double>{5.0});
  CHECK(d.trend == std::vector<double>{0.1});
  CHECK(d.seasonal == std::vector<double>{2.0});
  CHECK_THROWS_AS(decompose(std::vector<Vector>{Vector::Zero(3)}, s), std::invalid_argument);
}

TEST_CASE("reconstruction identity") {
  testing::Gen g(3);
  for (int p : {2, 5, 12}) {
    const ModelStructure s = build_structure(p);
    std::vector<Vector> x;
    for (int t = 0; t < 30; ++t) x.push_back(g.vector(p + 2));
    const Decomposition d = decompose(x, s);
    for (std::size_t t = 1; t < x.size(); ++t) {
      CHECK(predict_observation(x, s, t) == d.level[t - 1] + d.trend[t - 1] + x[t - 1](p + 1));
    }
    // The oldest slot of a consistent state sequence is the newest one p - 1 steps back.
    std::vector<Vector> c{g.vector(p + 2)};
    for (int t = 0; t < 3 * p; ++t) c.push_back(s.A * c.back());
    const Decomposition dc = decompose(c, s);
    for (std::size_t t = p; t < c.size(); ++t) CHECK(c[t](p + 1) == dc.seasonal[t - p + 1]);
  }
}

TEST_CASE("anomaly examples") {
  const AnomalyReport a = detect_anomalies(std::vector<double>{-100, 0, 0, 100}, 0.5);
  CHECK(a.indices == std::vector<std::size_t>{0, 3});
  CHECK(a.median == 0.0);
  CHECK(a.low == -100.0);
  CHECK(a.high == 100.0);
  const AnomalyReport b = detect_anomalies(std::vector<double>{0, 0, 0, 9}, 0.25);
  CHECK(b.indices == std::vector<std::size_t>{3});
  // Ties go to the earlier index.
  const AnomalyReport c = detect_anomalies(std::vector<double>{1, -1, 1, -1, 0}, 0.2);
  CHECK(c.indices == std::vector<std::size_t>{0});
  // Residual times, not pool positions, are reported.
  ResidualSeries r;
  r.times = {3, 8, 11};
  r.values = {0.0, 50.0, 0.1};
  CHECK(detect_anomalies(r, 0.3).indices == std::vector<std::size_t>{8});
  CHECK_THROWS_AS(detect_anomalies(std::vector<double>{}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(detect_anomalies(std::vector<double>{1.0}, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(detect_anomalies(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("anomaly count bound") {
  testing::Gen g(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t N = static_cast<std::size_t>(g.integer(1, 500));
    const double fraction = g.uniform(0.001, 0.49);
    const AnomalyReport a = detect_anomalies(g.doubles(N, -5.0, 5.0), fraction);
    const auto expected = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(N)));
    CHECK(a.indices.size() == std::min(expected, N));
    CHECK(static_cast<double>(a.indices.size()) / N <= fraction + 1.0 / N + 1e-12);
    CHECK(std::is_sorted(a.indices.begin(), a.indices.end()));
  }
  CHECK(detect_anomalies(std::vector<double>(1000, 1.0)).indices.size() == 15);
}

TEST_CASE("anomaly thresholds separate flagged and kept residuals") {
  testing::Gen g(6);
  const std::vector<double> v = g.doubles(400, -3.0, 3.0);
  const AnomalyReport a = detect_anomalies(v, 0.05);
  std::size_t outside = 0;
  for (double e : v) outside += (e <= a.low || e >= a.high) ? 1 : 0;
  CHECK(outside == a.indices.size());
  for (std::size_t i : a.indices) CHECK((v[i] <= a.low || v[i] >= a.high));
}

TEST_CASE("mape examples") {
  const MapeSeries m = mape_sliding(std::vector<double>{100, 100}, std::vector<double>{110, 90}, 2);
  CHECK(m.positions == std::vector<std::size_t>{1});
  CHECK(m.values[0] == doctest::Approx(10.0).epsilon(1e-15));
  testing::Gen g(7);
  const std::vector<double> a = g.doubles(40, 1.0, 5.0);
  const MapeSeries perfect = mape_sliding(a, a);
  CHECK(perfect.values.size() == 31);
  for (double v : perfect.values) CHECK(v == 0.0);
  const MapeSeries skip = mape_sliding(std::vector<double>{1, 0, 1, 1}, std::vector<double>{1, 1, 1, 1}, 2);
  CHECK(skip.skipped == std::vector<std::size_t>{1, 2});
  CHECK(skip.positions == std::vector<std::size_t>{3});
  CHECK_THROWS_AS(mape_sliding(a, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mape_sliding(a, a, 0), std::invalid_argument);
}

TEST_CASE("rmse and interpolation") {
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
  const TimeSeries ts({NAN, 1.0, NAN, NAN, 4.0, NAN});
  CHECK(linear_interpolate(ts) == std::vector<double>{1.0, 1.0, 2.0, 3.0, 4.0, 4.0});
}

TEST_CASE("imputation") {
  const SynthData d = hw_noiseless(120, 4, 10.0, 0.05, {1.0, -0.5, 2.0, -2.5});
  FitOptions o;
  o.period = 4;

  SUBCASE("fully observed series is returned unchanged") {
    const FitResult f = fit_escells(d.series, o);
    const TimeSeries out = impute(d.series, f.centered.states, f.structure);
    CHECK(out == d.series);
  }
  SUBCASE("filled values equal the one-step predictions and imputing twice changes nothing") {
    std::vector<double> y(d.series.values().begin(), d.series.values().end());
    for (int t = 40; t < 55; ++t) y[t] = NAN;
    const TimeSeries masked(y);
    const FitResult f = fit_escells(masked, o);
    const TimeSeries once = impute(masked, f.centered.states, f.structure);
    for (std::size_t t = 0; t < once.size(); ++t) {
      CHECK(once.observed(static_cast<std::ptrdiff_t>(t)));
      if (masked.observed(static_cast<std::ptrdiff_t>(t))) CHECK(once.value(t) == masked.value(t));
      else CHECK(once.value(t) == predict_observation(f.centered.states, f.structure, t));
    }
    CHECK(impute(once, f.centered.states, f.structure) == once);
  }
  SUBCASE("length mismatch") {
    const FitResult f = fit_escells(d.series, o);
    CHECK_THROWS_AS(impute(TimeSeries({1.0}), f.centered.states, f.structure), std::invalid_argument);
  }
}

TEST_CASE("gap filling beats linear interpolation") {
  SynthConfig c;
  c.length = 300;
  c.period = 12;
  c.noise_sigma = 0.5;
  c.seed = 44;
  const SynthData d = synth_generate(c);
  std::vector<double> y(d.series.values().begin(), d.series.values().end());
  for (int t = 150; t < 200; ++t) y[t] = NAN;
  const TimeSeries masked(y);
  FitOptions o;
  o.period = 12;
  const FitResult f = fit_escells(masked, o);
  const TimeSeries filled = impute(masked, f.centered.states, f.structure);
  const std::vector<double> lin = linear_interpolate(masked);
  std::vector<double> truth, ours, theirs;
  for (int t = 150; t < 200; ++t) {
    truth.push_back(d.series.value(t));
    ours.push_back(filled.value(t));
    theirs.push_back(lin[t]);
  }
  CHECK(rmse(ours, truth) <= rmse(theirs, truth));
}

TEST_CASE("noiseless components are recovered") {
  const SynthData d = hw_noiseless(100, 4, 20.0, 0.1, {3.0, -1.0, 0.5, -2.5});
  FitOptions o;
  o.period = 4;
  SUBCASE("default weights are exact away from the ends") {
    const FitResult f = fit_escells(d.series, o);
    const auto mid = [](const std::vector<double>& v) { return std::span<const double>(v).subspan(8, 84); };
    CHECK(max_abs_diff(mid(f.decomposition.level), mid(d.truth.level)) <= 1e-6);
    CHECK(max_abs_diff(mid(f.decomposition.trend), mid(d.truth.trend)) <= 1e-6);
    CHECK(max_abs_diff(mid(f.decomposition.seasonal), mid(d.truth.seasonal)) <= 1e-6);
  }
  SUBCASE("a light seasonal penalty is accurate everywhere") {
    o.lambda1 = 0.01;
    const FitResult f = fit_escells(d.series, o);
    CHECK(max_abs_diff(f.decomposition.level, d.truth.level) <= 1e-3);
    CHECK(max_abs_diff(f.decomposition.trend, d.truth.trend) <= 1e-3);
    CHECK(max_abs_diff(f.decomposition.seasonal, d.truth.seasonal) <= 1e-3);
  }
}
