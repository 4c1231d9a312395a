#include "escells/analytics.hpp"
#include "escells/baselines.hpp"
#include "escells/fit.hpp"
#include "escells/forecast.hpp"
#include "escells/io.hpp"
#include "support/generators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace escells;

namespace {

double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

TimeSeries transformed(const TimeSeries& ts, double scale, double shift) {
  std::vector<double> v(ts.values().begin(), ts.values().end());
  for (double& x : v) x = scale * x + shift;
  return TimeSeries(std::move(v), std::vector<std::uint8_t>(ts.mask().begin(), ts.mask().end()));
}

}  // namespace

TEST_CASE("fits are local minima of the objective") {
  testing::Gen g(101);
  for (int rep = 0; rep < 6; ++rep) {
    const int p = g.integer(2, 5);
    const TimeSeries ts = g.with_gaps(g.seasonal_series(static_cast<std::size_t>(g.integer(20, 60)), p, 1.0, 0.05), 0.1);
    FitOptions o;
    o.period = p;
    o.half_width = g.integer(1, p);
    o.lambda1 = g.uniform(0.1, 2.0);
    o.lambda2 = g.uniform(1.0, 20.0);
    const FitResult f = fit_escells(ts, o);
    const ProblemSpec problem = assemble(ts, f.structure, f.geometry, o.lambda1, o.lambda2, o.loss);
    const double best = objective(problem, f.raw);
    for (int k = 0; k < 20; ++k) {
      StateSequence y = f.raw;
      for (Vector& v : y.states) v += g.vector(p + 2, 1e-3);
      CHECK(objective(problem, y) >= best * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("adding a constant to the data shifts the level") {
  testing::Gen g(102);
  for (int rep = 0; rep < 4; ++rep) {
    const int p = g.integer(2, 4);
    const TimeSeries ts = g.seasonal_series(48, p, 0.5, 0.05);
    const double c = g.uniform(-50.0, 50.0);
    FitOptions o;
    o.period = p;
    const FitResult a = fit_escells(ts, o);
    const FitResult b = fit_escells(transformed(ts, 1.0, c), o);
    std::vector<double> shifted = a.decomposition.level;
    for (double& v : shifted) v += c;
    const double scale = 1.0 + std::fabs(c) + 60.0;
    CHECK(max_abs(b.decomposition.level, shifted) <= 1e-4 * scale);
    CHECK(max_abs(b.decomposition.trend, a.decomposition.trend) <= 1e-4 * scale);
    CHECK(max_abs(b.decomposition.seasonal, a.decomposition.seasonal) <= 1e-4 * scale);
  }
}

TEST_CASE("scaling the data scales the fit when the quadratic weight is rescaled") {
  testing::Gen g(103);
  for (int rep = 0; rep < 4; ++rep) {
    const int p = g.integer(2, 4);
    const TimeSeries ts = g.seasonal_series(48, p, 0.5, 0.05);
    const double c = g.uniform(0.2, 5.0);
    FitOptions o;
    o.period = p;
    const FitResult a = fit_escells(ts, o);
    FitOptions oc = o;
    oc.lambda2 = o.lambda2 / c;
    const FitResult b = fit_escells(transformed(ts, c, 0.0), oc);
    std::vector<double> scaled = a.decomposition.level;
    for (double& v : scaled) v *= c;
    CHECK(max_abs(b.decomposition.level, scaled) <= 1e-4 * c * 60.0);
  }
}

TEST_CASE("forecasts ignore the gauge direction") {
  testing::Gen g(104);
  for (int p : {2, 4, 12}) {
    const ModelStructure s = build_structure(p);
    Vector gauge = Vector::Constant(p + 2, -1.0);
    gauge(0) = 1.0;
    gauge(1) = 0.0;
    const Vector x = g.vector(p + 2, 3.0);
    NoisePools pools;
    for (int k = 0; k < 30; ++k) {
      pools.increments.push_back(g.vector(p + 2, 0.1));
      pools.residuals.push_back(g.normal());
    }
    const PathEnsemble a = simulate_paths(s, x, pools, 15, 50, 7);
    const PathEnsemble b = simulate_paths(s, Vector(x + 2.5 * gauge), pools, 15, 50, 7);
    CHECK(max_abs(a.observation, b.observation) <= 1e-12 * 100.0);
  }
}

TEST_CASE("quantile bands commute with increasing affine maps") {
  testing::Gen g(105);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = g.integer(1, 300), h = g.integer(1, 5);
    std::vector<double> v = g.doubles(static_cast<std::size_t>(n * h));
    const double a = g.uniform(0.1, 10.0), b = g.uniform(-5.0, 5.0);
    std::vector<double> w = v;
    for (double& x : w) x = a * x + b;
    const double level = g.uniform(0.05, 0.999);
    const Band bv = quantile_bands(v, n, h, level);
    const Band bw = quantile_bands(w, n, h, level);
    for (int k = 0; k < h; ++k) {
      CHECK(bw.lower[k] == a * bv.lower[k] + b);
      CHECK(bw.upper[k] == a * bv.upper[k] + b);
      CHECK(bv.lower[k] <= bv.upper[k]);
    }
  }
}

TEST_CASE("anomaly flags are shift invariant and follow permutations") {
  testing::Gen g(106);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t N = static_cast<std::size_t>(g.integer(10, 400));
    std::vector<double> v = g.doubles(N);
    const double fraction = g.uniform(0.01, 0.3);
    const AnomalyReport base = detect_anomalies(v, fraction);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 17.0;
    CHECK(detect_anomalies(shifted, fraction).indices == base.indices);

    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    std::vector<double> permuted(N);
    for (std::size_t i = 0; i < N; ++i) permuted[perm[i]] = v[i];
    std::vector<std::size_t> expected;
    for (std::size_t i : base.indices) expected.push_back(perm[i]);
    std::sort(expected.begin(), expected.end());
    CHECK(detect_anomalies(permuted, fraction).indices == expected);
  }
}

TEST_CASE("mape is scale invariant") {
  testing::Gen g(107);
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<double> a = g.doubles(50, 1.0, 10.0);
    const std::vector<double> p = g.doubles(50, 1.0, 10.0);
    const double c = g.uniform(0.1, 100.0);
    std::vector<double> ac = a, pc = p;
    for (double& x : ac) x *= c;
    for (double& x : pc) x *= c;
    const MapeSeries m = mape_sliding(a, p, 7);
    const MapeSeries mc = mape_sliding(ac, pc, 7);
    REQUIRE(m.values.size() == mc.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(mc.values[i] == doctest::Approx(m.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("holt-winters filter is linear in data and initial state") {
  testing::Gen g(108);
  for (int p : {2, 3, 6}) {
    const ModelStructure s = build_structure(p);
    const TimeSeries y1(g.doubles(40)), y2(g.doubles(40));
    const Vector x1 = g.vector(p + 2), x2 = g.vector(p + 2);
    const double alpha = g.uniform(0, 1), beta = g.uniform(0, 1), gamma = g.uniform(0, 1);
    std::vector<double> sum(40);
    for (std::size_t t = 0; t < 40; ++t) sum[t] = y1.value(t) + y2.value(t);
    const HWFilterOutput f1 = hw_filter(y1, s, HWParams{alpha, beta, gamma, x1});
    const HWFilterOutput f2 = hw_filter(y2, s, HWParams{alpha, beta, gamma, x2});
    const HWFilterOutput fs = hw_filter(TimeSeries(sum), s, HWParams{alpha, beta, gamma, x1 + x2});
    for (std::size_t t = 0; t < 40; ++t)
      CHECK(fs.predictions[t] == doctest::Approx(f1.predictions[t] + f2.predictions[t]).epsilon(1e-10));
  }
}

TEST_CASE("csv round trips random series with random masks") {
  testing::Gen g(109);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> v(static_cast<std::size_t>(g.integer(1, 200)));
    for (double& x : v) x = g.normal(0.0, std::pow(10.0, g.uniform(-20.0, 20.0)));
    const TimeSeries ts = g.with_gaps(TimeSeries(v), 0.2);
    std::istringstream in(format_csv(ts));
    const LoadedSeries back = parse_csv(in);
    CHECK(back.series == ts);
  }
}

TEST_CASE("pools never contain boundary entries") {
  testing::Gen g(110);
  for (int rep = 0; rep < 5; ++rep) {
    const int p = g.integer(2, 4);
    const TimeSeries ts = g.seasonal_series(40, p);
    const ModelStructure s = build_structure(p);
    std::vector<Vector> states;
    for (std::size_t t = 0; t < ts.size(); ++t) states.push_back(g.vector(p + 2));
    const int trim = g.integer(0, 10);
    const NoisePools pools = build_pools(ts, states, s, trim);
    // Residuals exist for t >= 1; trimming keeps t in [trim, T - trim].
    const std::size_t kept = trim == 0 ? 39 : 40 - 2 * static_cast<std::size_t>(trim);
    CHECK(pools.residuals.size() == kept);
    CHECK(pools.increments.size() == kept);
  }
}
