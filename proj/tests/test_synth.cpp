#include "escells/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace escells;

TEST_CASE("generation is deterministic in the seed") {
  SynthConfig c = fig1_preset();
  const SynthData a = synth_generate(c);
  const SynthData b = synth_generate(c);
  CHECK(a.series == b.series);
  CHECK(a.outlier_indices == b.outlier_indices);
  c.seed += 1;
  const SynthData other = synth_generate(c);
  CHECK_FALSE(other.series == a.series);
  // Ground truth does not depend on the seed.
  CHECK(other.signal == a.signal);
}

TEST_CASE("the observation is the sum of its parts") {
  const SynthData d = synth_generate(fig1_preset());
  REQUIRE(d.series.size() == 1000);
  for (std::size_t t = 0; t < d.series.size(); ++t) {
    CHECK(d.signal[t] == d.truth.level[t] + d.truth.seasonal[t]);
    CHECK(d.series.value(t) == d.signal[t] + d.noise[t] + d.outliers[t]);
    CHECK((d.outliers[t] != 0.0) == std::binary_search(d.outlier_indices.begin(), d.outlier_indices.end(), t));
  }
  for (std::size_t t : d.outlier_indices) CHECK(std::fabs(d.outliers[t]) >= 20.0);
}

TEST_CASE("level and trend shifts") {
  SynthConfig c;
  c.length = 60;
  c.period = 4;
  c.base_level = 10.0;
  c.base_trend = 0.5;
  c.noise_sigma = 0.0;
  c.shifts = {{20, 5.0, -1.0}};
  const SynthData d = synth_generate(c);
  CHECK(d.truth.level[19] == doctest::Approx(10.0 + 19 * 0.5));
  CHECK(d.truth.level[20] == doctest::Approx(10.0 + 20 * 0.5 + 5.0));
  CHECK(d.truth.trend[19] == 0.5);
  CHECK(d.truth.trend[20] == -0.5);
  CHECK(d.truth.level[30] == doctest::Approx(d.truth.level[20] - 10 * 0.5));
  for (std::size_t t = 0; t < c.length; ++t) CHECK(d.noise[t] == 0.0);
}

TEST_CASE("planted outliers follow the binomial count") {
  SynthConfig c;
  c.length = 500;
  c.period = 12;
  c.outlier_fraction = 0.03;
  c.outlier_scale = 10.0;
  const int reps = 200;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    c.seed = 1000 + r;
    total += static_cast<double>(synth_generate(c).outlier_indices.size());
  }
  const double n = static_cast<double>(c.length), f = c.outlier_fraction;
  const double mean = n * f, se = std::sqrt(n * f * (1 - f) / reps);
  CHECK(std::fabs(total / reps - mean) < 4.0 * se);
}

TEST_CASE("noise level schedule") {
  SynthConfig c;
  c.noise_sigma = 2.0;
  c.noise_modulation = 0.5;
  c.noise_cycle = 100.0;
  CHECK(c.sigma_at(0) == doctest::Approx(2.0));
  CHECK(c.sigma_at(25) == doctest::Approx(3.0));
  CHECK(c.sigma_at(75) == doctest::Approx(1.0));
  c.noise_segments = {{0, 1.0}, {50, 4.0}};
  CHECK(c.sigma_at(49) == 1.0);
  CHECK(c.sigma_at(50) == 4.0);

  // Sample spread of the noise matches the schedule.
  c.length = 20000;
  c.period = 7;
  const SynthData d = synth_generate(c);
  double lo = 0.0, hi = 0.0;
  for (std::size_t t = 0; t < 50; ++t) lo += d.noise[t] * d.noise[t];
  for (std::size_t t = 50; t < c.length; ++t) hi += d.noise[t] * d.noise[t];
  CHECK(std::sqrt(hi / (c.length - 50)) == doctest::Approx(4.0).epsilon(0.03));
  CHECK(std::sqrt(lo / 50) == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("configuration checks") {
  SynthConfig c;
  c.period = 1;
  CHECK_THROWS_AS(synth_generate(c), std::invalid_argument);
  c = SynthConfig{};
  c.length = 5;
  CHECK_THROWS_AS(synth_generate(c), std::invalid_argument);
  c = SynthConfig{};
  c.outlier_fraction = 0.5;
  CHECK_THROWS_AS(synth_generate(c), std::invalid_argument);
  c = SynthConfig{};
  c.noise_sigma = -1.0;
  CHECK_THROWS_AS(synth_generate(c), std::invalid_argument);
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
  CHECK(preset("fig1").seed == fig1_preset().seed);
}

TEST_CASE("noiseless generator") {
  const SynthData d = hw_noiseless(30, 3, 5.0, 0.5, {1.0, 2.0, 6.0});
  CHECK(d.series.size() == 30);
  const double s = d.truth.seasonal[0] + d.truth.seasonal[1] + d.truth.seasonal[2];
  CHECK(std::fabs(s) <= 1e-15);
  CHECK(d.truth.seasonal[0] == -2.0);
  for (std::size_t t = 0; t < 30; ++t) {
    CHECK(d.series.value(t) == d.truth.level[t] + d.truth.seasonal[t]);
    CHECK(d.truth.seasonal[t] == d.truth.seasonal[t % 3]);
  }
  CHECK(d.truth.level[10] == 10.0);
  CHECK_THROWS_AS(hw_noiseless(30, 3, 0.0, 0.0, {1.0}), std::invalid_argument);
}
