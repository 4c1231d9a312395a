#include "escells/synth.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace escells {

void SynthConfig::validate() const {
  if (period < 2) throw std::invalid_argument("synth: period must be >= 2");
  if (length < static_cast<std::size_t>(period + 3)) throw std::invalid_argument("synth: length must be at least p+3");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 0.2))
    throw std::invalid_argument("synth: outlier fraction must lie in [0, 0.2]");
  if (noise_sigma < 0.0 || outlier_scale < 0.0 || seasonal_amplitude < 0.0)
    throw std::invalid_argument("synth: scales must be nonnegative");
  if (std::fabs(noise_modulation) > 1.0) throw std::invalid_argument("synth: noise modulation must lie in [-1, 1]");
  if (!(noise_cycle > 0.0)) throw std::invalid_argument("synth: noise cycle must be positive");
  for (const auto& seg : noise_segments)
    if (seg.sigma < 0.0) throw std::invalid_argument("synth: scales must be nonnegative");
}

double SynthConfig::sigma_at(std::size_t t) const {
  if (!noise_segments.empty()) {
    double s = noise_sigma;
    for (const auto& seg : noise_segments)
      if (t >= seg.start) s = seg.sigma;
    return s;
  }
  return noise_sigma * (1.0 + noise_modulation * std::sin(2.0 * M_PI * static_cast<double>(t) / noise_cycle));
}

SynthConfig fig1_preset() {
  SynthConfig c;
  c.length = 1000;
  c.period = 12;
  c.base_level = 100.0;
  c.base_trend = 0.04;
  c.shifts = {{350, 12.0, -0.06}, {650, -8.0, 0.07}};
  c.seasonal_amplitude = 8.0;
  c.noise_sigma = 1.5;
  c.noise_modulation = 0.8;
  c.noise_cycle = 300.0;
  c.outlier_fraction = 0.015;
  c.outlier_scale = 20.0;
  c.seed = 20170101;
  return c;
}

SynthConfig preset(const std::string& name) {
  if (name == "fig1") return fig1_preset();
  throw std::invalid_argument("unknown synth preset: " + name);
}

SynthData synth_generate(const SynthConfig& c) {
  c.validate();
  const std::size_t T = c.length;
  std::mt19937_64 noise_rng(c.seed);
  std::mt19937_64 outlier_rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution planted(c.outlier_fraction);
  std::student_t_distribution<double> heavy(3.0);
  std::bernoulli_distribution coin(0.5);

  SynthData d;
  d.truth.level.resize(T);
  d.truth.trend.resize(T);
  d.truth.seasonal.resize(T);
  d.signal.resize(T);
  d.noise.resize(T);
  d.outliers.assign(T, 0.0);
  std::vector<double> y(T);

  double level = c.base_level, trend = c.base_trend;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) level += trend;
    for (const Shift& s : c.shifts)
      if (s.time == t) {
        level += s.level_delta;
        trend += s.trend_delta;
      }
    const double seasonal =
        c.seasonal_amplitude * std::sin(2.0 * M_PI * static_cast<double>(t) / c.period);
    d.truth.level[t] = level;
    d.truth.trend[t] = trend;
    d.truth.seasonal[t] = seasonal;
    d.signal[t] = level + seasonal;
    d.noise[t] = c.sigma_at(t) * normal(noise_rng);
    if (planted(outlier_rng)) {
      const double mag = c.outlier_scale * (1.0 + std::fabs(heavy(outlier_rng)));
      d.outliers[t] = coin(outlier_rng) ? mag : -mag;
      d.outlier_indices.push_back(t);
    }
    y[t] = d.signal[t] + d.noise[t] + d.outliers[t];
  }
  d.series = TimeSeries(std::move(y));
  return d;
}

SynthData hw_noiseless(std::size_t length, int period, double level, double trend,
                       std::vector<double> pattern) {
  if (static_cast<int>(pattern.size()) != period) throw std::invalid_argument("hw_noiseless: pattern length must equal the period");
  const double mean = std::accumulate(pattern.begin(), pattern.end(), 0.0) / period;
  for (double& v : pattern) v -= mean;
  SynthData d;
  std::vector<double> y(length);
  d.truth.level.resize(length);
  d.truth.trend.assign(length, trend);
  d.truth.seasonal.resize(length);
  d.signal.resize(length);
  d.noise.assign(length, 0.0);
  d.outliers.assign(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    d.truth.level[t] = level + trend * static_cast<double>(t);
    d.truth.seasonal[t] = pattern[t % period];
    d.signal[t] = y[t] = d.truth.level[t] + d.truth.seasonal[t];
  }
  d.series = TimeSeries(std::move(y));
  return d;
}

}  // namespace escells
