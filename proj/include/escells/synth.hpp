#pragma once
// Synthetic series with level/trend shifts, heteroscedastic noise and
// heavy-tailed outliers, returned with their ground truth.

#include "escells/analytics.hpp"
#include "escells/structure.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace escells {

struct Shift {
  std::size_t time = 0;
  double level_delta = 0.0;
  double trend_delta = 0.0;
};

struct NoiseSegment {
  std::size_t start = 0;  // sigma applies from this time on
  double sigma = 0.0;
};

struct SynthConfig {
  std::size_t length = 1000;  // observations, t = 0..length-1
  int period = 12;
  double base_level = 100.0;
  double base_trend = 0.0;
  std::vector<Shift> shifts;
  double seasonal_amplitude = 10.0;
  // sigma_t = noise_sigma * (1 + noise_modulation * sin(2 pi t / noise_cycle)),
  // or piecewise-constant when noise_segments is non-empty.
  double noise_sigma = 1.0;
  double noise_modulation = 0.0;
  double noise_cycle = 250.0;
  std::vector<NoiseSegment> noise_segments;
  double outlier_fraction = 0.0;
  double outlier_scale = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  double sigma_at(std::size_t t) const;
};

/// The preset approximating the noisy Holt-Winters demonstration scenario.
SynthConfig fig1_preset();
SynthConfig preset(const std::string& name);

struct SynthData {
  TimeSeries series;
  Decomposition truth;          // level, trend, seasonal per time
  std::vector<double> signal;   // level + seasonal
  std::vector<double> noise;    // sigma_t * eta_t
  std::vector<double> outliers; // zero except at planted positions
  std::vector<std::size_t> outlier_indices;
};

SynthData synth_generate(const SynthConfig& config);

/// Exact Holt-Winters dynamics with zero innovations: constant seasonal
/// pattern (zero sum), linear level.
SynthData hw_noiseless(std::size_t length, int period, double level, double trend,
                       std::vector<double> pattern);

}  // namespace escells
