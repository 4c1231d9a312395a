#pragma once

#include "escells/forecast.hpp"
#include "escells/structure.hpp"

#include <optional>
#include <span>
#include <vector>

namespace escells {

struct Decomposition {
  std::vector<double> level;
  std::vector<double> trend;
  std::vector<double> seasonal;  // newest seasonal slot
};

Decomposition decompose(std::span<const Vector> centered, const ModelStructure& s);

struct AnomalyReport {
  std::vector<std::size_t> indices;  // time indices, ascending
  double low = 0.0;                  // flagged when residual <= low ...
  double high = 0.0;                 // ... or >= high
  double median = 0.0;
  double fraction = 0.015;
};

/// Flags the ceil(fraction * N) residuals farthest from the median, ties to
/// the earlier index.
AnomalyReport detect_anomalies(const ResidualSeries& residuals, double fraction = 0.015);
AnomalyReport detect_anomalies(std::span<const double> residuals, double fraction = 0.015);

/// One-step prediction of y_t from the centered sequence (w . xc_{t-1};
/// for t = 0 the state before the first one is recovered with A^{-1}).
double predict_observation(std::span<const Vector> centered, const ModelStructure& s, std::size_t t);

/// Missing positions receive their one-step prediction.
TimeSeries impute(const TimeSeries& ts, std::span<const Vector> centered, const ModelStructure& s);

/// Linear interpolation across gaps (flat extrapolation at the ends).
std::vector<double> linear_interpolate(const TimeSeries& ts);

struct MapeSeries {
  std::vector<std::size_t> positions;  // window end positions
  std::vector<double> values;          // percent
  std::vector<std::size_t> skipped;    // window end positions with a zero actual
};

/// Trailing-window mean of 100 |actual - predicted| / |actual|.
MapeSeries mape_sliding(std::span<const double> actual, std::span<const double> predicted, int window = 10);

double rmse(std::span<const double> a, std::span<const double> b);

}  // namespace escells
