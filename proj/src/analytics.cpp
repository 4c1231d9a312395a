#include "escells/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace escells {

Decomposition decompose(std::span<const Vector> centered, const ModelStructure& s) {
  Decomposition d;
  d.level.reserve(centered.size());
  d.trend.reserve(centered.size());
  d.seasonal.reserve(centered.size());
  for (const Vector& x : centered) {
    if (x.size() != s.state_dim) throw std::invalid_argument("decompose: state dimension mismatch");
    d.level.push_back(x(s.level_index()));
    d.trend.push_back(x(s.trend_index()));
    d.seasonal.push_back(x(s.newest_seasonal_index()));
  }
  return d;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

}  // namespace

AnomalyReport detect_anomalies(const ResidualSeries& residuals, double fraction) {
  if (residuals.values.empty()) throw std::invalid_argument("detect_anomalies: empty residual pool");
  if (!(fraction > 0.0 && fraction <= 0.5)) throw std::invalid_argument("detect_anomalies: fraction must lie in (0, 0.5]");
  const std::size_t N = residuals.size();
  AnomalyReport rep;
  rep.fraction = fraction;
  rep.median = median_of(residuals.values);
  const auto count = std::min<std::size_t>(N, static_cast<std::size_t>(std::ceil(fraction * N - 1e-12)));
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(residuals.values[a] - rep.median) > std::fabs(residuals.values[b] - rep.median);
  });
  double cutoff = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    rep.indices.push_back(residuals.times[order[k]]);
    cutoff = std::min(cutoff, std::fabs(residuals.values[order[k]] - rep.median));
  }
  std::sort(rep.indices.begin(), rep.indices.end());
  rep.low = rep.median - cutoff;
  rep.high = rep.median + cutoff;
  return rep;
}

AnomalyReport detect_anomalies(std::span<const double> residuals, double fraction) {
  ResidualSeries r;
  r.values.assign(residuals.begin(), residuals.end());
  r.times.resize(r.values.size());
  std::iota(r.times.begin(), r.times.end(), 0);
  return detect_anomalies(r, fraction);
}

double predict_observation(std::span<const Vector> centered, const ModelStructure& s, std::size_t t) {
  if (t >= centered.size()) throw std::out_of_range("predict_observation: time out of range");
  if (t == 0) return measure(s, transition_inverse_apply(s, centered[0]));
  return measure(s, centered[t - 1]);
}

TimeSeries impute(const TimeSeries& ts, std::span<const Vector> centered, const ModelStructure& s) {
  if (centered.size() != ts.size()) throw std::invalid_argument("impute: need one centered state per time point");
  std::vector<double> v(ts.values().begin(), ts.values().end());
  for (std::size_t t = 0; t < ts.size(); ++t)
    if (!ts.observed(static_cast<std::ptrdiff_t>(t))) v[t] = predict_observation(centered, s, t);
  return TimeSeries(std::move(v));
}

std::vector<double> linear_interpolate(const TimeSeries& ts) {
  const std::size_t T = ts.size();
  std::vector<double> out(ts.values().begin(), ts.values().end());
  std::ptrdiff_t prev = -1;
  for (std::size_t t = 0; t <= T; ++t) {
    if (t < T && !ts.observed(static_cast<std::ptrdiff_t>(t))) continue;
    const std::size_t gap_start = static_cast<std::size_t>(prev + 1);
    for (std::size_t k = gap_start; k < t; ++k) {
      if (prev < 0 && t == T) out[k] = 0.0;
      else if (prev < 0) out[k] = ts.value(t);
      else if (t == T) out[k] = ts.value(static_cast<std::size_t>(prev));
      else {
        const double f = double(k - prev) / double(t - prev);
        out[k] = (1.0 - f) * ts.value(static_cast<std::size_t>(prev)) + f * ts.value(t);
      }
    }
    prev = static_cast<std::ptrdiff_t>(t);
  }
  return out;
}

MapeSeries mape_sliding(std::span<const double> actual, std::span<const double> predicted, int window) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("mape_sliding: length mismatch");
  if (window < 1) throw std::invalid_argument("mape_sliding: window must be >= 1");
  MapeSeries out;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t end = w - 1; end < actual.size(); ++end) {
    double acc = 0.0;
    bool zero = false;
    for (std::size_t k = end + 1 - w; k <= end; ++k) {
      if (actual[k] == 0.0) { zero = true; break; }
      acc += 100.0 * std::fabs(actual[k] - predicted[k]) / std::fabs(actual[k]);
    }
    if (zero) { out.skipped.push_back(end); continue; }
    out.positions.push_back(end);
    out.values.push_back(acc / static_cast<double>(w));
  }
  return out;
}

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("rmse: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace escells
