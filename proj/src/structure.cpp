#include "escells/structure.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace escells {

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
  mask_.resize(values_.size());
  for (std::size_t t = 0; t < values_.size(); ++t) mask_[t] = std::isnan(values_[t]) ? 0 : 1;
}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<std::uint8_t> mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.size() != mask_.size())
    throw std::invalid_argument("TimeSeries: values and mask lengths differ");
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (mask_[t] > 1) throw std::invalid_argument("TimeSeries: mask entries must be 0 or 1");
    if (mask_[t] == 0) values_[t] = std::numeric_limits<double>::quiet_NaN();
    else if (!std::isfinite(values_[t]))
      throw std::invalid_argument("TimeSeries: observed value at t=" + std::to_string(t) +
                                  " is not finite");
  }
}

TimeSeries TimeSeries::from_optional(std::span<const std::optional<double>> values) {
  std::vector<double> v(values.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint8_t> m(values.size(), 0);
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (values[t]) {
      v[t] = *values[t];
      m[t] = 1;
    }
  }
  return TimeSeries(std::move(v), std::move(m));
}

std::size_t TimeSeries::observed_count() const {
  std::size_t c = 0;
  for (auto m : mask_) c += m;
  return c;
}

TimeSeries TimeSeries::with_missing(std::size_t t) const { return with_missing_range(t, 1); }

TimeSeries TimeSeries::with_missing_range(std::size_t first, std::size_t count) const {
  TimeSeries out = *this;
  for (std::size_t t = first; t < first + count && t < size(); ++t) {
    out.mask_[t] = 0;
    out.values_[t] = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

TimeSeries TimeSeries::head(std::size_t count) const {
  count = std::min(count, size());
  return TimeSeries(std::vector<double>(values_.begin(), values_.begin() + count),
                    std::vector<std::uint8_t>(mask_.begin(), mask_.begin() + count));
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
  if (a.mask_ != b.mask_) return false;
  for (std::size_t t = 0; t < a.size(); ++t)
    if (a.mask_[t] && a.values_[t] != b.values_[t]) return false;
  return true;
}

ModelStructure build_structure(int period) {
  if (period < 2) throw std::invalid_argument("build_structure: period must be >= 2");
  ModelStructure s;
  s.period = period;
  s.state_dim = period + 2;
  const int n = s.state_dim;
  s.w = Vector::Zero(n);
  s.w(0) = 1.0;
  s.w(1) = 1.0;
  s.w(n - 1) = 1.0;

  s.A = Matrix::Zero(n, n);
  s.A(0, 0) = 1.0;
  s.A(0, 1) = 1.0;
  s.A(1, 1) = 1.0;
  s.A(2, n - 1) = 1.0;  // oldest slot becomes the newest
  for (int i = 3; i < n; ++i) s.A(i, i - 1) = 1.0;

  s.b = Vector::Zero(n);
  s.b(2) = 1.0;
  s.b(3) = -1.0;
  return s;
}

void transition_apply(const ModelStructure& s, std::span<const double> x, std::span<double> out) {
  const std::size_t n = static_cast<std::size_t>(s.state_dim);
  if (x.size() != n || out.size() != n)
    throw std::invalid_argument("transition_apply: dimension mismatch");
  const double oldest = x[n - 1];
  out[0] = x[0] + x[1];
  out[1] = x[1];
  for (std::size_t i = n - 1; i >= 3; --i) out[i] = x[i - 1];
  out[2] = oldest;
}

Vector transition_power_apply(const ModelStructure& s, const Vector& x, int k) {
  if (x.size() != s.state_dim) throw std::invalid_argument("transition_power_apply: dimension mismatch");
  if (k < 0) throw std::invalid_argument("transition_power_apply: negative power");
  Vector cur = x;
  Vector next(s.state_dim);
  for (int i = 0; i < k; ++i) {
    transition_apply(s, std::span<const double>(cur.data(), cur.size()),
                     std::span<double>(next.data(), next.size()));
    cur.swap(next);
  }
  return cur;
}

Vector transition_inverse_apply(const ModelStructure& s, const Vector& x) {
  const int n = s.state_dim;
  if (x.size() != n) throw std::invalid_argument("transition_inverse_apply: dimension mismatch");
  Vector out(n);
  out(1) = x(1);
  out(0) = x(0) - x(1);
  for (int i = 2; i < n - 1; ++i) out(i) = x(i + 1);
  out(n - 1) = x(2);
  return out;
}

Matrix transition_power(const ModelStructure& s, int k) {
  if (k < 0) throw std::invalid_argument("transition_power: negative power");
  const int n = s.state_dim;
  Matrix P = Matrix::Identity(n, n);
  for (int i = 0; i < k; ++i) P = s.A * P;
  return P;
}

Vector design_row(const ModelStructure& s, int j) {
  if (j < 0) throw std::invalid_argument("design_row: negative index");
  // a_j = (A^T)^j w, applied with the structure of A^T.
  const int n = s.state_dim;
  Vector a = s.w;
  Vector next(n);
  for (int i = 0; i < j; ++i) {
    next(0) = a(0);
    next(1) = a(0) + a(1);
    for (int c = 2; c < n - 1; ++c) next(c) = a(c + 1);
    next(n - 1) = a(2);
    a.swap(next);
  }
  return a;
}

CellGeometry build_cell_geometry(const ModelStructure& s, int half_width, double decay) {
  if (half_width < 1) throw std::invalid_argument("build_cell_geometry: half width must be >= 1");
  if (!(decay > 0.0 && decay < 1.0))
    throw std::invalid_argument("build_cell_geometry: decay must lie in (0, 1)");
  CellGeometry g;
  g.half_width = half_width;
  g.decay = decay;
  const int m = 2 * half_width + 1;
  g.weights.resize(m);
  for (int r = -half_width; r <= half_width; ++r)
    g.weights(r + half_width) = std::pow(decay, std::abs(r));
  g.design.resize(m, s.state_dim);
  for (int j = 0; j < m; ++j) g.design.row(j) = design_row(s, j).transpose();
  return g;
}

Vector window_weights(const CellGeometry& g, const TimeSeries& ts, std::ptrdiff_t center) {
  const int K = g.half_width;
  Vector out(g.window_size());
  for (int r = -K; r <= K; ++r)
    out(r + K) = ts.observed(center + r) ? g.weights(r + K) : 0.0;
  return out;
}

}  // namespace escells
