#pragma once
// Holt-Winters state-space structure, ES cell window geometry and the
// observation container everything else consumes.
//
// State layout (n = p + 2):
//   [0]        level
//   [1]        trend
//   [2]        most recent seasonal slot
//   ...
//   [p + 1]    oldest seasonal slot (the one measured next)

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace escells {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniformly indexed observations t = 0..T with a missingness mask.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// NaN entries are treated as missing.
  explicit TimeSeries(std::vector<double> values);
  TimeSeries(std::vector<double> values, std::vector<std::uint8_t> mask);

  static TimeSeries from_optional(std::span<const std::optional<double>> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  bool observed(std::ptrdiff_t t) const {
    return t >= 0 && static_cast<std::size_t>(t) < values_.size() && mask_[t] != 0;
  }
  /// Value at t; NaN when missing.
  double value(std::size_t t) const { return values_[t]; }
  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::size_t observed_count() const;
  bool fully_observed() const { return observed_count() == size(); }

  /// Copy with position t marked missing.
  TimeSeries with_missing(std::size_t t) const;
  /// Copy with positions [first, first + count) marked missing.
  TimeSeries with_missing_range(std::size_t first, std::size_t count) const;
  /// Observed prefix [0, count).
  TimeSeries head(std::size_t count) const;

  friend bool operator==(const TimeSeries& a, const TimeSeries& b);

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

struct ModelStructure {
  int period = 0;
  int state_dim = 0;
  Vector w;  // observation row
  Matrix A;  // transition
  Vector b;  // seasonal first difference
  int level_index() const { return 0; }
  int trend_index() const { return 1; }
  int newest_seasonal_index() const { return 2; }
  int oldest_seasonal_index() const { return state_dim - 1; }
};

struct CellGeometry {
  int half_width = 0;
  double decay = 0.0;
  Vector weights;  // alpha_{-K..K}, peak 1 at index K
  Matrix design;   // (2K+1) x n, row j = w^T A^j
  int window_size() const { return 2 * half_width + 1; }
};

ModelStructure build_structure(int period);

/// w . x summed as level + trend + oldest seasonal slot.
inline double measure(const ModelStructure& s, const Vector& x) {
  return x(s.level_index()) + x(s.trend_index()) + x(s.oldest_seasonal_index());
}

/// A x without forming A: level += trend, seasonal slots rotate.
void transition_apply(const ModelStructure& s, std::span<const double> x, std::span<double> out);
/// A^k x by repeated application.
Vector transition_power_apply(const ModelStructure& s, const Vector& x, int k);
/// A^{-1} x.
Vector transition_inverse_apply(const ModelStructure& s, const Vector& x);
/// Dense A^k.
Matrix transition_power(const ModelStructure& s, int k);

/// a_j such that a_j . x == w . (A^j x).
Vector design_row(const ModelStructure& s, int j);

CellGeometry build_cell_geometry(const ModelStructure& s, int half_width, double decay = 0.9);

/// Entry r + K is d_{t+r} alpha_r; d is zero outside [0, T] and at missing points.
Vector window_weights(const CellGeometry& g, const TimeSeries& ts, std::ptrdiff_t center);

}  // namespace escells
