#pragma once
// End-to-end ES-Cells fit: assemble, solve, center, decompose, extract pools.

#include "escells/analytics.hpp"
#include "escells/forecast.hpp"
#include "escells/solver.hpp"

#include <optional>

namespace escells {

struct FitOptions {
  int period = 12;
  std::optional<int> half_width;  // defaults to the period
  double decay = 0.9;
  double lambda1 = 1.0;
  double lambda2 = 10.0;
  DataLoss loss = DataLoss::Absolute;
  SolverConfig solver;
  std::optional<int> pool_trim;  // defaults to the half width

  int resolved_half_width() const { return half_width.value_or(period); }
  int resolved_trim() const { return pool_trim.value_or(resolved_half_width()); }
};

struct FitResult {
  FitOptions options;
  ModelStructure structure;
  CellGeometry geometry;
  TimeSeries series;
  StateSequence raw;       // xhat_{-K}..xhat_{T-K}
  StateSequence centered;  // xc_0..xc_T
  ResidualSeries residuals;
  std::vector<Vector> increments;
  NoisePools pools;
  Decomposition decomposition;
  SolverStats stats;
};

/// Throws std::invalid_argument when fewer than p + 2 points are observed.
FitResult fit_escells(const TimeSeries& ts, const FitOptions& options);

/// Rebuilds the derived quantities of a fit from its raw states.
FitResult finish_fit(const TimeSeries& ts, const FitOptions& options, StateSequence raw, SolverStats stats);

}  // namespace escells
