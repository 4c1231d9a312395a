#pragma once
// Classic additive Holt-Winters and the robust pre-filtered variant (RHW).

#include "escells/forecast.hpp"
#include "escells/structure.hpp"

#include <cstdint>
#include <vector>

namespace escells {

struct HWParams {
  double alpha = 0.05;
  double beta = 0.01;
  double gamma = 0.15;
  Vector x0;  // state before the first observation

  /// Hand-tuned values used when fitting is disabled.
  static HWParams hand_tuned(Vector x0);
};

struct RobustFilterParams {
  double sigma0 = 0.05;
  double lambda_sigma = 0.01;
  double huber_k = 2.0;
};

struct HWFilterOutput {
  std::vector<Vector> states;      // state after observing y_t, t = 0..T
  std::vector<double> predictions; // l_{t-1} + b_{t-1} + s_{t-p}
  std::vector<double> residuals;
};

/// SSOE gain: (alpha, alpha * beta, gamma, 0, ...).
Vector ssoe_gain(const ModelStructure& s, const HWParams& p);

HWFilterOutput hw_filter(const TimeSeries& ts, const ModelStructure& s, const HWParams& params);

/// Sum of squared one-step errors.
double hw_sse(const TimeSeries& ts, const ModelStructure& s, const HWParams& params);

/// Level = mean, trend = mean first difference, seasonal = de-meaned first period.
Vector hw_initial_state(const TimeSeries& ts, const ModelStructure& s);

struct HWFitOptions {
  bool fit = true;          // false: return the hand-tuned parameters
  int grid_points = 5;      // per smoothing parameter
  int refine_starts = 3;
  int max_sweeps = 200;
  double min_step = 1e-10;
  bool profile_initial_state = true;  // least-squares x0 for each candidate (alpha, beta, gamma)
};

struct HWFitResult {
  HWParams params;
  double sse = 0.0;
  int evaluations = 0;
};

HWFitResult hw_fit(const TimeSeries& ts, const ModelStructure& s, const HWFitOptions& options = {});

/// Mean path: SSOE propagation with zero innovations. Bands: paths with
/// innovations resampled from `residual_pool` and injected through the gain.
/// Inner band is the state-driven signal w . x_{h-1}; outer adds the
/// innovation of horizon h.
ForecastResult hw_forecast(const ModelStructure& s, const Vector& final_state,
                           const HWParams& params, std::span<const double> residual_pool,
                           int horizon, int n_paths, std::uint64_t seed, double level = 0.99,
                           int threads = 1);

/// Point forecast only.
std::vector<double> hw_point_forecast(const ModelStructure& s, const Vector& final_state, int horizon);

/// Sequential M-estimation pre-filter: clips each observation to within
/// huber_k scales of its one-step prediction while tracking a robust scale.
TimeSeries rhw_clean(const TimeSeries& ts, const ModelStructure& s, const HWParams& params,
                     const RobustFilterParams& rparams = {});

/// Robust scale trace and predictions from the same pass as rhw_clean.
struct RobustFilterTrace {
  TimeSeries cleaned;
  std::vector<double> predictions;
  std::vector<double> scales;  // scale used when clipping y_t
};
RobustFilterTrace rhw_filter(const TimeSeries& ts, const ModelStructure& s, const HWParams& params,
                             const RobustFilterParams& rparams = {});

/// Bounded biweight rho, saturating at |x| >= k, normalized so E[rho(Z)] = 1 under N(0,1).
double biweight_rho(double x, double k);

}  // namespace escells
