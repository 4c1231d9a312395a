#pragma once
// Forecast-accuracy comparison of Holt-Winters, robust Holt-Winters and
// ES-Cells on a held-out segment.

#include "escells/analytics.hpp"
#include "escells/baselines.hpp"
#include "escells/fit.hpp"
#include "escells/synth.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace escells {

enum class Method { HoltWinters, RobustHoltWinters, EsCells };

std::string method_name(Method m);  // "hw", "rhw", "escells"
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_separated);

/// Produces `horizon` point forecasts from a training segment.
using Forecaster = std::function<std::vector<double>(const TimeSeries& train, int horizon)>;

struct BenchmarkOptions {
  std::vector<Method> methods{Method::HoltWinters, Method::RobustHoltWinters, Method::EsCells};
  std::size_t split = 0;  // first held-out index
  int horizon = 0;
  int window = 10;
  FitOptions escells;                      // period is taken from here for all methods
  HWFitOptions hw;
  RobustFilterParams robust;
  bool relative_sigma0 = true;  // robust.sigma0 is scaled by the median |y| of the training segment
  std::vector<std::pair<std::string, Forecaster>> extra;  // additional named forecasters
  int threads = 1;
};

struct MethodScore {
  std::string name;
  std::vector<double> forecast;  // one per held-out position
  MapeSeries mape;
  double median_mape = 0.0;
  double mean_mape = 0.0;
  std::optional<SolverStatus> status;  // set for ES-Cells
};

/// Comparison of one method against ES-Cells over the shared MAPE positions.
struct RatioSummary {
  std::string name;
  double median_ratio = 0.0;         // median of method / ES-Cells MAPE
  double dominance_fraction = 0.0;   // share of positions with ES-Cells <= method
  std::size_t positions = 0;
};

struct BenchmarkTable {
  std::size_t split = 0;
  int horizon = 0;
  int window = 0;
  std::vector<double> actual;
  std::vector<MethodScore> methods;
  std::vector<RatioSummary> ratios;  // empty when ES-Cells is not among the methods
  double wall_time_s = 0.0;

  const MethodScore* find(const std::string& name) const;
};

/// Trains on ts[0, split) and scores against ts[split, split + horizon),
/// or against `reference` over the same range when it is given (full-length).
/// Throws std::invalid_argument when the split leaves fewer than `horizon`
/// points, when any held-out actual is missing, or on an unknown setup.
BenchmarkTable run_benchmark(const TimeSeries& ts, const BenchmarkOptions& options,
                             std::span<const double> reference = {});

BenchmarkTable run_benchmark(const SynthConfig& config, const BenchmarkOptions& options);

/// Individual forecasters, exposed for reuse.
std::vector<double> forecast_hw(const TimeSeries& train, const ModelStructure& s,
                                const HWFitOptions& options, int horizon);
std::vector<double> forecast_rhw(const TimeSeries& train, const ModelStructure& s,
                                 const HWFitOptions& options, const RobustFilterParams& robust,
                                 int horizon, bool relative_sigma0 = true);
std::vector<double> forecast_escells(const TimeSeries& train, const FitOptions& options, int horizon,
                                     SolverStatus* status = nullptr);

}  // namespace escells
