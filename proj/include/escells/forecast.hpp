#pragma once
// Forecasting by simulating sample paths from empirical noise pools.

#include "escells/structure.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace escells {

/// Residuals with the time index they belong to.
struct ResidualSeries {
  std::vector<std::size_t> times;
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

struct NoisePools {
  std::vector<double> residuals;
  std::vector<Vector> increments;
};

/// eps_t = y_t - w . xc_{t-1} for every observed t >= 1.
ResidualSeries extract_residuals(const TimeSeries& ts, std::span<const Vector> centered,
                                 const ModelStructure& s);

/// g_t = xc_t - A xc_{t-1}, t = 1..T.
std::vector<Vector> extract_increments(std::span<const Vector> centered, const ModelStructure& s);

/// Pools with the first and last `trim` time points dropped.
NoisePools build_pools(const TimeSeries& ts, std::span<const Vector> centered,
                       const ModelStructure& s, int trim);

enum class SimulationMode { IncrementsOnly, IncrementsAndResiduals };
enum class ResidualSource { Empirical, Gaussian };

struct SimulationOptions {
  SimulationMode mode = SimulationMode::IncrementsAndResiduals;
  ResidualSource residual_source = ResidualSource::Empirical;
  int threads = 1;
};

/// Path-major storage: value of path i at horizon h (1-based) is at
/// i * horizon + (h - 1).
struct PathEnsemble {
  int n_paths = 0;
  int horizon = 0;
  std::vector<double> level;
  std::vector<double> trend;
  std::vector<double> seasonal;     // seasonal slot measured at T+h
  std::vector<double> signal;       // w . x_{T+h-1}
  std::vector<double> observation;  // signal + residual draw (equals signal without residuals)
  std::size_t index(int path, int h) const {
    return static_cast<std::size_t>(path) * horizon + (h - 1);
  }
  friend bool operator==(const PathEnsemble&, const PathEnsemble&) = default;
};

/// Independent generator for (seed, path, stream); the mapping is fixed so
/// ensembles do not depend on scheduling.
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

PathEnsemble simulate_paths(const ModelStructure& s, const Vector& final_state,
                            const NoisePools& pools, int horizon, int n_paths, std::uint64_t seed,
                            const SimulationOptions& options = {});

/// Robust scale of a pool: 1.4826 * median absolute deviation.
double robust_scale(std::span<const double> values);

struct Band {
  std::vector<double> lower;
  std::vector<double> upper;
  friend bool operator==(const Band&, const Band&) = default;
};

/// Nearest-rank quantiles at (1-level)/2 and 1-(1-level)/2 per horizon.
/// `values` is path-major like PathEnsemble.
Band quantile_bands(std::span<const double> values, int n_paths, int horizon, double level);

/// Monte Carlo standard error of the band endpoints, estimated from order
/// statistics a binomial standard deviation away from each endpoint rank.
Band quantile_standard_error(std::span<const double> values, int n_paths, int horizon, double level);

std::vector<double> ensemble_mean(std::span<const double> values, int n_paths, int horizon);

struct ComponentForecast {
  std::vector<double> mean;
  Band band;
};

struct ForecastResult {
  int horizon = 0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  double level = 0.99;
  std::vector<double> mean;  // observable
  Band inner;                // increment uncertainty only
  Band outer;                // increments and residuals
  ComponentForecast level_component;
  ComponentForecast trend_component;
  ComponentForecast seasonal_component;
};

ForecastResult summarize(const PathEnsemble& ensemble, std::uint64_t seed, double level);

/// Simulates with and without residuals from the same increment draws and
/// summarizes both bands.
ForecastResult forecast(const ModelStructure& s, const Vector& final_state, const NoisePools& pools,
                        int horizon, int n_paths, std::uint64_t seed, double level,
                        const SimulationOptions& options = {});

}  // namespace escells
