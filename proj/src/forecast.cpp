#include "escells/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace escells {

ResidualSeries extract_residuals(const TimeSeries& ts, std::span<const Vector> centered,
                                 const ModelStructure& s) {
  if (centered.size() != ts.size())
    throw std::invalid_argument("extract_residuals: need one centered state per time point");
  ResidualSeries out;
  for (std::size_t t = 1; t < ts.size(); ++t) {
    if (!ts.observed(static_cast<std::ptrdiff_t>(t))) continue;
    out.times.push_back(t);
    out.values.push_back(ts.value(t) - measure(s, centered[t - 1]));
  }
  return out;
}

std::vector<Vector> extract_increments(std::span<const Vector> centered, const ModelStructure& s) {
  std::vector<Vector> out;
  if (centered.size() < 2) return out;
  out.reserve(centered.size() - 1);
  for (std::size_t t = 1; t < centered.size(); ++t)
    out.push_back(centered[t] - s.A * centered[t - 1]);
  return out;
}

NoisePools build_pools(const TimeSeries& ts, std::span<const Vector> centered,
                       const ModelStructure& s, int trim) {
  if (trim < 0) throw std::invalid_argument("build_pools: negative trim");
  const std::size_t T = ts.size() - 1;
  const auto keep = [&](std::size_t t) {
    return t >= static_cast<std::size_t>(trim) && t + static_cast<std::size_t>(trim) <= T;
  };
  NoisePools pools;
  const ResidualSeries res = extract_residuals(ts, centered, s);
  for (std::size_t i = 0; i < res.size(); ++i)
    if (keep(res.times[i])) pools.residuals.push_back(res.values[i]);
  const std::vector<Vector> inc = extract_increments(centered, s);
  for (std::size_t i = 0; i < inc.size(); ++i)
    if (keep(i + 1)) pools.increments.push_back(inc[i]);
  return pools;
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double robust_scale(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const auto median_of = [](std::vector<double>& x) {
    const std::size_t mid = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + mid, x.end());
    double m = x[mid];
    if (x.size() % 2 == 0) m = 0.5 * (m + *std::max_element(x.begin(), x.begin() + mid));
    return m;
  };
  const double med = median_of(v);
  for (double& x : v) x = std::fabs(x - med);
  return 1.4826 * median_of(v);
}

namespace {

void simulate_range(const ModelStructure& s, const Vector& final_state, const NoisePools& pools,
                    int horizon, std::uint64_t seed, const SimulationOptions& options,
                    double gaussian_scale, int first, int last, PathEnsemble& out) {
  const int n = s.state_dim;
  const bool with_residuals = options.mode == SimulationMode::IncrementsAndResiduals;
  std::vector<double> x(n), next(n);
  for (int path = first; path < last; ++path) {
    auto g_rng = path_stream(seed, static_cast<std::uint64_t>(path), 0);
    auto eps_rng = path_stream(seed, static_cast<std::uint64_t>(path), 1);
    std::uniform_int_distribution<std::size_t> pick_g(0, pools.increments.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_eps(
        0, pools.residuals.empty() ? 0 : pools.residuals.size() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::copy(final_state.data(), final_state.data() + n, x.begin());
    for (int h = 1; h <= horizon; ++h) {
      const std::size_t k = out.index(path, h);
      out.level[k] = x[0];
      out.trend[k] = x[1];
      out.seasonal[k] = x[n - 1];
      const double signal = x[0] + x[1] + x[n - 1];
      transition_apply(s, x, next);
      const Vector& g = pools.increments[pick_g(g_rng)];
      for (int i = 0; i < n; ++i) next[i] += g(i);
      x.swap(next);
      double eps = 0.0;
      if (with_residuals) {
        eps = options.residual_source == ResidualSource::Empirical
                  ? pools.residuals[pick_eps(eps_rng)]
                  : gaussian_scale * normal(eps_rng);
      }
      out.signal[k] = signal;
      out.observation[k] = signal + eps;
    }
  }
}

}  // namespace

PathEnsemble simulate_paths(const ModelStructure& s, const Vector& final_state,
                            const NoisePools& pools, int horizon, int n_paths, std::uint64_t seed,
                            const SimulationOptions& options) {
  if (horizon < 1) throw std::invalid_argument("simulate_paths: horizon must be >= 1");
  if (n_paths < 1) throw std::invalid_argument("simulate_paths: need at least one path");
  if (final_state.size() != s.state_dim)
    throw std::invalid_argument("simulate_paths: final state dimension mismatch");
  if (pools.increments.empty()) throw std::invalid_argument("simulate_paths: empty increment pool");
  const bool with_residuals = options.mode == SimulationMode::IncrementsAndResiduals;
  if (with_residuals && pools.residuals.empty())
    throw std::invalid_argument("simulate_paths: empty residual pool");
  for (const Vector& g : pools.increments)
    if (g.size() != s.state_dim) throw std::invalid_argument("simulate_paths: increment dimension mismatch");

  PathEnsemble out;
  out.n_paths = n_paths;
  out.horizon = horizon;
  const std::size_t total = static_cast<std::size_t>(n_paths) * horizon;
  out.level.resize(total);
  out.trend.resize(total);
  out.seasonal.resize(total);
  out.signal.resize(total);
  out.observation.resize(total);

  const double gaussian_scale =
      options.residual_source == ResidualSource::Gaussian ? robust_scale(pools.residuals) : 0.0;
  const int threads = std::clamp(options.threads, 1, n_paths);
  if (threads == 1) {
    simulate_range(s, final_state, pools, horizon, seed, options, gaussian_scale, 0, n_paths, out);
    return out;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    const int first = static_cast<int>(static_cast<long long>(n_paths) * w / threads);
    const int last = static_cast<int>(static_cast<long long>(n_paths) * (w + 1) / threads);
    workers.emplace_back([&, first, last] {
      simulate_range(s, final_state, pools, horizon, seed, options, gaussian_scale, first, last, out);
    });
  }
  for (auto& t : workers) t.join();
  return out;
}

namespace {

std::size_t tail_rank(double level, int n_paths) {
  const double tail = 0.5 * (1.0 - level);
  auto k = static_cast<std::size_t>(std::floor(tail * n_paths + 1e-9));
  return std::min(k, static_cast<std::size_t>(n_paths - 1) / 2);
}

std::vector<double> column(std::span<const double> values, int n_paths, int horizon, int h) {
  std::vector<double> col(n_paths);
  for (int i = 0; i < n_paths; ++i) col[i] = values[static_cast<std::size_t>(i) * horizon + (h - 1)];
  return col;
}

void check_ensemble(std::span<const double> values, int n_paths, int horizon, double level) {
  if (n_paths < 1 || horizon < 1 || values.empty()) throw std::invalid_argument("quantile_bands: empty ensemble");
  if (values.size() != static_cast<std::size_t>(n_paths) * horizon)
    throw std::invalid_argument("quantile_bands: ensemble shape mismatch");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile_bands: level must lie in (0, 1)");
}

}  // namespace

Band quantile_bands(std::span<const double> values, int n_paths, int horizon, double level) {
  check_ensemble(values, n_paths, horizon, level);
  const std::size_t k = tail_rank(level, n_paths);
  Band band;
  band.lower.resize(horizon);
  band.upper.resize(horizon);
  for (int h = 1; h <= horizon; ++h) {
    std::vector<double> col = column(values, n_paths, horizon, h);
    std::sort(col.begin(), col.end());
    band.lower[h - 1] = col[k];
    band.upper[h - 1] = col[n_paths - 1 - k];
  }
  return band;
}

Band quantile_standard_error(std::span<const double> values, int n_paths, int horizon, double level) {
  check_ensemble(values, n_paths, horizon, level);
  const double tail = 0.5 * (1.0 - level);
  const std::size_t k = tail_rank(level, n_paths);
  const auto spread = static_cast<std::size_t>(std::ceil(std::sqrt(n_paths * tail * (1.0 - tail))));
  const std::size_t last = static_cast<std::size_t>(n_paths - 1);
  Band se;
  se.lower.resize(horizon);
  se.upper.resize(horizon);
  for (int h = 1; h <= horizon; ++h) {
    std::vector<double> col = column(values, n_paths, horizon, h);
    std::sort(col.begin(), col.end());
    const auto half_width = [&](std::size_t rank) {
      const std::size_t lo = rank >= spread ? rank - spread : 0;
      const std::size_t hi = std::min(rank + spread, last);
      return 0.5 * (col[hi] - col[lo]);
    };
    se.lower[h - 1] = half_width(k);
    se.upper[h - 1] = half_width(last - k);
  }
  return se;
}

std::vector<double> ensemble_mean(std::span<const double> values, int n_paths, int horizon) {
  std::vector<double> mean(horizon, 0.0);
  for (int i = 0; i < n_paths; ++i)
    for (int h = 0; h < horizon; ++h) mean[h] += values[static_cast<std::size_t>(i) * horizon + h];
  for (double& m : mean) m /= n_paths;
  return mean;
}

ForecastResult summarize(const PathEnsemble& e, std::uint64_t seed, double level) {
  ForecastResult r;
  r.horizon = e.horizon;
  r.n_paths = e.n_paths;
  r.seed = seed;
  r.level = level;
  r.mean = ensemble_mean(e.observation, e.n_paths, e.horizon);
  r.inner = quantile_bands(e.signal, e.n_paths, e.horizon, level);
  r.outer = quantile_bands(e.observation, e.n_paths, e.horizon, level);
  const auto component = [&](const std::vector<double>& v) {
    return ComponentForecast{ensemble_mean(v, e.n_paths, e.horizon),
                             quantile_bands(v, e.n_paths, e.horizon, level)};
  };
  r.level_component = component(e.level);
  r.trend_component = component(e.trend);
  r.seasonal_component = component(e.seasonal);
  return r;
}

ForecastResult forecast(const ModelStructure& s, const Vector& final_state, const NoisePools& pools,
                        int horizon, int n_paths, std::uint64_t seed, double level,
                        const SimulationOptions& options) {
  return summarize(simulate_paths(s, final_state, pools, horizon, n_paths, seed, options), seed, level);
}

}  // namespace escells
