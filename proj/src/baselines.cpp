#include "escells/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace escells {

HWParams HWParams::hand_tuned(Vector x0) {
  HWParams p;
  p.alpha = 0.05;
  p.beta = 0.01;
  p.gamma = 0.15;
  p.x0 = std::move(x0);
  return p;
}

Vector ssoe_gain(const ModelStructure& s, const HWParams& p) {
  Vector g = Vector::Zero(s.state_dim);
  g(0) = p.alpha;
  g(1) = p.alpha * p.beta;
  g(2) = p.gamma;
  return g;
}

namespace {

void check_params(const ModelStructure& s, const HWParams& p) {
  for (double v : {p.alpha, p.beta, p.gamma})
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("HWParams: smoothing parameters must lie in [0, 1]");
  if (p.x0.size() != s.state_dim) throw std::invalid_argument("HWParams: x0 dimension mismatch");
}

void require_full(const TimeSeries& ts, const char* who) {
  if (!ts.fully_observed())
    throw std::invalid_argument(std::string(who) + ": series has missing observations");
}

// One Holt-Winters update in place; returns the one-step prediction for y.
inline double hw_step(Vector& x, double y, double alpha, double beta, double gamma, double* prediction) {
  const int n = static_cast<int>(x.size());
  const double level = x(0), trend = x(1), oldest = x(n - 1);
  const double pred = level + trend + oldest;
  if (prediction) *prediction = pred;
  const double new_level = alpha * (y - oldest) + (1.0 - alpha) * (level + trend);
  const double new_trend = beta * (new_level - level) + (1.0 - beta) * trend;
  const double new_seasonal = gamma * (y - level - trend) + (1.0 - gamma) * oldest;
  for (int i = n - 1; i > 2; --i) x(i) = x(i - 1);
  x(2) = new_seasonal;
  x(0) = new_level;
  x(1) = new_trend;
  return y - pred;
}

}  // namespace

HWFilterOutput hw_filter(const TimeSeries& ts, const ModelStructure& s, const HWParams& params) {
  check_params(s, params);
  require_full(ts, "hw_filter");
  HWFilterOutput out;
  out.states.reserve(ts.size());
  out.predictions.reserve(ts.size());
  out.residuals.reserve(ts.size());
  Vector x = params.x0;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    double pred = 0.0;
    out.residuals.push_back(hw_step(x, ts.value(t), params.alpha, params.beta, params.gamma, &pred));
    out.predictions.push_back(pred);
    out.states.push_back(x);
  }
  return out;
}

double hw_sse(const TimeSeries& ts, const ModelStructure& s, const HWParams& params) {
  check_params(s, params);
  require_full(ts, "hw_sse");
  Vector x = params.x0;
  double sse = 0.0;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    const double e = hw_step(x, ts.value(t), params.alpha, params.beta, params.gamma, nullptr);
    sse += e * e;
  }
  return sse;
}

Vector hw_initial_state(const TimeSeries& ts, const ModelStructure& s) {
  const int p = s.period;
  const std::size_t m = static_cast<std::size_t>(p + 2);
  if (ts.size() < m) throw std::invalid_argument("hw_initial_state: series shorter than p+2");
  std::vector<double> y;
  for (std::size_t t = 0; t < m; ++t)
    if (ts.observed(static_cast<std::ptrdiff_t>(t))) y.push_back(ts.value(t));
  if (y.size() < 2) throw std::invalid_argument("hw_initial_state: too few observations in the first p+2 points");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double slope = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) slope += y[i] - y[i - 1];
  slope /= static_cast<double>(y.size() - 1);

  Vector x0 = Vector::Zero(s.state_dim);
  x0(0) = mean;
  x0(1) = slope;
  // First-period deviations. Observation t is measured against the oldest slot
  // after t rotations, so y_t (t < p) belongs in slot n-1-t of x0.
  double period_mean = 0.0;
  int count = 0;
  for (int t = 0; t < p; ++t)
    if (ts.observed(t)) { period_mean += ts.value(t); ++count; }
  if (count > 0) period_mean /= count;
  for (int t = 0; t < p; ++t)
    x0(s.state_dim - 1 - t) = ts.observed(t) ? ts.value(t) - period_mean : 0.0;
  return x0;
}

namespace {

struct Profile {
  double sse = std::numeric_limits<double>::infinity();
  Vector x0;
};

// The predictions are affine in x0 for fixed smoothing parameters, so the
// best x0 is a linear least-squares problem.
Profile profile_x0(const TimeSeries& ts, const ModelStructure& s, double a, double b, double g) {
  const int n = s.state_dim;
  const std::size_t T = ts.size();
  Matrix J(T, n + 1);
  for (int col = 0; col <= n; ++col) {
    Vector x = Vector::Zero(n);
    if (col < n) x(col) = 1.0;
    // Column n: response to the data with x0 = 0; other columns: response to
    // a unit initial state with zero data (linearity splits the two).
    for (std::size_t t = 0; t < T; ++t) {
      const double y = col == n ? ts.value(t) : 0.0;
      double pred = 0.0;
      hw_step(x, y, a, b, g, &pred);
      J(static_cast<Eigen::Index>(t), col) = pred;
    }
  }
  Vector target(T);
  for (std::size_t t = 0; t < T; ++t) target(static_cast<Eigen::Index>(t)) = ts.value(t) - J(static_cast<Eigen::Index>(t), n);
  Profile out;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(J.leftCols(n));
  out.x0 = cod.solve(target);
  HWParams p{a, b, g, out.x0};
  out.sse = hw_sse(ts, s, p);
  return out;
}

}  // namespace

HWFitResult hw_fit(const TimeSeries& ts, const ModelStructure& s, const HWFitOptions& options) {
  require_full(ts, "hw_fit");
  if (ts.size() < static_cast<std::size_t>(s.period + 2))
    throw std::invalid_argument("hw_fit: series shorter than p+2");
  const Vector init = hw_initial_state(ts, s);
  HWFitResult result;
  if (!options.fit) {
    result.params = HWParams::hand_tuned(init);
    result.sse = hw_sse(ts, s, result.params);
    result.evaluations = 1;
    return result;
  }

  const auto evaluate = [&](const std::array<double, 3>& th) {
    ++result.evaluations;
    if (options.profile_initial_state) return profile_x0(ts, s, th[0], th[1], th[2]);
    Profile pr;
    pr.x0 = init;
    pr.sse = hw_sse(ts, s, HWParams{th[0], th[1], th[2], init});
    return pr;
  };

  struct Candidate {
    std::array<double, 3> theta;
    Profile profile;
  };
  std::vector<Candidate> grid;
  const int gp = std::max(options.grid_points, 2);
  for (int i = 0; i < gp; ++i)
    for (int j = 0; j < gp; ++j)
      for (int k = 0; k < gp; ++k) {
        std::array<double, 3> th{double(i) / (gp - 1), double(j) / (gp - 1), double(k) / (gp - 1)};
        grid.push_back({th, evaluate(th)});
      }
  std::stable_sort(grid.begin(), grid.end(),
                   [](const Candidate& a, const Candidate& b) { return a.profile.sse < b.profile.sse; });

  Candidate best = grid.front();
  const int starts = std::min<int>(options.refine_starts, static_cast<int>(grid.size()));
  for (int st = 0; st < starts; ++st) {
    Candidate cur = grid[st];
    double step = 0.5 / (gp - 1);
    for (int sweep = 0; sweep < options.max_sweeps && step >= options.min_step; ++sweep) {
      bool improved = false;
      for (int c = 0; c < 3; ++c) {
        for (double dir : {1.0, -1.0}) {
          std::array<double, 3> th = cur.theta;
          th[c] = std::clamp(th[c] + dir * step, 0.0, 1.0);
          if (th[c] == cur.theta[c]) continue;
          Profile pr = evaluate(th);
          if (pr.sse < cur.profile.sse) {
            cur = {th, std::move(pr)};
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur.profile.sse < best.profile.sse) best = cur;
  }
  result.params = HWParams{best.theta[0], best.theta[1], best.theta[2], best.profile.x0};
  result.sse = best.profile.sse;
  return result;
}

std::vector<double> hw_point_forecast(const ModelStructure& s, const Vector& final_state, int horizon) {
  if (horizon < 1) throw std::invalid_argument("hw_point_forecast: horizon must be >= 1");
  std::vector<double> out;
  out.reserve(horizon);
  Vector x = final_state;
  for (int h = 1; h <= horizon; ++h) {
    out.push_back(measure(s, x));
    x = s.A * x;
  }
  return out;
}

ForecastResult hw_forecast(const ModelStructure& s, const Vector& final_state, const HWParams& params,
                           std::span<const double> residual_pool, int horizon, int n_paths,
                           std::uint64_t seed, double level, int threads) {
  check_params(s, params);
  if (horizon < 1) throw std::invalid_argument("hw_forecast: horizon must be >= 1");
  if (final_state.size() != s.state_dim) throw std::invalid_argument("hw_forecast: state dimension mismatch");
  const std::vector<double> mean = hw_point_forecast(s, final_state, horizon);
  if (n_paths <= 0) {
    ForecastResult r;
    r.horizon = horizon;
    r.seed = seed;
    r.level = level;
    r.mean = mean;
    r.inner = r.outer = Band{mean, mean};
    return r;
  }
  if (residual_pool.empty()) throw std::invalid_argument("hw_forecast: empty residual pool");

  // Single source of error: each innovation enters the observation and the
  // state update, so one draw per step drives both.
  const Vector gain = ssoe_gain(s, params);
  PathEnsemble e;
  e.n_paths = n_paths;
  e.horizon = horizon;
  const std::size_t total = static_cast<std::size_t>(n_paths) * horizon;
  e.level.resize(total);
  e.trend.resize(total);
  e.seasonal.resize(total);
  e.signal.resize(total);
  e.observation.resize(total);
  const auto run = [&](int first, int last) {
    for (int path = first; path < last; ++path) {
      auto rng = path_stream(seed, static_cast<std::uint64_t>(path), 1);
      std::uniform_int_distribution<std::size_t> pick(0, residual_pool.size() - 1);
      Vector x = final_state;
      for (int h = 1; h <= horizon; ++h) {
        const double eps = residual_pool[pick(rng)];
        const double signal = measure(s, x);
        x = s.A * x + gain * eps;
        const std::size_t k = e.index(path, h);
        e.level[k] = x(0);
        e.trend[k] = x(1);
        e.seasonal[k] = x(2);
        e.signal[k] = signal;
        e.observation[k] = signal + eps;
      }
    }
  };
  threads = std::clamp(threads, 1, n_paths);
  if (threads == 1) {
    run(0, n_paths);
  } else {
    std::vector<std::thread> workers;
    for (int w = 0; w < threads; ++w)
      workers.emplace_back(run, int(static_cast<long long>(n_paths) * w / threads),
                           int(static_cast<long long>(n_paths) * (w + 1) / threads));
    for (auto& t : workers) t.join();
  }
  ForecastResult r = summarize(e, seed, level);
  r.mean = mean;
  return r;
}

double biweight_rho(double x, double k) {
  // c_k makes the expectation under a standard normal equal one.
  static thread_local double cached_k = -1.0, cached_c = 0.0;
  if (k != cached_k) {
    const int steps = 4000;
    const double h = k / steps;
    const auto integrand = [k](double z) {
      const double u = 1.0 - (z / k) * (z / k);
      return (1.0 - u * u * u) * std::exp(-0.5 * z * z);
    };
    double acc = integrand(0.0) + integrand(k);
    for (int i = 1; i < steps; ++i) acc += integrand(i * h) * (i % 2 ? 4.0 : 2.0);
    const double inside = 2.0 * acc * h / 3.0 / std::sqrt(2.0 * M_PI);
    const double outside = std::erfc(k / std::sqrt(2.0));
    cached_c = 1.0 / (inside + outside);
    cached_k = k;
  }
  if (std::fabs(x) >= k) return cached_c;
  const double u = 1.0 - (x / k) * (x / k);
  return cached_c * (1.0 - u * u * u);
}

RobustFilterTrace rhw_filter(const TimeSeries& ts, const ModelStructure& s, const HWParams& params,
                             const RobustFilterParams& rp) {
  check_params(s, params);
  require_full(ts, "rhw_clean");
  if (!(rp.sigma0 > 0.0)) throw std::invalid_argument("rhw_clean: sigma0 must be positive");
  if (!(rp.lambda_sigma > 0.0 && rp.lambda_sigma < 1.0))
    throw std::invalid_argument("rhw_clean: lambda_sigma must lie in (0, 1)");
  if (!(rp.huber_k > 0.0)) throw std::invalid_argument("rhw_clean: huber_k must be positive");

  RobustFilterTrace out;
  std::vector<double> cleaned(ts.size());
  out.predictions.reserve(ts.size());
  out.scales.reserve(ts.size());
  Vector x = params.x0;
  double sigma = rp.sigma0;
  const int n = s.state_dim;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    const double y = ts.value(t);
    const double pred = x(0) + x(1) + x(n - 1);
    const double r = y - pred;
    const double bound = rp.huber_k * sigma;
    const double y_clean = std::fabs(r) <= bound ? y : pred + std::copysign(bound, r);
    cleaned[t] = y_clean;
    out.predictions.push_back(pred);
    out.scales.push_back(sigma);
    hw_step(x, y_clean, params.alpha, params.beta, params.gamma, nullptr);
    const double var = rp.lambda_sigma * biweight_rho(r / sigma, rp.huber_k) * sigma * sigma +
                       (1.0 - rp.lambda_sigma) * sigma * sigma;
    sigma = std::sqrt(var);
  }
  out.cleaned = TimeSeries(std::move(cleaned));
  return out;
}

TimeSeries rhw_clean(const TimeSeries& ts, const ModelStructure& s, const HWParams& params,
                     const RobustFilterParams& rparams) {
  return rhw_filter(ts, s, params, rparams).cleaned;
}

}  // namespace escells
