#include "escells/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace escells {

std::string method_name(Method m) {
  switch (m) {
    case Method::HoltWinters: return "hw";
    case Method::RobustHoltWinters: return "rhw";
    case Method::EsCells: return "escells";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "hw") return Method::HoltWinters;
  if (name == "rhw") return Method::RobustHoltWinters;
  if (name == "escells") return Method::EsCells;
  throw std::invalid_argument("unknown method '" + name + "' (expected hw, rhw or escells)");
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

const MethodScore* BenchmarkTable::find(const std::string& name) const {
  for (const MethodScore& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

namespace {

// HW recursions need every value; gaps are bridged linearly.
TimeSeries bridged(const TimeSeries& ts) {
  if (ts.fully_observed()) return ts;
  return TimeSeries(linear_interpolate(ts));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

Vector final_hw_state(const TimeSeries& train, const ModelStructure& s, const HWParams& params) {
  const HWFilterOutput out = hw_filter(train, s, params);
  return out.states.back();
}

}  // namespace

std::vector<double> forecast_hw(const TimeSeries& train, const ModelStructure& s,
                                const HWFitOptions& options, int horizon) {
  const TimeSeries full = bridged(train);
  const HWFitResult fitted = hw_fit(full, s, options);
  return hw_point_forecast(s, final_hw_state(full, s, fitted.params), horizon);
}

std::vector<double> forecast_rhw(const TimeSeries& train, const ModelStructure& s,
                                 const HWFitOptions& options, const RobustFilterParams& robust,
                                 int horizon, bool relative_sigma0) {
  const TimeSeries full = bridged(train);
  RobustFilterParams rp = robust;
  if (relative_sigma0) {
    std::vector<double> mags;
    mags.reserve(full.size());
    for (std::size_t t = 0; t < full.size(); ++t) mags.push_back(std::fabs(full.value(t)));
    const double scale = median_of(std::move(mags));
    if (scale > 0.0) rp.sigma0 *= scale;
  }
  // Clean with the hand-tuned filter, then fit and run classic HW on the result.
  const HWParams initial = HWParams::hand_tuned(hw_initial_state(full, s));
  const TimeSeries cleaned = rhw_clean(full, s, initial, rp);
  const HWFitResult fitted = hw_fit(cleaned, s, options);
  return hw_point_forecast(s, final_hw_state(cleaned, s, fitted.params), horizon);
}

std::vector<double> forecast_escells(const TimeSeries& train, const FitOptions& options, int horizon,
                                     SolverStatus* status) {
  const FitResult fit = fit_escells(train, options);
  if (status) *status = fit.stats.status;
  return hw_point_forecast(fit.structure, fit.centered.states.back(), horizon);
}

BenchmarkTable run_benchmark(const TimeSeries& ts, const BenchmarkOptions& options,
                             std::span<const double> reference) {
  const auto started = std::chrono::steady_clock::now();
  if (options.horizon < 1) throw std::invalid_argument("benchmark: horizon must be >= 1");
  if (options.window < 1) throw std::invalid_argument("benchmark: window must be >= 1");
  if (options.window > options.horizon)
    throw std::invalid_argument("benchmark: window longer than the horizon leaves nothing to score");
  if (options.split < 1 || options.split > ts.size() ||
      ts.size() - options.split < static_cast<std::size_t>(options.horizon))
    throw std::invalid_argument("benchmark: split leaves fewer than horizon points for evaluation");
  if (!reference.empty() && reference.size() != ts.size())
    throw std::invalid_argument("benchmark: reference must have the series length");
  if (options.methods.empty() && options.extra.empty())
    throw std::invalid_argument("benchmark: no methods");

  BenchmarkTable table;
  table.split = options.split;
  table.horizon = options.horizon;
  table.window = options.window;
  for (int h = 0; h < options.horizon; ++h) {
    const std::size_t t = options.split + static_cast<std::size_t>(h);
    double a;
    if (!reference.empty()) {
      a = reference[t];
    } else {
      if (!ts.observed(static_cast<std::ptrdiff_t>(t)))
        throw std::invalid_argument("benchmark: held-out value at index " + std::to_string(t) + " is missing");
      a = ts.value(t);
    }
    table.actual.push_back(a);
  }

  const TimeSeries train = ts.head(options.split);
  const ModelStructure s = build_structure(options.escells.period);

  struct Job {
    std::string name;
    Forecaster run;
    bool escells = false;
  };
  std::vector<Job> jobs;
  std::vector<std::optional<SolverStatus>> statuses;
  for (Method m : options.methods) {
    Job j{method_name(m), {}, m == Method::EsCells};
    switch (m) {
      case Method::HoltWinters:
        j.run = [&](const TimeSeries& tr, int h) { return forecast_hw(tr, s, options.hw, h); };
        break;
      case Method::RobustHoltWinters:
        j.run = [&](const TimeSeries& tr, int h) {
          return forecast_rhw(tr, s, options.hw, options.robust, h, options.relative_sigma0);
        };
        break;
      case Method::EsCells:
        break;
    }
    jobs.push_back(std::move(j));
  }
  for (const auto& [name, f] : options.extra) jobs.push_back(Job{name, f, false});

  std::vector<std::vector<double>> forecasts(jobs.size());
  statuses.assign(jobs.size(), std::nullopt);
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto run_job = [&](std::size_t k) {
    try {
      if (jobs[k].escells) {
        SolverStatus st{};
        forecasts[k] = forecast_escells(train, options.escells, options.horizon, &st);
        statuses[k] = st;
      } else {
        forecasts[k] = jobs[k].run(train, options.horizon);
      }
      if (forecasts[k].size() != static_cast<std::size_t>(options.horizon))
        throw std::runtime_error("benchmark: method '" + jobs[k].name + "' returned the wrong number of forecasts");
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_job(k);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = static_cast<std::size_t>(w); k < jobs.size(); k += static_cast<std::size_t>(threads)) run_job(k);
      });
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    MethodScore score;
    score.name = jobs[k].name;
    score.forecast = std::move(forecasts[k]);
    score.mape = mape_sliding(table.actual, score.forecast, options.window);
    score.median_mape = median_of(score.mape.values);
    double sum = 0.0;
    for (double v : score.mape.values) sum += v;
    score.mean_mape = score.mape.values.empty() ? 0.0 : sum / static_cast<double>(score.mape.values.size());
    score.status = statuses[k];
    table.methods.push_back(std::move(score));
  }

  if (const MethodScore* es = table.find("escells")) {
    for (const MethodScore& other : table.methods) {
      if (&other == es) continue;
      RatioSummary r;
      r.name = other.name;
      std::vector<double> ratios;
      std::size_t wins = 0;
      // Both series skip the same zero-actual windows, so positions line up.
      for (std::size_t i = 0; i < es->mape.values.size(); ++i) {
        const double e = es->mape.values[i];
        const double o = other.mape.values[i];
        if (e <= o) ++wins;
        ratios.push_back(e > 0.0 ? o / e : (o > 0.0 ? std::numeric_limits<double>::infinity() : 1.0));
      }
      r.positions = ratios.size();
      r.median_ratio = median_of(std::move(ratios));
      r.dominance_fraction = r.positions ? static_cast<double>(wins) / static_cast<double>(r.positions) : 0.0;
      table.ratios.push_back(r);
    }
  }
  table.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return table;
}

BenchmarkTable run_benchmark(const SynthConfig& config, const BenchmarkOptions& options) {
  const SynthData data = synth_generate(config);
  BenchmarkOptions opts = options;
  if (opts.escells.period != config.period) opts.escells.period = config.period;
  return run_benchmark(data.series, opts);
}

}  // namespace escells
