#pragma once
// The linked ES-Cells problem
//
//   min_x  sum_s ||D_s (Y_s - Acal x_s)||_1 + lambda1 |b . x_s|
//        + lambda2 sum_s ||A^K (A x_s - x_{s+1})||_2^2,     s = -K .. T-K
//
// State x_s sits one step before the first observation of its window, so the
// window of x_s covers y_{s+1} .. y_{s+2K+1} with y_{s+1+j} ~ w . A^j x_s and
// the centered state A^K x_{t-K} is the filtered state at time t.
//
// The objective is invariant under adding c * (1, 0, -1, ..., -1) to every
// state (level absorbs a constant seasonal offset). Solutions are reported in
// the gauge where the seasonal slots of all raw states sum to zero.

#include "escells/structure.hpp"

#include <chrono>
#include <sstream>
#include <cstdint>
#include <string>
#include <vector>

namespace escells {

enum class DataLoss { Absolute, Squared };

struct StateSequence {
  std::ptrdiff_t first_index = 0;  // time label of states[0]
  std::vector<Vector> states;
  std::size_t size() const { return states.size(); }
  const Vector& at(std::ptrdiff_t t) const { return states.at(static_cast<std::size_t>(t - first_index)); }
};

struct ProblemSpec {
  ModelStructure structure;
  CellGeometry geometry;
  TimeSeries ts;
  double lambda1 = 1.0;
  double lambda2 = 10.0;
  DataLoss loss = DataLoss::Absolute;

  int states() const { return static_cast<int>(ts.size()); }
  int dim() const { return structure.state_dim; }
  int window() const { return geometry.window_size(); }
  std::ptrdiff_t first_index() const { return -geometry.half_width; }

  // Row i (state s = i - K): data weights d * alpha and targets (0 where
  // missing) of the window.
  RowMatrix weights;  // states x window
  RowMatrix targets;  // states x window
  Matrix lifted;   // [design; b^T], (window + 1) x n, row-major copy below
  std::vector<double> lifted_rowmajor;
  Matrix power_k;        // A^K
  Matrix power_k1;       // A^{K+1}
  Vector gauge;          // (1, 0, -1, ..., -1)
  double data_scale = 1.0;  // 1 + max |y|
};

ProblemSpec assemble(const TimeSeries& ts, const ModelStructure& structure,
                     const CellGeometry& geometry, double lambda1, double lambda2,
                     DataLoss loss = DataLoss::Absolute);

struct ObjectiveTerms {
  double data = 0.0;
  double seasonal_tv = 0.0;
  double coupling = 0.0;
  double total() const { return data + seasonal_tv + coupling; }
};

ObjectiveTerms objective_terms(const ProblemSpec& problem, const StateSequence& x);
double objective(const ProblemSpec& problem, const StateSequence& x);

/// Gradient of the coupling term.
std::vector<Vector> coupling_gradient(const ProblemSpec& problem, const StateSequence& x);

/// Norm of the minimum-norm subgradient, over 1 + ||x||. Terms whose argument
/// is within `kink_tolerance` of zero are treated as sitting on their kink.
/// A negative tolerance selects the default (1e-7 * data scale).
/// Optional side information from a splitting solver, one entry per lifted
/// row (states x (window + 1)). `multipliers` seeds the search over kink
/// subgradients; rows flagged in `at_kink` are treated as sitting on their kink.
struct SubgradientHints {
  std::vector<double> multipliers;
  std::vector<char> at_kink;
};

double optimality_residual(const ProblemSpec& problem, const StateSequence& x,
                           double kink_tolerance = -1.0, const SubgradientHints* hints = nullptr);

/// The minimum-norm subgradient itself (unnormalized).
std::vector<Vector> min_norm_subgradient(const ProblemSpec& problem, const StateSequence& x,
                                         double kink_tolerance = -1.0,
                                         const SubgradientHints* hints = nullptr);

enum class Initialization { Zero, LocalFit };

StateSequence initial_states(const ProblemSpec& problem, Initialization init);

/// Shifts along the invariant direction so that the median over states of
/// the seasonal-slot sum is zero.
void fix_gauge(const ProblemSpec& problem, StateSequence& x);

struct SolverConfig {
  int max_iterations = 20000;
  double tolerance = 1e-7;        // on optimality_residual
  double rho = 1.0;               // initial penalty
  double relaxation = 1.6;        // over-relaxation in (0, 2)
  int check_interval = 25;
  int adapt_interval = 50;
  int adapt_until = 5000;         // penalty adaptation stops after this iteration
  double splitting_gate = 1e-6;   // relative primal/dual level that triggers the subgradient test
  int full_check_interval = 500;
  int polish_iterations = 1000;   // extra iterations spent trying to snap onto exact kinks
  double kink_tolerance = -1.0;   // see optimality_residual
  int trace_stride = 50;
  Initialization init = Initialization::LocalFit;
  std::uint64_t seed = 0;         // recorded; the solver itself is deterministic
};

enum class SolverStatus { Converged, MaxIterations };

struct SolverStats {
  SolverStatus status = SolverStatus::MaxIterations;
  int iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double final_rho = 0.0;
  int refactorizations = 0;
  bool polished = false;  // returned point was snapped onto its active kinks
  double wall_time_s = 0.0;
  std::vector<std::pair<int, double>> objective_trace;
  std::vector<std::pair<int, double>> residual_trace;
  bool converged() const { return status == SolverStatus::Converged; }
};

std::string to_string(SolverStatus status);

struct SolveResult {
  StateSequence states;
  SolverStats stats;
};

/// ADMM with proximal steps on both one-norm blocks and exact block-tridiagonal
/// solves for the quadratic part. Returns the best iterate (lowest optimality
/// residual) with a non-convergence flag if the tolerance is not reached.
SolveResult solve(const ProblemSpec& problem, const SolverConfig& config = {});
SolveResult solve(const ProblemSpec& problem, const SolverConfig& config, const StateSequence& start);

/// xc_t = A^K xhat_{t-K}, t = 0..T.
StateSequence center(const StateSequence& raw, const ModelStructure& structure, int half_width);

}  // namespace escells
