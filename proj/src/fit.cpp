#include "escells/fit.hpp"

#include <stdexcept>

namespace escells {

FitResult finish_fit(const TimeSeries& ts, const FitOptions& options, StateSequence raw, SolverStats stats) {
  FitResult r;
  r.options = options;
  r.structure = build_structure(options.period);
  r.geometry = build_cell_geometry(r.structure, options.resolved_half_width(), options.decay);
  r.series = ts;
  r.raw = std::move(raw);
  r.centered = center(r.raw, r.structure, r.geometry.half_width);
  r.residuals = extract_residuals(ts, r.centered.states, r.structure);
  r.increments = extract_increments(r.centered.states, r.structure);
  r.pools = build_pools(ts, r.centered.states, r.structure, options.resolved_trim());
  r.decomposition = decompose(r.centered.states, r.structure);
  r.stats = std::move(stats);
  return r;
}

FitResult fit_escells(const TimeSeries& ts, const FitOptions& options) {
  const ModelStructure structure = build_structure(options.period);
  if (ts.observed_count() < static_cast<std::size_t>(options.period + 2))
    throw std::invalid_argument("fit: need at least p+2 observed values");
  const CellGeometry geometry = build_cell_geometry(structure, options.resolved_half_width(), options.decay);
  const ProblemSpec problem = assemble(ts, structure, geometry, options.lambda1, options.lambda2, options.loss);
  SolveResult solved = solve(problem, options.solver);
  return finish_fit(ts, options, std::move(solved.states), std::move(solved.stats));
}

}  // namespace escells
