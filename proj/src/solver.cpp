#include "escells/solver.hpp"

#include "escells/block_tridiagonal.hpp"
#include "escells/kernels.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace escells {

ProblemSpec assemble(const TimeSeries& ts, const ModelStructure& structure,
                     const CellGeometry& geometry, double lambda1, double lambda2, DataLoss loss) {
  if (ts.empty()) throw std::invalid_argument("assemble: empty series");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("assemble: lambda1 and lambda2 must be positive");
  if (geometry.design.cols() != structure.state_dim)
    throw std::invalid_argument("assemble: geometry built for a different structure");

  ProblemSpec p;
  p.structure = structure;
  p.geometry = geometry;
  p.ts = ts;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.loss = loss;

  const int N = p.states();
  const int m = p.window();
  const int n = p.dim();
  const int K = geometry.half_width;
  p.weights.resize(N, m);
  p.targets.resize(N, m);
  for (int i = 0; i < N; ++i) {
    const std::ptrdiff_t center_time = i + 1;
    p.weights.row(i) = window_weights(geometry, ts, center_time).transpose();
    for (int j = 0; j < m; ++j) {
      const std::ptrdiff_t t = center_time - K + j;
      p.targets(i, j) = ts.observed(t) ? ts.value(static_cast<std::size_t>(t)) : 0.0;
    }
  }
  p.lifted.resize(m + 1, n);
  p.lifted.topRows(m) = geometry.design;
  p.lifted.row(m) = structure.b.transpose();
  p.lifted_rowmajor.resize(static_cast<std::size_t>(m + 1) * n);
  for (int r = 0; r <= m; ++r)
    for (int c = 0; c < n; ++c) p.lifted_rowmajor[static_cast<std::size_t>(r) * n + c] = p.lifted(r, c);

  p.power_k = transition_power(structure, K);
  p.power_k1 = structure.A * p.power_k;
  p.gauge = Vector::Zero(n);
  p.gauge(0) = 1.0;
  for (int i = 2; i < n; ++i) p.gauge(i) = -1.0;

  double ymax = 0.0;
  for (std::size_t t = 0; t < ts.size(); ++t)
    if (ts.observed(static_cast<std::ptrdiff_t>(t))) ymax = std::max(ymax, std::fabs(ts.value(t)));
  p.data_scale = 1.0 + ymax;
  return p;
}

namespace {

void check_sequence(const ProblemSpec& p, const StateSequence& x) {
  if (static_cast<int>(x.size()) != p.states())
    throw std::invalid_argument("state sequence length does not match the problem");
  for (const Vector& v : x.states)
    if (v.size() != p.dim()) throw std::invalid_argument("state dimension mismatch");
}

// Lifted values M x_i for one state.
void lift(const ProblemSpec& p, const double* x, double* out) {
  kernels::active().matvec(p.lifted_rowmajor.data(), static_cast<std::size_t>(p.window() + 1),
                           static_cast<std::size_t>(p.dim()), x, out);
}

double data_term(const ProblemSpec& p, int i, const double* lifted) {
  const std::size_t m = static_cast<std::size_t>(p.window());
  const double* y = p.targets.row(i).data();
  const double* w = p.weights.row(i).data();
  if (p.loss == DataLoss::Absolute) return kernels::active().weighted_abs_dev(lifted, y, w, m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = y[j] - lifted[j];
    acc += w[j] * d * d;
  }
  return acc;
}

}  // namespace

ObjectiveTerms objective_terms(const ProblemSpec& p, const StateSequence& x) {
  check_sequence(p, x);
  const int N = p.states();
  const int m = p.window();
  ObjectiveTerms terms;
  std::vector<double> lifted(static_cast<std::size_t>(m + 1));
  for (int i = 0; i < N; ++i) {
    lift(p, x.states[i].data(), lifted.data());
    terms.data += data_term(p, i, lifted.data());
    terms.seasonal_tv += p.lambda1 * std::fabs(lifted[m]);
  }
  for (int i = 0; i + 1 < N; ++i) {
    const Vector e = p.power_k1 * x.states[i] - p.power_k * x.states[i + 1];
    terms.coupling += p.lambda2 * e.squaredNorm();
  }
  return terms;
}

double objective(const ProblemSpec& p, const StateSequence& x) { return objective_terms(p, x).total(); }

std::vector<Vector> coupling_gradient(const ProblemSpec& p, const StateSequence& x) {
  check_sequence(p, x);
  const int N = p.states();
  std::vector<Vector> g(N, Vector::Zero(p.dim()));
  for (int i = 0; i + 1 < N; ++i) {
    const Vector e = p.power_k1 * x.states[i] - p.power_k * x.states[i + 1];
    g[i].noalias() += 2.0 * p.lambda2 * (p.power_k1.transpose() * e);
    g[i + 1].noalias() -= 2.0 * p.lambda2 * (p.power_k.transpose() * e);
  }
  return g;
}

std::vector<Vector> min_norm_subgradient(const ProblemSpec& p, const StateSequence& x,
                                         double kink_tolerance, const SubgradientHints* hints) {
  check_sequence(p, x);
  const double kink = kink_tolerance < 0.0 ? 1e-7 * p.data_scale : kink_tolerance;
  const int N = p.states();
  const int m = p.window();
  std::vector<Vector> g = coupling_gradient(p, x);
  std::vector<double> lifted(static_cast<std::size_t>(m + 1));
  std::vector<Vector> columns;
  std::vector<double> col_norm2, sigma;
  const std::size_t L = static_cast<std::size_t>(m + 1);
  const std::size_t rows = static_cast<std::size_t>(N) * L;
  const bool have_mult = hints && !hints->multipliers.empty();
  const bool have_kink = hints && !hints->at_kink.empty();
  if ((have_mult && hints->multipliers.size() != rows) || (have_kink && hints->at_kink.size() != rows))
    throw std::invalid_argument("subgradient hints have the wrong size");
  const auto hint = [&](int i, int r, double scale) {
    if (!have_mult || scale == 0.0) return 0.0;
    return std::clamp(hints->multipliers[static_cast<std::size_t>(i) * L + r] / scale, -1.0, 1.0);
  };
  const auto flagged = [&](int i, int r) {
    return have_kink && hints->at_kink[static_cast<std::size_t>(i) * L + r] != 0;
  };
  for (int i = 0; i < N; ++i) {
    lift(p, x.states[i].data(), lifted.data());
    columns.clear();
    col_norm2.clear();
    sigma.clear();
    Vector& gi = g[i];
    for (int j = 0; j < m; ++j) {
      const double w = p.weights(i, j);
      if (w == 0.0) continue;
      const double r = p.targets(i, j) - lifted[j];
      if (p.loss == DataLoss::Squared) {
        gi.noalias() -= 2.0 * w * r * p.lifted.row(j).transpose();
      } else if (std::fabs(r) > kink && !flagged(i, j)) {
        gi.noalias() -= w * (r > 0 ? 1.0 : -1.0) * p.lifted.row(j).transpose();
      } else {
        columns.push_back(-w * p.lifted.row(j).transpose());
        sigma.push_back(-hint(i, j, w));
      }
    }
    const double tv = lifted[m];
    if (std::fabs(tv) > kink && !flagged(i, m)) gi.noalias() += p.lambda1 * (tv > 0 ? 1.0 : -1.0) * p.structure.b;
    else {
      columns.push_back(p.lambda1 * p.structure.b);
      sigma.push_back(hint(i, m, p.lambda1));
    }
    if (columns.empty()) continue;

    // min || gi + sum_c sigma_c columns[c] ||, sigma in [-1, 1]: cyclic
    // coordinate descent on the box-constrained least squares.
    for (const Vector& c : columns) col_norm2.push_back(c.squaredNorm());
    Vector res = gi;
    for (std::size_t c = 0; c < columns.size(); ++c) res.noalias() += sigma[c] * columns[c];
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double change = 0.0;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (col_norm2[c] == 0.0) continue;
        const double next = std::clamp(sigma[c] - columns[c].dot(res) / col_norm2[c], -1.0, 1.0);
        const double d = next - sigma[c];
        if (d != 0.0) {
          res.noalias() += d * columns[c];
          sigma[c] = next;
          change = std::max(change, std::fabs(d));
        }
      }
      if (change < 1e-13) break;
    }
    gi = res;
  }
  return g;
}

double optimality_residual(const ProblemSpec& p, const StateSequence& x, double kink_tolerance,
                           const SubgradientHints* hints) {
  const std::vector<Vector> g = min_norm_subgradient(p, x, kink_tolerance, hints);
  double gn = 0.0, xn = 0.0;
  for (const Vector& v : g) gn += v.squaredNorm();
  for (const Vector& v : x.states) xn += v.squaredNorm();
  return std::sqrt(gn) / (1.0 + std::sqrt(xn));
}

StateSequence initial_states(const ProblemSpec& p, Initialization init) {
  const int N = p.states();
  const int n = p.dim();
  const int m = p.window();
  StateSequence x;
  x.first_index = p.first_index();
  x.states.assign(N, Vector::Zero(n));
  if (init == Initialization::Zero) return x;

  // Per window: weighted line y ~ level + (j + 1) trend, zero seasonal.
  bool have_prev = false;
  Vector prev = Vector::Zero(n);
  for (int i = 0; i < N; ++i) {
    double sw = 0, su = 0, sy = 0, suu = 0, suy = 0;
    int count = 0;
    for (int j = 0; j < m; ++j) {
      const double w = p.weights(i, j);
      if (w == 0.0) continue;
      const double u = j + 1.0, y = p.targets(i, j);
      sw += w; su += w * u; sy += w * y; suu += w * u * u; suy += w * u * y;
      ++count;
    }
    Vector& xi = x.states[i];
    if (count == 0) {
      if (have_prev) xi = p.structure.A * prev;
    } else {
      const double det = sw * suu - su * su;
      double slope = 0.0;
      if (count >= 2 && det > 1e-12 * sw * suu) slope = (sw * suy - su * sy) / det;
      xi(0) = (sy - slope * su) / sw;
      xi(1) = slope;
    }
    prev = xi;
    have_prev = have_prev || count > 0;
  }
  return x;
}

void fix_gauge(const ProblemSpec& p, StateSequence& x) {
  if (x.states.empty()) return;
  const int n = p.dim();
  std::vector<double> sums;
  sums.reserve(x.states.size());
  for (const Vector& v : x.states) sums.push_back(v.tail(n - 2).sum());
  const std::size_t mid = sums.size() / 2;
  std::nth_element(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(mid), sums.end());
  double median = sums[mid];
  if (sums.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  // Adding c * gauge lowers every per-state seasonal sum by c * p.
  const double c = median / static_cast<double>(p.structure.period);
  for (Vector& v : x.states) v += c * p.gauge;
}

std::string to_string(SolverStatus status) {
  return status == SolverStatus::Converged ? "converged" : "max_iterations";
}

namespace {

BlockTridiagonal factor_quadratic(const ProblemSpec& p, double rho) {
  const int N = p.states();
  const Matrix MtM = p.lifted.transpose() * p.lifted;
  const Matrix fwd = p.power_k1.transpose() * p.power_k1;
  const Matrix bwd = p.power_k.transpose() * p.power_k;
  const Matrix off = -2.0 * p.lambda2 * (p.power_k1.transpose() * p.power_k);
  std::vector<Matrix> diag(N), upper(std::max(N - 1, 0));
  for (int i = 0; i < N; ++i) {
    diag[i] = rho * MtM;
    if (i + 1 < N) diag[i] += 2.0 * p.lambda2 * fwd;
    if (i > 0) diag[i] += 2.0 * p.lambda2 * bwd;
  }
  for (int i = 0; i + 1 < N; ++i) upper[i] = off;
  return BlockTridiagonal(std::move(diag), std::move(upper), p.gauge);
}

StateSequence unflatten(const ProblemSpec& p, const Vector& flat) {
  StateSequence x;
  x.first_index = p.first_index();
  const int n = p.dim();
  x.states.resize(p.states());
  for (int i = 0; i < p.states(); ++i) x.states[i] = flat.segment(static_cast<Eigen::Index>(i) * n, n);
  return x;
}

// Exact solve on the active set read off a splitting iterate. Flagged rows
// become equality constraints, every other one-norm row contributes its
// current sign as a linear term, and the remaining quadratic is minimized
// over the constraint null spaces. Returns false when the flagged rows of
// some state cannot all hold; the caller certifies any point returned.
bool polish(const ProblemSpec& p, const StateSequence& x, const std::vector<char>& at_kink,
            const std::vector<double>& center, double kink, StateSequence& out) {
  const int N = p.states();
  const int n = p.dim();
  const int m = p.window();
  const std::size_t L = static_cast<std::size_t>(m + 1);

  // Per state: particular point, null-space basis, linear and quadratic data terms.
  std::vector<Vector> base(N), lin(N);
  std::vector<Matrix> basis(N), quad(N);
  std::vector<int> offset(N + 1, 0);
  std::vector<int> rows;
  for (int i = 0; i < N; ++i) {
    rows.clear();
    lin[i] = Vector::Zero(n);
    quad[i] = Matrix::Zero(n, n);
    Vector lifted = p.lifted * x.states[i];
    for (int r = 0; r <= m; ++r) {
      const std::size_t k = static_cast<std::size_t>(i) * L + r;
      const double w = r < m ? p.weights(i, r) : p.lambda1;
      if (w == 0.0) continue;
      const auto row = p.lifted.row(r).transpose();
      if (at_kink[k]) {
        rows.push_back(r);
      } else if (r < m && p.loss == DataLoss::Squared) {
        quad[i].noalias() += w * row * row.transpose();
        lin[i].noalias() -= 2.0 * w * center[k] * row;
      } else {
        const double resid = lifted(r) - center[k];
        lin[i].noalias() += w * (resid > 0 ? 1.0 : -1.0) * row;
      }
    }
    const auto fit_rows = [&](const std::vector<int>& set, Vector& point, Matrix& null_basis) {
      Matrix C(static_cast<Eigen::Index>(set.size()), n);
      Vector t(static_cast<Eigen::Index>(set.size()));
      for (std::size_t k = 0; k < set.size(); ++k) {
        C.row(static_cast<Eigen::Index>(k)) = p.lifted.row(set[k]);
        t(static_cast<Eigen::Index>(k)) = center[static_cast<std::size_t>(i) * L + set[k]];
      }
      Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
      svd.setThreshold(1e-10);
      point = svd.solve(t);
      if ((C * point - t).cwiseAbs().maxCoeff() > kink) return false;
      null_basis = svd.matrixV().rightCols(n - svd.rank());
      return true;
    };
    base[i] = Vector::Zero(n);
    basis[i] = Matrix::Identity(n, n);
    if (!rows.empty() && !fit_rows(rows, base[i], basis[i])) return false;
    offset[i + 1] = offset[i] + static_cast<int>(basis[i].cols());
  }

  // Reduced normal equations, block tridiagonal with variable block sizes.
  const Matrix P1tP1 = p.power_k1.transpose() * p.power_k1;
  const Matrix P0tP0 = p.power_k.transpose() * p.power_k;
  const Matrix P1tP0 = p.power_k1.transpose() * p.power_k;
  std::vector<Eigen::Triplet<double>> entries;
  Vector rhs = Vector::Zero(offset[N]);
  const auto add_block = [&](int bi, int bj, const Matrix& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c)
        if (M(r, c) != 0.0) entries.emplace_back(offset[bi] + static_cast<int>(r), offset[bj] + static_cast<int>(c), M(r, c));
  };
  double scale = 0.0;
  for (int i = 0; i < N; ++i) {
    Matrix H = quad[i];
    if (i + 1 < N) H += p.lambda2 * P1tP1;
    if (i > 0) H += p.lambda2 * P0tP0;
    // Gradient of x' H x + lin' x at the particular point, plus the coupling
    // cross terms with the neighbours' particular points.
    Vector grad = 2.0 * H * base[i] + lin[i];
    if (i + 1 < N) grad -= 2.0 * p.lambda2 * P1tP0 * base[i + 1];
    if (i > 0) grad -= 2.0 * p.lambda2 * P1tP0.transpose() * base[i - 1];
    const Matrix& B = basis[i];
    if (B.cols() == 0) continue;
    const Matrix Hr = B.transpose() * H * B;
    scale = std::max(scale, Hr.cwiseAbs().maxCoeff());
    add_block(i, i, 2.0 * Hr);
    rhs.segment(offset[i], B.cols()) = -B.transpose() * grad;
    if (i + 1 < N && basis[i + 1].cols() > 0) {
      const Matrix U = -2.0 * p.lambda2 * B.transpose() * P1tP0 * basis[i + 1];
      add_block(i, i + 1, U);
      add_block(i + 1, i, Matrix(U.transpose()));
    }
  }
  out = x;
  if (offset[N] > 0) {
    // A small ridge pins the invariant direction; the objective is flat there.
    for (int k = 0; k < offset[N]; ++k) entries.emplace_back(k, k, 1e-12 * std::max(scale, 1.0));
    Eigen::SparseMatrix<double> S(offset[N], offset[N]);
    S.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
    if (ldlt.info() != Eigen::Success) return false;
    const Vector xi = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !xi.allFinite()) return false;
    for (int i = 0; i < N; ++i) out.states[i] = base[i] + basis[i] * xi.segment(offset[i], basis[i].cols());
  } else {
    for (int i = 0; i < N; ++i) out.states[i] = base[i];
  }
  return true;
}

}  // namespace

SolveResult solve(const ProblemSpec& problem, const SolverConfig& config) {
  return solve(problem, config, initial_states(problem, config.init));
}

SolveResult solve(const ProblemSpec& p, const SolverConfig& config, const StateSequence& start) {
  check_sequence(p, start);
  if (config.max_iterations < 1) throw std::invalid_argument("solve: max_iterations must be >= 1");
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
  if (!(config.rho > 0.0)) throw std::invalid_argument("solve: rho must be positive");
  if (!(config.relaxation > 0.0 && config.relaxation < 2.0))
    throw std::invalid_argument("solve: relaxation must lie in (0, 2)");

  const auto started = std::chrono::steady_clock::now();
  const int N = p.states();
  const int n = p.dim();
  const int m = p.window();
  const int L = m + 1;
  const std::size_t total = static_cast<std::size_t>(N) * L;
  const auto& kt = kernels::active();

  Vector x(static_cast<Eigen::Index>(N) * n);
  for (int i = 0; i < N; ++i) x.segment(static_cast<Eigen::Index>(i) * n, n) = start.states[i];

  // Per-entry prox centers and thresholds (scaled by 1/rho at use).
  std::vector<double> center(total, 0.0), weight(total, 0.0);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < m; ++j) {
      center[static_cast<std::size_t>(i) * L + j] = p.targets(i, j);
      weight[static_cast<std::size_t>(i) * L + j] = p.weights(i, j);
    }
    weight[static_cast<std::size_t>(i) * L + m] = p.lambda1;
  }

  std::vector<double> v(total), z(total), z_prev(total), u(total, 0.0), vhat(total), thresh(total);
  const auto lift_all = [&] {
    for (int i = 0; i < N; ++i)
      kt.matvec(p.lifted_rowmajor.data(), static_cast<std::size_t>(L), static_cast<std::size_t>(n),
                x.data() + static_cast<std::ptrdiff_t>(i) * n, v.data() + static_cast<std::size_t>(i) * L);
  };
  lift_all();
  z = v;

  double rho = config.rho;
  SolverStats stats;
  BlockTridiagonal system = factor_quadratic(p, rho);
  const auto set_thresholds = [&] {
    for (std::size_t k = 0; k < total; ++k) thresh[k] = weight[k] / rho;
  };
  set_thresholds();

  Vector rhs(x.size());
  StateSequence best = unflatten(p, x);
  int converged_at = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  const double kink = config.kink_tolerance < 0.0 ? 1e-7 * p.data_scale : config.kink_tolerance;
  const double alpha = config.relaxation;
  std::vector<double> dz(static_cast<std::size_t>(L)), acc(static_cast<std::size_t>(n));
  SubgradientHints hints{std::vector<double>(total), std::vector<char>(total)};
  const bool trace = std::getenv("ESCELLS_SOLVER_TRACE") != nullptr;
  int last_trace = -config.trace_stride;

  int it = 0;
  for (it = 1; it <= config.max_iterations; ++it) {
    // x-update: (2 lambda2 H + rho M^T M) x = rho M^T (z - u)
    for (int i = 0; i < N; ++i) {
      double* seg = rhs.data() + static_cast<std::ptrdiff_t>(i) * n;
      std::fill(seg, seg + n, 0.0);
      const std::size_t off = static_cast<std::size_t>(i) * L;
      for (int r = 0; r < L; ++r) {
        const double c = rho * (z[off + r] - u[off + r]);
        if (c != 0.0) kt.axpy(c, p.lifted_rowmajor.data() + static_cast<std::size_t>(r) * n, seg, static_cast<std::size_t>(n));
      }
    }
    system.solve_in_place(rhs);
    x = rhs;
    lift_all();

    // z-update on the relaxed point.
    z_prev = z;
    for (std::size_t k = 0; k < total; ++k) vhat[k] = alpha * v[k] + (1.0 - alpha) * z_prev[k] + u[k];
    if (p.loss == DataLoss::Absolute) {
      kt.shrink_toward(vhat.data(), center.data(), thresh.data(), z.data(), total);
    } else {
      for (int i = 0; i < N; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * L;
        for (int j = 0; j < m; ++j) {
          const double w = weight[off + j];
          z[off + j] = (2.0 * w * center[off + j] + rho * vhat[off + j]) / (2.0 * w + rho);
        }
        kt.shrink_toward(vhat.data() + off + m, center.data() + off + m, thresh.data() + off + m,
                         z.data() + off + m, 1);
      }
    }
    for (std::size_t k = 0; k < total; ++k) u[k] = vhat[k] - z[k];

    const bool check = it % config.check_interval == 0 || it == config.max_iterations;
    const bool adapt = config.adapt_interval > 0 && it % config.adapt_interval == 0 && it <= config.adapt_until;
    if (!check && !adapt) continue;

    double pr = 0.0, dr = 0.0, vn = 0.0, zn = 0.0, un = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      pr += (v[k] - z[k]) * (v[k] - z[k]);
      vn += v[k] * v[k];
      zn += z[k] * z[k];
      un += u[k] * u[k];
    }
    // Dual residual rho M^T (z - z_prev).
    for (int i = 0; i < N; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * L;
      for (int r = 0; r < L; ++r) dz[r] = z[off + r] - z_prev[off + r];
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int r = 0; r < L; ++r)
        if (dz[r] != 0.0) kt.axpy(dz[r], p.lifted_rowmajor.data() + static_cast<std::size_t>(r) * n, acc.data(), static_cast<std::size_t>(n));
      dr += kt.dot(acc.data(), acc.data(), static_cast<std::size_t>(n));
    }
    pr = std::sqrt(pr);
    dr = rho * std::sqrt(dr);
    stats.primal_residual = pr;
    stats.dual_residual = dr;
    const double pr_rel = pr / std::max({std::sqrt(vn), std::sqrt(zn), 1e-300});
    const double dr_rel = dr / std::max(rho * std::sqrt(un), 1e-300);

    if (adapt) {
      double factor = 1.0;
      if (pr_rel > 10.0 * dr_rel) factor = 2.0;
      else if (dr_rel > 10.0 * pr_rel) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        for (double& uk : u) uk /= factor;
        system = factor_quadratic(p, rho);
        set_thresholds();
        ++stats.refactorizations;
      }
    }
    if (!check) continue;
    // The subgradient test is comparatively expensive; run it once the
    // splitting residuals are small, and periodically to track the best iterate.
    const bool full = std::max(pr_rel, dr_rel) <= config.splitting_gate ||
                      it % config.full_check_interval == 0 || it == config.max_iterations ||
                      converged_at > 0;
    if (trace) std::fprintf(stderr, "it %6d rho %.3g pr %.3e dr %.3e\n", it, rho, pr_rel, dr_rel);
    if (!full) continue;
    const StateSequence cur = unflatten(p, x);
    // The thresholding step lands exactly on a kink when it is active there.
    for (std::size_t k = 0; k < total; ++k) {
      hints.multipliers[k] = rho * u[k];
      hints.at_kink[k] = p.loss == DataLoss::Absolute || k % L == static_cast<std::size_t>(m) ? z[k] == center[k] : 0;
    }
    if (converged_at == 0) {
      const double res = optimality_residual(p, cur, kink, &hints);
      if (trace) std::fprintf(stderr, "it %6d optimality %.3e\n", it, res);
      stats.residual_trace.emplace_back(it, res);
      if (it - last_trace >= config.trace_stride || res <= config.tolerance) {
        stats.objective_trace.emplace_back(it, objective(p, cur));
        last_trace = it;
      }
      if (res < best_residual) {
        best_residual = res;
        best = cur;
      }
      if (res <= config.tolerance) {
        stats.status = SolverStatus::Converged;
        converged_at = it;
      }
    }
    if (converged_at > 0) {
      // Snap the active one-norm rows onto their kinks. Kept only when the
      // snapped point certifies on its own, without the splitting flags.
      StateSequence snapped;
      if (polish(p, cur, hints.at_kink, center, kink, snapped)) {
        const double snapped_res = optimality_residual(p, snapped, kink);
        if (trace) std::fprintf(stderr, "it %6d snapped optimality %.3e\n", it, snapped_res);
        if (snapped_res <= config.tolerance) {
          best = std::move(snapped);
          best_residual = snapped_res;
          stats.polished = true;
          break;
        }
      }
      if (it - converged_at >= config.polish_iterations) break;
    }
  }

  SolveResult result;
  result.states = std::move(best);
  fix_gauge(p, result.states);
  stats.iterations = std::min(it, config.max_iterations);
  stats.residual = best_residual;
  stats.objective = objective(p, result.states);
  stats.final_rho = rho;
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.stats = std::move(stats);
  return result;
}

StateSequence center(const StateSequence& raw, const ModelStructure& structure, int half_width) {
  if (half_width < 0) throw std::invalid_argument("center: negative half width");
  StateSequence out;
  out.first_index = raw.first_index + half_width;
  out.states.reserve(raw.size());
  const Matrix P = transition_power(structure, half_width);
  for (const Vector& s : raw.states) out.states.push_back(P * s);
  return out;
}

}  // namespace escells
