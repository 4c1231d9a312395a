#include "escells/kernels.hpp"

#include <cmath>

namespace escells::kernels {
namespace {

void shrink_toward_scalar(const double* v, const double* center, const double* thresh,
                          double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - center[i];
    const double mag = std::fabs(d) - thresh[i];
    out[i] = mag > 0.0 ? center[i] + std::copysign(mag, d) : center[i];
  }
}

double weighted_abs_dev_scalar(const double* v, const double* center, const double* weight,
                               std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += weight[i] * std::fabs(v[i] - center[i]);
  return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols, const double* x,
                   double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_scalar(m + r * cols, x, cols);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::Scalar,   shrink_toward_scalar, weighted_abs_dev_scalar,
                                 dot_scalar,        axpy_scalar,          matvec_scalar};
  return table;
}

}  // namespace escells::kernels
