#include "escells/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace escells::kernels {
namespace {

void shrink_toward_neon(const double* v, const double* center, const double* thresh,
                        double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t c = vld1q_f64(center + i);
    const float64x2_t d = vsubq_f64(vld1q_f64(v + i), c);
    const float64x2_t mag = vsubq_f64(vabsq_f64(d), vld1q_f64(thresh + i));
    const uint64x2_t keep = vcgtq_f64(mag, zero);
    const uint64x2_t sign = vandq_u64(vreinterpretq_u64_f64(d), vdupq_n_u64(0x8000000000000000ULL));
    const float64x2_t step = vreinterpretq_f64_u64(
        vandq_u64(vorrq_u64(vreinterpretq_u64_f64(mag), sign), keep));
    vst1q_f64(out + i, vaddq_f64(c, step));
  }
  for (; i < n; ++i) {
    const double d = v[i] - center[i];
    const double mag = std::fabs(d) - thresh[i];
    out[i] = mag > 0.0 ? center[i] + std::copysign(mag, d) : center[i];
  }
}

double weighted_abs_dev_neon(const double* v, const double* center, const double* weight,
                             std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vabsq_f64(vsubq_f64(vld1q_f64(v + i), vld1q_f64(center + i)));
    acc = vfmaq_f64(acc, vld1q_f64(weight + i), d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += weight[i] * std::fabs(v[i] - center[i]);
  return s;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_neon(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(m + r * cols, x, cols);
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Backend::Neon, shrink_toward_neon, weighted_abs_dev_neon,
                                 dot_neon,      axpy_neon,          matvec_neon};
  return &table;
}

}  // namespace escells::kernels
