// Compiled with -mavx2 -mfma; only entered after a runtime CPU check.
#include "escells/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace escells::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void shrink_toward_avx2(const double* v, const double* center, const double* thresh,
                        double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_loadu_pd(center + i);
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i), c);
    const __m256d sign = _mm256_and_pd(d, sign_mask);
    const __m256d mag = _mm256_sub_pd(_mm256_andnot_pd(sign_mask, d), _mm256_loadu_pd(thresh + i));
    const __m256d keep = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    const __m256d step = _mm256_and_pd(_mm256_or_pd(mag, sign), keep);
    _mm256_storeu_pd(out + i, _mm256_add_pd(c, step));
  }
  for (; i < n; ++i) {
    const double d = v[i] - center[i];
    const double mag = std::fabs(d) - thresh[i];
    out[i] = mag > 0.0 ? center[i] + std::copysign(mag, d) : center[i];
  }
}

double weighted_abs_dev_avx2(const double* v, const double* center, const double* weight,
                             std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(center + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(v + i + 4), _mm256_loadu_pd(center + i + 4));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weight + i), _mm256_andnot_pd(sign_mask, d0), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(weight + i + 4), _mm256_andnot_pd(sign_mask, d1), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(center + i));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weight + i), _mm256_andnot_pd(sign_mask, d0), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += weight[i] * std::fabs(v[i] - center[i]);
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_avx2(const double* m, std::size_t rows, std::size_t cols, const double* x,
                 double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_avx2(m + r * cols, x, cols);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Backend::Avx2, shrink_toward_avx2, weighted_abs_dev_avx2,
                                 dot_avx2,      axpy_avx2,          matvec_avx2};
  return &table;
}

}  // namespace escells::kernels
