#pragma once
// Data-parallel inner loops shared by the solver, the objective and the
// forecast simulator. Each kernel has a scalar reference implementation and
// a vectorized variant; the variant is picked once at startup from the CPU
// feature set and can be overridden for testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace escells::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  // out[i] = center[i] + sign(v[i] - center[i]) * max(|v[i] - center[i]| - thresh[i], 0)
  void (*shrink_toward)(const double* v, const double* center,
                        const double* thresh, double* out, std::size_t n);
  // sum_i weight[i] * |v[i] - center[i]|
  double (*weighted_abs_dev)(const double* v, const double* center,
                             const double* weight, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[r] = dot(matrix row r, x) for a row-major rows x cols matrix
  void (*matvec)(const double* matrix, std::size_t rows, std::size_t cols,
                 const double* x, double* out);
};

const KernelTable& scalar_table();
// Null when the variant was not compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// The table currently in use.
const KernelTable& active();

bool backend_available(Backend b);

// Switches the active backend; throws std::invalid_argument when the backend
// is unavailable on this machine.
void set_backend(Backend b);

Backend best_available();

std::string_view backend_name(Backend b);

inline void shrink_toward(std::span<const double> v, std::span<const double> center,
                          std::span<const double> thresh, std::span<double> out) {
  active().shrink_toward(v.data(), center.data(), thresh.data(), out.data(), v.size());
}

inline double weighted_abs_dev(std::span<const double> v, std::span<const double> center,
                               std::span<const double> weight) {
  return active().weighted_abs_dev(v.data(), center.data(), weight.data(), v.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace escells::kernels
