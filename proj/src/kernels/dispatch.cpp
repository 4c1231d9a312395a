#include "escells/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace escells::kernels {

#if !defined(ESCELLS_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(ESCELLS_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &scalar_table();
    case Backend::Avx2:
#if defined(ESCELLS_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_table();
#endif
      return nullptr;
    case Backend::Neon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* initial_table() {
  // ESCELLS_KERNELS=scalar forces the reference path.
  if (const char* env = std::getenv("ESCELLS_KERNELS"); env && std::string(env) == "scalar")
    return &scalar_table();
  return table_for(best_available());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial_table()};
  return ptr;
}

}  // namespace

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend best_available() {
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  if (backend_available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(b)));
  current().store(t, std::memory_order_release);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace escells::kernels
