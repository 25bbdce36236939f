#include <atomic>
#include <cstdlib>
#include <string>

#include "gnan/error.hpp"
#include "gnan/kernels.hpp"

namespace gnan::kernels {
namespace {

constexpr KernelTable kScalar{Backend::Scalar, &scalar::responsibilities, &scalar::accumulate,
                              &scalar::rates};
#if GNAN_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Backend::Avx2, &avx2::responsibilities, &avx2::accumulate,
                            &avx2::rates};
#endif

const KernelTable* detect() {
  const char* env = std::getenv("GNAN_KERNEL");
  if (env != nullptr) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && backend_supported(Backend::Avx2)) return &table(Backend::Avx2);
  }
  if (backend_supported(Backend::Avx2)) return &table(Backend::Avx2);
  return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{detect()};
  return slot;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if GNAN_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!backend_supported(b))
    throw InputError("kernel backend " + std::string(backend_name(b)) + " not supported here");
#if GNAN_HAVE_AVX2_KERNELS
  if (b == Backend::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_backend(Backend b) { active_slot().store(&table(b), std::memory_order_release); }

}  // namespace gnan::kernels
