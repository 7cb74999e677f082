#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace kdvlab::simd {

namespace {

constexpr Kernels kScalar{
    "scalar",
    detail::cmul_scalar,
    detail::axpy_scalar,
    detail::scale_scalar,
    detail::square_scalar,
    detail::pair_scale_scalar,
    detail::pair_weighted_sumsq_scalar,
};

#if defined(KDVLAB_HAVE_AVX2)
constexpr Kernels kAvx2{
    "avx2",
    detail::cmul_avx2,
    detail::axpy_avx2,
    detail::scale_avx2,
    detail::square_avx2,
    detail::pair_scale_avx2,
    detail::pair_weighted_sumsq_avx2,
};
#endif

const Kernels* select() noexcept {
  if (const char* env = std::getenv("KDVLAB_SIMD"); env && std::string_view(env) == "scalar") {
    return &kScalar;
  }
  if (const Kernels* k = avx2_kernels()) return k;
  return &kScalar;
}

std::atomic<const Kernels*>& slot() noexcept {
  static std::atomic<const Kernels*> s{select()};
  return s;
}

}  // namespace

const Kernels& scalar_kernels() noexcept { return kScalar; }

const Kernels* avx2_kernels() noexcept {
#if defined(KDVLAB_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return &kAvx2;
#endif
  return nullptr;
}

const Kernels& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void set_active(const Kernels& k) noexcept { slot().store(&k, std::memory_order_relaxed); }

}  // namespace kdvlab::simd
