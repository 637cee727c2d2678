#include "ttr/kernels/kernels.hpp"

namespace ttr::kernels {

#if defined(__x86_64__) || defined(_M_X64)

bool avx2_available() {
#if defined(TTR_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend& active() {
#if defined(TTR_HAVE_AVX2)
  static const Backend& chosen =
      avx2_available() ? avx2_backend() : scalar_backend();
  return chosen;
#else
  return scalar_backend();
#endif
}

const Backend* simd_backend() {
#if defined(TTR_HAVE_AVX2)
  return avx2_available() ? &avx2_backend() : nullptr;
#else
  return nullptr;
#endif
}

#else

const Backend& active() { return scalar_backend(); }

const Backend* simd_backend() { return nullptr; }

#endif

}  // namespace ttr::kernels
