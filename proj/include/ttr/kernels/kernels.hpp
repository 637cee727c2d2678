#pragma once

#include <cstddef>
#include <span>

namespace ttr::kernels {

// Vector primitives behind the numeric inner loops (batch-norm statistics
// and transforms, convolution taps, gradient accumulation). Each primitive
// has a portable scalar form and an AVX2 form; one is selected at startup
// from cpuid and used for the rest of the process.
//
// Elementwise primitives (add, add_scaled, scale_shift, accumulate_sq,
// subtract) produce bitwise-identical results on every backend: the AVX2
// forms round each element exactly like the scalar forms (no fused
// multiply-add). dot reassociates its reduction and is only reproducible
// within a single backend.
struct Backend {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // acc[i] += x[i]
  void (*add)(double* acc, const double* x, std::size_t n);
  // acc[i] += a * x[i]
  void (*add_scaled)(double* acc, const double* x, double a, std::size_t n);
  // out[i] = x[i] * scale[i] + shift[i]
  void (*scale_shift)(double* out, const double* x, const double* scale,
                      const double* shift, std::size_t n);
  // acc[i] += x[i] * x[i]
  void (*accumulate_sq)(double* acc, const double* x, std::size_t n);
  // out[i] = x[i] - c
  void (*subtract)(double* out, const double* x, double c, std::size_t n);
};

const Backend& scalar_backend();

#if defined(__x86_64__) || defined(_M_X64)
// Defined only when the build enables the AVX2 lane; call avx2_available()
// before using it.
const Backend& avx2_backend();
bool avx2_available();
#endif

// Backend chosen once at first use: AVX2 when the CPU supports AVX2 and FMA
// and the lane was compiled in, scalar otherwise.
const Backend& active();

// The non-scalar lane when one is compiled in and the CPU can run it,
// nullptr otherwise. Lets equivalence tests reach both lanes without
// knowing which ones exist in this build.
const Backend* simd_backend();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void add(std::span<double> acc, std::span<const double> x) {
  active().add(acc.data(), x.data(), acc.size());
}

inline void add_scaled(std::span<double> acc, std::span<const double> x,
                       double a) {
  active().add_scaled(acc.data(), x.data(), a, acc.size());
}

inline void scale_shift(std::span<double> out, std::span<const double> x,
                        std::span<const double> scale,
                        std::span<const double> shift) {
  active().scale_shift(out.data(), x.data(), scale.data(), shift.data(),
                       out.size());
}

inline void accumulate_sq(std::span<double> acc, std::span<const double> x) {
  active().accumulate_sq(acc.data(), x.data(), acc.size());
}

inline void subtract(std::span<double> out, std::span<const double> x,
                     double c) {
  active().subtract(out.data(), x.data(), c, out.size());
}

}  // namespace ttr::kernels
