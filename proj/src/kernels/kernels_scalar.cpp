// Reference kernels. Compiled with -ffp-contract=off so the compiler cannot
// fuse the multiply-add pairs; the AVX2 lane matches these elementwise
// results bit for bit.

#include "ttr/kernels/kernels.hpp"

namespace ttr::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void add_scalar(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void add_scaled_scalar(double* acc, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a * x[i];
}

void scale_shift_scalar(double* out, const double* x, const double* scale,
                        const double* shift, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * scale[i] + shift[i];
}

void accumulate_sq_scalar(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i] * x[i];
}

void subtract_scalar(double* out, const double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - c;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",        dot_scalar,           add_scalar, add_scaled_scalar,
      scale_shift_scalar, accumulate_sq_scalar, subtract_scalar,
  };
  return backend;
}

}  // namespace ttr::kernels
