#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "ttr/kernels/kernels.hpp"
#include "ttr/util/rng.hpp"

using ttr::kernels::Backend;

namespace {

const std::size_t kSizes[] = {0, 1, 3, 8, 17, 64, 1000};

std::vector<double> random_vec(ttr::Rng& rng, std::size_t n, double lo,
                               double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() ||
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("active backend is usable") {
  const Backend& b = ttr::kernels::active();
  CHECK(b.name != nullptr);
  const double a[] = {1.0, 2.0, 3.0};
  const double c[] = {4.0, -5.0, 6.0};
  CHECK(b.dot(a, c, 3) == doctest::Approx(12.0));
}

TEST_CASE("scalar primitives match hand results") {
  const Backend& b = ttr::kernels::scalar_backend();
  std::vector<double> acc = {1.0, 2.0};
  const std::vector<double> x = {10.0, -20.0};
  b.add(acc.data(), x.data(), 2);
  CHECK(acc == std::vector<double>{11.0, -18.0});

  b.add_scaled(acc.data(), x.data(), 0.5, 2);
  CHECK(acc == std::vector<double>{16.0, -28.0});

  std::vector<double> out(2);
  const std::vector<double> scale = {2.0, 3.0};
  const std::vector<double> shift = {1.0, -1.0};
  b.scale_shift(out.data(), x.data(), scale.data(), shift.data(), 2);
  CHECK(out == std::vector<double>{21.0, -61.0});

  std::vector<double> sq = {0.0, 1.0};
  b.accumulate_sq(sq.data(), x.data(), 2);
  CHECK(sq == std::vector<double>{100.0, 401.0});

  b.subtract(out.data(), x.data(), 4.0, 2);
  CHECK(out == std::vector<double>{6.0, -24.0});
}

TEST_CASE("simd lane matches scalar lane") {
  const Backend* simd = ttr::kernels::simd_backend();
  if (simd == nullptr) {
    MESSAGE("no simd lane in this build, equivalence vacuous");
    return;
  }
  const Backend& scalar = ttr::kernels::scalar_backend();
  ttr::Rng rng(1234567);
  for (const std::size_t n : kSizes) {
    CAPTURE(n);
    const std::vector<double> x = random_vec(rng, n, -3.0, 3.0);
    const std::vector<double> y = random_vec(rng, n, -2.0, 5.0);
    const std::vector<double> base = random_vec(rng, n, -1.0, 1.0);

    std::vector<double> acc_s = base;
    std::vector<double> acc_v = base;
    scalar.add(acc_s.data(), x.data(), n);
    simd->add(acc_v.data(), x.data(), n);
    CHECK(bitwise_equal(acc_s, acc_v));

    acc_s = base;
    acc_v = base;
    scalar.add_scaled(acc_s.data(), x.data(), 1.7, n);
    simd->add_scaled(acc_v.data(), x.data(), 1.7, n);
    CHECK(bitwise_equal(acc_s, acc_v));

    std::vector<double> out_s(n);
    std::vector<double> out_v(n);
    scalar.scale_shift(out_s.data(), x.data(), y.data(), base.data(), n);
    simd->scale_shift(out_v.data(), x.data(), y.data(), base.data(), n);
    CHECK(bitwise_equal(out_s, out_v));

    acc_s = base;
    acc_v = base;
    scalar.accumulate_sq(acc_s.data(), x.data(), n);
    simd->accumulate_sq(acc_v.data(), x.data(), n);
    CHECK(bitwise_equal(acc_s, acc_v));

    scalar.subtract(out_s.data(), x.data(), -0.9, n);
    simd->subtract(out_v.data(), x.data(), -0.9, n);
    CHECK(bitwise_equal(out_s, out_v));

    const double dot_s = scalar.dot(x.data(), y.data(), n);
    const double dot_v = simd->dot(x.data(), y.data(), n);
    double magnitude = 1.0;
    for (std::size_t i = 0; i < n; ++i) magnitude += std::abs(x[i] * y[i]);
    CHECK(std::abs(dot_s - dot_v) <= 1e-12 * magnitude);
  }
}

TEST_CASE("span helpers dispatch to the active backend") {
  std::vector<double> acc = {0.0, 0.0, 0.0};
  const std::vector<double> x = {1.0, 2.0, 3.0};
  ttr::kernels::add(acc, x);
  ttr::kernels::add_scaled(acc, x, 2.0);
  CHECK(acc == std::vector<double>{3.0, 6.0, 9.0});
  CHECK(ttr::kernels::dot(acc, x) == doctest::Approx(42.0));
}
