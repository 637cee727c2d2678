#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttr/nn/batchnorm.hpp"

namespace ttr::nn {

// Step activation on pre-activations: exactly zero maps to 0.
inline int bin_act(double x) { return x > 0.0 ? 1 : 0; }

// Geometry of one filter block: conv(A channels, k1 taps) -> optional
// channel batch norm -> ReLU -> conv(k2 taps over A channels) -> step.
// The block reads n = k1 + k2 - 1 consecutive binary inputs per patch and
// patches advance by `stride` input columns.
struct LttBlockSpec {
  int patch_width = 0;    // n, at most 9
  int stride = 1;         // s
  int amplification = 0;  // A
  int kernel1 = 0;        // k1
  int kernel2 = 0;        // k2
  bool has_inner_bn = true;

  void validate() const;

  // floor((input_len - n) / s) + 1; input_len must be at least n.
  int patch_count(std::size_t input_len) const;
};

struct LttBlockParams {
  LttBlockSpec spec;
  std::vector<double> w1;   // [A x k1], w1[a * k1 + q]
  std::vector<double> w2;   // [k2 x A], w2[t * A + a]
  BatchNormParams inner_bn; // over A channels; ignored unless has_inner_bn

  void validate() const;
};

// Pre-step output of one block on one patch of binary inputs, inference
// statistics. bits.size() must equal spec.patch_width.
double block_preactivation(const LttBlockParams& block,
                           std::span<const std::uint8_t> bits);

inline int block_forward(const LttBlockParams& block,
                         std::span<const std::uint8_t> bits) {
  return bin_act(block_preactivation(block, bits));
}

}  // namespace ttr::nn
