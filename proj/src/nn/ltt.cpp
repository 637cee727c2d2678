#include "ttr/nn/ltt.hpp"

#include <string>

#include "ttr/util/error.hpp"

namespace ttr::nn {

void BatchNormParams::validate() const {
  const std::size_t c = gamma.size();
  if (beta.size() != c || running_mean.size() != c || running_var.size() != c) {
    throw ContractError("batch norm: parameter vectors disagree on channel count");
  }
  for (const double v : running_var) {
    if (v < 0.0) throw ContractError("batch norm: negative running variance");
  }
}

void LttBlockSpec::validate() const {
  if (patch_width < 1 || patch_width > 9) {
    throw ContractError("block spec: patch width " + std::to_string(patch_width) +
                        " outside [1, 9]");
  }
  if (stride < 1) throw ContractError("block spec: stride must be positive");
  if (amplification < 1) {
    throw ContractError("block spec: amplification must be positive");
  }
  if (kernel1 < 1 || kernel2 < 1) {
    throw ContractError("block spec: kernel sizes must be positive");
  }
  if (kernel1 + kernel2 - 1 != patch_width) {
    throw ContractError("block spec: k1 + k2 - 1 = " +
                        std::to_string(kernel1 + kernel2 - 1) +
                        " does not equal patch width " + std::to_string(patch_width));
  }
}

int LttBlockSpec::patch_count(std::size_t input_len) const {
  if (input_len < static_cast<std::size_t>(patch_width)) {
    throw ContractError("block spec: input length " + std::to_string(input_len) +
                        " shorter than patch width " + std::to_string(patch_width));
  }
  return static_cast<int>((input_len - static_cast<std::size_t>(patch_width)) /
                          static_cast<std::size_t>(stride)) +
         1;
}

void LttBlockParams::validate() const {
  spec.validate();
  const std::size_t a = static_cast<std::size_t>(spec.amplification);
  if (w1.size() != a * static_cast<std::size_t>(spec.kernel1)) {
    throw ContractError("block params: w1 size does not match A x k1");
  }
  if (w2.size() != static_cast<std::size_t>(spec.kernel2) * a) {
    throw ContractError("block params: w2 size does not match k2 x A");
  }
  if (spec.has_inner_bn) {
    inner_bn.validate();
    if (inner_bn.channels() != a) {
      throw ContractError("block params: inner batch norm channel count != A");
    }
  }
}

double block_preactivation(const LttBlockParams& block,
                           std::span<const std::uint8_t> bits) {
  const LttBlockSpec& spec = block.spec;
  if (bits.size() != static_cast<std::size_t>(spec.patch_width)) {
    throw ContractError("block_forward: expected " +
                        std::to_string(spec.patch_width) + " input bits, got " +
                        std::to_string(bits.size()));
  }
  const int a_count = spec.amplification;
  const int k1 = spec.kernel1;
  const int k2 = spec.kernel2;
  double out = 0.0;
  // First conv slides with unit stride inside the patch: position t reads
  // bits [t, t + k1).
  for (int t = 0; t < k2; ++t) {
    for (int a = 0; a < a_count; ++a) {
      double c = 0.0;
      const double* w1a = block.w1.data() + static_cast<std::size_t>(a * k1);
      for (int q = 0; q < k1; ++q) {
        if (bits[static_cast<std::size_t>(t + q)]) c += w1a[q];
      }
      if (spec.has_inner_bn) {
        c = c * block.inner_bn.scale(static_cast<std::size_t>(a)) +
            block.inner_bn.shift(static_cast<std::size_t>(a));
      }
      if (c > 0.0) {
        out += block.w2[static_cast<std::size_t>(t * a_count + a)] * c;
      }
    }
  }
  return out;
}

}  // namespace ttr::nn
