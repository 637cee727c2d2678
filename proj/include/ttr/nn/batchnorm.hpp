#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ttr::nn {

// Per-channel affine normalization. Training uses minibatch statistics and
// maintains the running estimates; inference uses the running estimates
// only. The inference transform is x * scale(c) + shift(c).
struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  std::size_t channels() const { return gamma.size(); }

  void init(std::size_t c) {
    gamma.assign(c, 1.0);
    beta.assign(c, 0.0);
    running_mean.assign(c, 0.0);
    running_var.assign(c, 1.0);
  }

  double scale(std::size_t c) const {
    return gamma[c] / std::sqrt(running_var[c] + kEpsilon);
  }

  double shift(std::size_t c) const {
    return beta[c] - running_mean[c] * scale(c);
  }

  void validate() const;
};

}  // namespace ttr::nn
