#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "ttr/data/dataset.hpp"
#include "ttr/nn/model.hpp"

namespace ttr::nn {

struct TrainConfig {
  LttBlockSpec block;
  int filters = 0;
  int epochs = 0;
  int batch_size = 128;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
  // L2 pull on the head gate latents (binary_sparse only).
  double mask_weight_decay = 1e-7;
  HeadMode head_mode = HeadMode::BinarySparse;
  double dropout_p = 0.2;
  std::string config_digest;

  void validate() const;
};

// Minibatch Adam over the rows listed in train_rows, gradients hand-derived
// for the fixed layer stack. Every hard step backpropagates through the
// straight-through window |pre-activation| <= 1. Regression targets are
// re-standardized over the training fold and the composed affine stored on
// the model. After the last epoch the batch-norm statistics are replaced by
// the exact training-fold statistics and the model is marked finalized.
// Deterministic given config.seed.
TTnetModel train(const data::Dataset& ds,
                 std::span<const std::uint32_t> train_rows,
                 const TrainConfig& config);

// Replaces each batch-norm layer's running statistics with the population
// statistics of that layer's input over `rows`, in forward order so later
// layers see the refreshed transforms of earlier ones, then marks the model
// finalized. Idempotent.
void recompute_bn_stats(TTnetModel& model, const data::Dataset& ds,
                        std::span<const std::uint32_t> rows);

}  // namespace ttr::nn
