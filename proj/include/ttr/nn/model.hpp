#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttr/data/dataset.hpp"
#include "ttr/nn/batchnorm.hpp"
#include "ttr/nn/ltt.hpp"
#include "ttr/rules/condition.hpp"
#include "ttr/util/rng.hpp"

namespace ttr::nn {

// binary_sparse: effective head weight is sign(latent) gated by a learned
// 0/1 mask, so trained weights land in {-1, 0, +1}. float: plain dense
// weights with dropout during training.
enum class HeadMode { BinarySparse, Float };

std::string_view head_mode_name(HeadMode mode);
HeadMode head_mode_from_name(std::string_view name);

// Full network: input batch norm -> step -> F filter blocks (shared
// geometry) -> step -> batch norm over rule slots -> linear head. Slot
// r = f * P + p holds filter f evaluated on patch p; the head reads slots in
// that order.
struct TTnetModel {
  data::FeatureSchema schema;
  data::Task task = data::Task::Binary;
  std::size_t num_classes = 2;  // 1 for regression
  std::vector<std::string> class_labels;

  BatchNormParams input_bn;            // over input columns
  std::vector<LttBlockParams> blocks;  // F blocks, identical spec
  BatchNormParams final_bn;            // over slots

  HeadMode head_mode = HeadMode::BinarySparse;
  std::vector<double> head_w;     // [slots x C]; latent for binary_sparse
  std::vector<double> head_mask;  // [slots x C]; binary_sparse only
  std::vector<double> head_bias;  // [C]
  double dropout_p = 0.0;         // float head training only

  data::TargetAffine target_affine;  // regression: fold-composed, original units

  // False until batch-norm statistics have been recomputed over the full
  // training fold; extraction requires it.
  bool bn_finalized = false;

  std::uint64_t seed = 0;
  std::string config_digest;

  const LttBlockSpec& block_spec() const;
  std::size_t filters() const { return blocks.size(); }
  std::size_t patches() const;
  std::size_t slots() const { return filters() * patches(); }

  double head_weight(std::size_t slot, std::size_t cls) const;

  void validate() const;
};

// Head with the final batch norm folded in:
//   score_c = bias[c] + sum_r w[r * C + c] * slot_bit_r.
struct FoldedHead {
  std::vector<double> w;     // [slots x C]
  std::vector<double> bias;  // [C]
};

FoldedHead fold_head(const TTnetModel& model);

struct ForwardResult {
  std::vector<std::uint8_t> input_bits;
  std::vector<std::uint8_t> slot_bits;
  std::vector<double> scores;
};

// Inference-statistics forward pass of one raw row. `training` additionally
// applies dropout to the pre-head activations (float head only); it then
// needs an Rng. Requires bn_finalized.
ForwardResult model_forward(const TTnetModel& model, std::span<const float> row,
                            bool training = false, ttr::Rng* rng = nullptr);

// Batch inference with per-filter truth tables cached so each block is
// evaluated by table lookup. Produces bit-identical results to
// model_forward; scores accumulate over slots in ascending order.
class ModelEvaluator {
 public:
  explicit ModelEvaluator(const TTnetModel& model);

  void slot_bits(std::span<const float> row, std::vector<std::uint8_t>& out) const;
  std::vector<double> scores(std::span<const std::uint8_t> slot_bits) const;
  std::vector<double> predict(std::span<const float> row) const;

  // Class index for classification (C = 2: class 1 iff score_1 - score_0 is
  // strictly positive; otherwise argmax with ties to the lowest index).
  int label_of(std::span<const double> scores) const;

  const std::vector<rules::Condition>& conditions() const { return conditions_; }
  const FoldedHead& head() const { return head_; }
  // Truth column of filter f, indexed by patch assignment (first patch bit
  // is the most significant index bit).
  const std::vector<std::uint8_t>& filter_table(std::size_t f) const {
    return tables_[f];
  }

 private:
  const TTnetModel& model_;
  std::vector<rules::Condition> conditions_;
  std::vector<std::vector<std::uint8_t>> tables_;
  FoldedHead head_;
  std::size_t patches_ = 0;
};

}  // namespace ttr::nn
