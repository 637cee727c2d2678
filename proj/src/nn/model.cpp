#include "ttr/nn/model.hpp"

#include <cmath>
#include <functional>

#include "ttr/util/error.hpp"

namespace ttr::nn {

std::string_view head_mode_name(HeadMode mode) {
  return mode == HeadMode::BinarySparse ? "binary_sparse" : "float";
}

HeadMode head_mode_from_name(std::string_view name) {
  if (name == "binary_sparse") return HeadMode::BinarySparse;
  if (name == "float") return HeadMode::Float;
  throw ConfigError("unknown head mode '" + std::string(name) + "'");
}

const LttBlockSpec& TTnetModel::block_spec() const {
  if (blocks.empty()) throw ContractError("model has no filter blocks");
  return blocks.front().spec;
}

std::size_t TTnetModel::patches() const {
  return static_cast<std::size_t>(block_spec().patch_count(schema.size()));
}

double TTnetModel::head_weight(std::size_t slot, std::size_t cls) const {
  const std::size_t i = slot * num_classes + cls;
  if (head_mode == HeadMode::Float) return head_w[i];
  const double sign = head_w[i] < 0.0 ? -1.0 : 1.0;
  const double gate = head_mask[i] > 0.0 ? 1.0 : 0.0;
  return sign * gate;
}

void TTnetModel::validate() const {
  schema.validate();
  if (blocks.empty()) throw ContractError("model has no filter blocks");
  const LttBlockSpec& spec = blocks.front().spec;
  for (const LttBlockParams& b : blocks) {
    b.validate();
    if (b.spec.patch_width != spec.patch_width || b.spec.stride != spec.stride ||
        b.spec.kernel1 != spec.kernel1 || b.spec.kernel2 != spec.kernel2 ||
        b.spec.amplification != spec.amplification ||
        b.spec.has_inner_bn != spec.has_inner_bn) {
      throw ContractError("model blocks disagree on geometry");
    }
  }
  input_bn.validate();
  if (input_bn.channels() != schema.size()) {
    throw ContractError("input batch norm width != schema width");
  }
  const std::size_t s = slots();
  final_bn.validate();
  if (final_bn.channels() != s) {
    throw ContractError("final batch norm width != slot count");
  }
  if (num_classes < 1) throw ContractError("model needs at least one output");
  if (task == data::Task::Regression && num_classes != 1) {
    throw ContractError("regression model must have a single output");
  }
  if (head_w.size() != s * num_classes) {
    throw ContractError("head weight size != slots x classes");
  }
  if (head_mode == HeadMode::BinarySparse && head_mask.size() != head_w.size()) {
    throw ContractError("binary_sparse head needs a mask per weight");
  }
  if (head_bias.size() != num_classes) {
    throw ContractError("head bias size != class count");
  }
}

FoldedHead fold_head(const TTnetModel& model) {
  const std::size_t slots = model.slots();
  const std::size_t classes = model.num_classes;
  FoldedHead folded;
  folded.w.resize(slots * classes);
  folded.bias = model.head_bias;
  for (std::size_t r = 0; r < slots; ++r) {
    const double scale = model.final_bn.scale(r);
    const double shift = model.final_bn.shift(r);
    for (std::size_t c = 0; c < classes; ++c) {
      const double w = model.head_weight(r, c);
      folded.w[r * classes + c] = w * scale;
      folded.bias[c] += w * shift;
    }
  }
  return folded;
}

namespace {

// Patch p of filter f covers input columns [p * s, p * s + n).
void patch_bits_to_slots(const TTnetModel& model,
                         const std::vector<std::uint8_t>& input_bits,
                         const std::function<int(std::size_t, std::span<const std::uint8_t>)>& block_eval,
                         std::vector<std::uint8_t>& slot_bits) {
  const LttBlockSpec& spec = model.block_spec();
  const std::size_t patches = model.patches();
  const std::size_t n = static_cast<std::size_t>(spec.patch_width);
  const std::size_t stride = static_cast<std::size_t>(spec.stride);
  slot_bits.assign(model.slots(), 0);
  for (std::size_t f = 0; f < model.filters(); ++f) {
    for (std::size_t p = 0; p < patches; ++p) {
      const std::span<const std::uint8_t> patch(input_bits.data() + p * stride, n);
      slot_bits[f * patches + p] =
          static_cast<std::uint8_t>(block_eval(f, patch));
    }
  }
}

std::vector<double> head_scores(const FoldedHead& head, std::size_t classes,
                                std::span<const std::uint8_t> slot_bits) {
  // Plain ascending-slot accumulation; the rule-side classifier sums in the
  // same order so scores agree bit for bit.
  std::vector<double> scores = head.bias;
  for (std::size_t r = 0; r < slot_bits.size(); ++r) {
    if (!slot_bits[r]) continue;
    const double* w = head.w.data() + r * classes;
    for (std::size_t c = 0; c < classes; ++c) scores[c] += w[c];
  }
  return scores;
}

}  // namespace

ForwardResult model_forward(const TTnetModel& model, std::span<const float> row,
                            bool training, ttr::Rng* rng) {
  if (!model.bn_finalized) {
    throw StateError("model_forward: batch-norm statistics not finalized");
  }
  if (row.size() != model.schema.size()) {
    throw ContractError("model_forward: row width != schema width");
  }
  ForwardResult result;
  const auto conditions = rules::input_conditions(model.input_bn, model.schema);
  result.input_bits.resize(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    result.input_bits[c] =
        conditions[c].holds(static_cast<double>(row[c])) ? 1 : 0;
  }
  patch_bits_to_slots(
      model, result.input_bits,
      [&](std::size_t f, std::span<const std::uint8_t> patch) {
        return block_forward(model.blocks[f], patch);
      },
      result.slot_bits);

  const FoldedHead head = fold_head(model);
  // Dropout rescales surviving activations by 1/(1-p); a dropped slot simply
  // contributes nothing.
  if (training && model.head_mode == HeadMode::Float && model.dropout_p > 0.0) {
    if (rng == nullptr) {
      throw ContractError("model_forward: training dropout needs an Rng");
    }
    std::vector<double> scores = head.bias;
    const double keep = 1.0 - model.dropout_p;
    for (std::size_t r = 0; r < result.slot_bits.size(); ++r) {
      const bool kept = !rng->bernoulli(model.dropout_p);
      if (!result.slot_bits[r] || !kept) continue;
      const double* w = head.w.data() + r * model.num_classes;
      for (std::size_t c = 0; c < model.num_classes; ++c) {
        scores[c] += w[c] / keep;
      }
    }
    result.scores = std::move(scores);
  } else {
    result.scores = head_scores(head, model.num_classes, result.slot_bits);
  }
  return result;
}

ModelEvaluator::ModelEvaluator(const TTnetModel& model) : model_(model) {
  if (!model.bn_finalized) {
    throw StateError("ModelEvaluator: batch-norm statistics not finalized");
  }
  model.validate();
  conditions_ = rules::input_conditions(model.input_bn, model.schema);
  head_ = fold_head(model);
  patches_ = model.patches();

  const int n = model.block_spec().patch_width;
  const std::size_t rows = static_cast<std::size_t>(1) << n;
  tables_.resize(model.filters());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (std::size_t f = 0; f < model.filters(); ++f) {
    tables_[f].resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      // Patch bit j sits at index bit n-1-j: the first patch column is the
      // most significant bit of the row index.
      for (int j = 0; j < n; ++j) {
        bits[static_cast<std::size_t>(j)] =
            static_cast<std::uint8_t>((r >> (n - 1 - j)) & 1);
      }
      tables_[f][r] = static_cast<std::uint8_t>(block_forward(model.blocks[f], bits));
    }
  }
}

void ModelEvaluator::slot_bits(std::span<const float> row,
                               std::vector<std::uint8_t>& out) const {
  if (row.size() != model_.schema.size()) {
    throw ContractError("ModelEvaluator: row width != schema width");
  }
  const LttBlockSpec& spec = model_.block_spec();
  const int n = spec.patch_width;
  const std::size_t stride = static_cast<std::size_t>(spec.stride);

  std::vector<std::uint8_t> input_bits(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    input_bits[c] = conditions_[c].holds(static_cast<double>(row[c])) ? 1 : 0;
  }
  out.assign(model_.slots(), 0);
  for (std::size_t p = 0; p < patches_; ++p) {
    std::size_t index = 0;
    const std::size_t base = p * stride;
    for (int j = 0; j < n; ++j) {
      index = (index << 1) | input_bits[base + static_cast<std::size_t>(j)];
    }
    for (std::size_t f = 0; f < model_.filters(); ++f) {
      out[f * patches_ + p] = tables_[f][index];
    }
  }
}

std::vector<double> ModelEvaluator::scores(
    std::span<const std::uint8_t> slot_bits) const {
  return head_scores(head_, model_.num_classes, slot_bits);
}

std::vector<double> ModelEvaluator::predict(std::span<const float> row) const {
  std::vector<std::uint8_t> bits;
  slot_bits(row, bits);
  return scores(bits);
}

int ModelEvaluator::label_of(std::span<const double> scores) const {
  if (model_.task == data::Task::Regression) {
    throw ContractError("label_of: regression model has no class label");
  }
  if (scores.size() == 2) {
    return scores[1] - scores[0] > 0.0 ? 1 : 0;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace ttr::nn
