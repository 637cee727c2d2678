#pragma once

#include <string>
#include <vector>

#include "ttr/data/schema.hpp"
#include "ttr/nn/batchnorm.hpp"

namespace ttr::rules {

// Predicate shapes a rule literal can bind to. IsTrue/IsFalse test binary
// columns; GreaterThan/LessThan test raw continuous values against a learned
// threshold; ConstTrue/ConstFalse absorb columns whose binarization ignores
// the input (gamma of zero, or a threshold outside the value range of a
// binary column).
enum class ConditionForm {
  IsTrue,
  IsFalse,
  GreaterThan,
  LessThan,
  ConstTrue,
  ConstFalse,
};

std::string_view condition_form_name(ConditionForm form);
ConditionForm condition_form_from_name(std::string_view name);

struct Condition {
  std::string feature;
  int column = -1;  // index into the schema
  ConditionForm form = ConditionForm::IsTrue;
  double threshold = 0.0;  // comparison forms only

  // Value of the condition on a raw feature cell. Comparisons are strict;
  // the threshold keeps full precision (display is rounded, this is not).
  bool holds(double value) const {
    switch (form) {
      case ConditionForm::IsTrue:
        return value != 0.0;
      case ConditionForm::IsFalse:
        return value == 0.0;
      case ConditionForm::GreaterThan:
        return value > threshold;
      case ConditionForm::LessThan:
        return value < threshold;
      case ConditionForm::ConstTrue:
        return true;
      case ConditionForm::ConstFalse:
        return false;
    }
    return false;
  }

  // Human-readable form, thresholds rounded to 4 significant digits.
  std::string display() const;
};

// Condition computed by binarizing one batch-normalized input column.
// For a continuous column with gamma > 0 the bit is x > T with
// T = mean - beta * sqrt(var + eps) / gamma; gamma < 0 flips the comparison;
// gamma = 0 makes the bit constant. Binary columns evaluate the transform at
// 0 and 1 and collapse to IsTrue/IsFalse/constant.
Condition derive_threshold(const nn::BatchNormParams& bn, int column,
                           const data::FeatureSchema& schema);

// derive_threshold applied to every column.
std::vector<Condition> input_conditions(const nn::BatchNormParams& bn,
                                        const data::FeatureSchema& schema);

}  // namespace ttr::rules
