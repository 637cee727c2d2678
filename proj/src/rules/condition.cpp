#include "ttr/rules/condition.hpp"

#include <cmath>

#include "ttr/nn/ltt.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/text.hpp"

namespace ttr::rules {

std::string_view condition_form_name(ConditionForm form) {
  switch (form) {
    case ConditionForm::IsTrue:
      return "is_true";
    case ConditionForm::IsFalse:
      return "is_false";
    case ConditionForm::GreaterThan:
      return "greater_than";
    case ConditionForm::LessThan:
      return "less_than";
    case ConditionForm::ConstTrue:
      return "const_true";
    case ConditionForm::ConstFalse:
      return "const_false";
  }
  return "?";
}

ConditionForm condition_form_from_name(std::string_view name) {
  if (name == "is_true") return ConditionForm::IsTrue;
  if (name == "is_false") return ConditionForm::IsFalse;
  if (name == "greater_than") return ConditionForm::GreaterThan;
  if (name == "less_than") return ConditionForm::LessThan;
  if (name == "const_true") return ConditionForm::ConstTrue;
  if (name == "const_false") return ConditionForm::ConstFalse;
  throw ConfigError("unknown condition form '" + std::string(name) + "'");
}

std::string Condition::display() const {
  switch (form) {
    case ConditionForm::IsTrue:
      return feature;
    case ConditionForm::IsFalse:
      return "NOT " + feature;
    case ConditionForm::GreaterThan:
      return feature + " > " + format_sig(threshold, 4);
    case ConditionForm::LessThan:
      return feature + " < " + format_sig(threshold, 4);
    case ConditionForm::ConstTrue:
      return "TRUE";
    case ConditionForm::ConstFalse:
      return "FALSE";
  }
  return "?";
}

Condition derive_threshold(const nn::BatchNormParams& bn, int column,
                           const data::FeatureSchema& schema) {
  if (column < 0 || static_cast<std::size_t>(column) >= schema.size()) {
    throw ContractError("derive_threshold: column index out of range");
  }
  if (bn.channels() != schema.size()) {
    throw ContractError("derive_threshold: batch norm width != schema width");
  }
  const std::size_t c = static_cast<std::size_t>(column);
  const data::Column& col = schema.columns[c];

  Condition cond;
  cond.feature = col.name;
  cond.column = column;

  const double gamma = bn.gamma[c];
  const double beta = bn.beta[c];

  if (col.kind == data::ColumnKind::Continuous) {
    if (gamma == 0.0) {
      cond.form = nn::bin_act(beta) ? ConditionForm::ConstTrue
                                    : ConditionForm::ConstFalse;
      return cond;
    }
    const double sd = std::sqrt(bn.running_var[c] + nn::BatchNormParams::kEpsilon);
    cond.threshold = bn.running_mean[c] - beta * sd / gamma;
    cond.form = gamma > 0.0 ? ConditionForm::GreaterThan : ConditionForm::LessThan;
    return cond;
  }

  // Binary-valued column: the transform only ever sees 0 and 1.
  const double scale = bn.scale(c);
  const double shift = bn.shift(c);
  const bool at_zero = nn::bin_act(shift) != 0;
  const bool at_one = nn::bin_act(scale + shift) != 0;
  if (at_zero == at_one) {
    cond.form = at_zero ? ConditionForm::ConstTrue : ConditionForm::ConstFalse;
  } else {
    cond.form = at_one ? ConditionForm::IsTrue : ConditionForm::IsFalse;
  }
  return cond;
}

std::vector<Condition> input_conditions(const nn::BatchNormParams& bn,
                                        const data::FeatureSchema& schema) {
  std::vector<Condition> conditions;
  conditions.reserve(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    conditions.push_back(derive_threshold(bn, static_cast<int>(c), schema));
  }
  return conditions;
}

}  // namespace ttr::rules
