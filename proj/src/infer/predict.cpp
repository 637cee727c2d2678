#include "ttr/infer/predict.hpp"

#include "ttr/util/error.hpp"

namespace ttr::infer {

bool eval_rule(const rules::Rule& rule, std::span<const float> row) {
  for (const logic::Clause& clause : rule.dnf.clauses) {
    bool hold = true;
    for (const logic::Literal& lit : clause.literals) {
      const rules::Condition& cond = rule.conditions[lit.bit];
      bool value;
      if (cond.form == rules::ConditionForm::ConstTrue) {
        value = true;
      } else if (cond.form == rules::ConditionForm::ConstFalse) {
        value = false;
      } else {
        if (cond.column < 0 ||
            static_cast<std::size_t>(cond.column) >= row.size()) {
          throw ContractError("eval_rule: rule " + std::to_string(rule.rule_id) +
                              " binds feature '" + cond.feature +
                              "' outside the row");
        }
        value = cond.holds(
            static_cast<double>(row[static_cast<std::size_t>(cond.column)]));
      }
      if (value != lit.positive) {
        hold = false;
        break;
      }
    }
    if (hold) return true;
  }
  return false;
}

namespace {

Prediction score_rules(const rules::RuleSet& rs, std::span<const float> row) {
  if (row.size() != rs.schema.size()) {
    throw ContractError("predict: row width != schema width");
  }
  Prediction pred;
  pred.scores = rs.bias;
  pred.fired.resize(rs.rules.size());
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const rules::Rule& rule = rs.rules[i];
    const bool fire = eval_rule(rule, row);
    pred.fired[i] = fire ? 1 : 0;
    if (!fire) continue;
    for (std::size_t c = 0; c < rs.num_classes; ++c) {
      pred.scores[c] += rule.weights[c];
    }
  }
  return pred;
}

}  // namespace

Prediction classify(const rules::RuleSet& rs, std::span<const float> row) {
  if (rs.task == data::Task::Regression) {
    throw ContractError("classify: rule set is a regression model");
  }
  Prediction pred = score_rules(rs, row);
  if (pred.scores.size() == 2) {
    pred.label = pred.scores[1] - pred.scores[0] > 0.0 ? 1 : 0;
  } else {
    std::size_t best = 0;
    for (std::size_t c = 1; c < pred.scores.size(); ++c) {
      if (pred.scores[c] > pred.scores[best]) best = c;
    }
    pred.label = static_cast<int>(best);
  }
  return pred;
}

Prediction predict(const rules::RuleSet& rs, std::span<const float> row) {
  if (rs.task != data::Task::Regression) return classify(rs, row);
  Prediction pred = score_rules(rs, row);
  pred.value = pred.scores[0] * rs.target_affine.sd + rs.target_affine.mean;
  return pred;
}

}  // namespace ttr::infer
