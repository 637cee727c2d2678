#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttr/rules/ruleset.hpp"

namespace ttr::infer {

struct Prediction {
  std::vector<double> scores;        // one per class (one entry, regression)
  int label = -1;                    // class index; -1 for regression
  double value = 0.0;                // regression: score in original units
  std::vector<std::uint8_t> fired;   // firing bit per rule, rule order
};

// Whether the rule's DNF is satisfied on a raw row: literal j holds when the
// bound condition's value matches the literal's polarity.
bool eval_rule(const rules::Rule& rule, std::span<const float> row);

// Rule-model scores: bias plus the weight sum of fired rules, accumulated in
// rule order. Classification labels: two classes pick 1 iff
// score_1 - score_0 > 0; more classes take the argmax with ties to the
// lowest index.
Prediction classify(const rules::RuleSet& rs, std::span<const float> row);

// classify for any task; regression fills `value` via the target affine.
Prediction predict(const rules::RuleSet& rs, std::span<const float> row);

}  // namespace ttr::infer
