#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ttr/infer/metrics.hpp"
#include "ttr/infer/predict.hpp"
#include "ttr/rules/ruleset.hpp"
#include "ttr/util/error.hpp"

using namespace ttr;
using namespace ttr::infer;
using namespace ttr::rules;

namespace {

Condition binary_cond(const std::string& feature, int column,
                      ConditionForm form = ConditionForm::IsTrue) {
  Condition cond;
  cond.feature = feature;
  cond.column = column;
  cond.form = form;
  return cond;
}

// Two-rule binary rule set over columns a, b:
//   rule 0 fires when a is set, adds (0, 1)
//   rule 1 fires when b is clear, adds (0.5, -0.5)
RuleSet tiny_ruleset() {
  RuleSet rs;
  data::Column a;
  a.name = "a";
  data::Column b;
  b.name = "b";
  rs.schema.columns = {a, b};
  rs.task = data::Task::Binary;
  rs.num_classes = 2;
  rs.class_labels = {"neg", "pos"};
  rs.bias = {0.25, 0.0};

  Rule r0;
  r0.rule_id = 0;
  r0.dnf.num_bits = 1;
  r0.dnf.clauses.push_back({{{0, true}}});
  r0.conditions = {binary_cond("a", 0)};
  r0.weights = {0.0, 1.0};
  rs.rules.push_back(r0);

  Rule r1;
  r1.rule_id = 1;
  r1.dnf.num_bits = 1;
  r1.dnf.clauses.push_back({{{0, false}}});
  r1.conditions = {binary_cond("b", 1)};
  r1.weights = {0.5, -0.5};
  rs.rules.push_back(r1);
  return rs;
}

}  // namespace

TEST_CASE("rule evaluation respects polarity and condition form") {
  const RuleSet rs = tiny_ruleset();
  const std::vector<float> row10 = {1.0f, 0.0f};
  const std::vector<float> row01 = {0.0f, 1.0f};
  CHECK(eval_rule(rs.rules[0], row10));
  CHECK_FALSE(eval_rule(rs.rules[0], row01));
  CHECK(eval_rule(rs.rules[1], row10));
  CHECK_FALSE(eval_rule(rs.rules[1], row01));

  Rule gt;
  gt.dnf.num_bits = 1;
  gt.dnf.clauses.push_back({{{0, true}}});
  Condition cond = binary_cond("a", 0, ConditionForm::GreaterThan);
  cond.threshold = 0.5;
  gt.conditions = {cond};
  gt.weights = {1.0};
  CHECK(eval_rule(gt, row10));
  CHECK_FALSE(eval_rule(gt, row01));
  // Strict comparison at the threshold itself.
  const std::vector<float> at = {0.5f, 0.0f};
  CHECK_FALSE(eval_rule(gt, at));
}

TEST_CASE("constant conditions never read the row") {
  Rule rule;
  rule.rule_id = 0;
  rule.dnf.num_bits = 2;
  rule.dnf.clauses.push_back({{{0, true}, {1, false}}});
  Condition always = binary_cond("", -1, ConditionForm::ConstTrue);
  Condition never = binary_cond("", -1, ConditionForm::ConstFalse);
  rule.conditions = {always, never};
  rule.weights = {1.0};
  const std::vector<float> row;
  CHECK(eval_rule(rule, row));
}

TEST_CASE("out-of-range condition columns are rejected") {
  Rule rule;
  rule.dnf.num_bits = 1;
  rule.dnf.clauses.push_back({{{0, true}}});
  rule.conditions = {binary_cond("far", 5)};
  rule.weights = {1.0};
  const std::vector<float> row = {1.0f, 0.0f};
  CHECK_THROWS_AS(eval_rule(rule, row), ContractError);
}

TEST_CASE("classification accumulates bias plus fired weights") {
  const RuleSet rs = tiny_ruleset();
  const std::vector<float> row10 = {1.0f, 0.0f};
  const Prediction p = classify(rs, row10);
  REQUIRE(p.scores.size() == 2);
  CHECK(p.scores[0] == doctest::Approx(0.75));
  CHECK(p.scores[1] == doctest::Approx(0.5));
  CHECK(p.label == 0);
  CHECK(p.fired == std::vector<std::uint8_t>{1, 1});

  // Class 1 needs a strictly positive margin.
  const std::vector<float> row11 = {1.0f, 1.0f};
  const Prediction q = classify(rs, row11);
  CHECK(q.scores[0] == doctest::Approx(0.25));
  CHECK(q.scores[1] == doctest::Approx(1.0));
  CHECK(q.label == 1);
}

TEST_CASE("multiclass ties go to the lowest index") {
  RuleSet rs = tiny_ruleset();
  rs.task = data::Task::Multiclass;
  rs.num_classes = 3;
  rs.class_labels = {"a", "b", "c"};
  rs.bias = {1.0, 1.0, 0.5};
  rs.rules.clear();
  const std::vector<float> row = {0.0f, 0.0f};
  const Prediction p = classify(rs, row);
  CHECK(p.label == 0);
}

TEST_CASE("regression predictions map back to original units") {
  RuleSet rs = tiny_ruleset();
  rs.task = data::Task::Regression;
  rs.num_classes = 1;
  rs.class_labels.clear();
  rs.bias = {0.5};
  rs.rules[0].weights = {1.0};
  rs.rules[1].weights = {-0.25};
  rs.target_affine = {10.0, 2.0};
  const std::vector<float> row10 = {1.0f, 0.0f};
  const Prediction p = predict(rs, row10);
  // Both rules fire: standardized score 0.5 + 1 - 0.25 = 1.25.
  CHECK(p.scores[0] == doctest::Approx(1.25));
  CHECK(p.value == doctest::Approx(1.25 * 2.0 + 10.0));
  CHECK(p.label == -1);
}

TEST_CASE("accuracy counts exact label matches") {
  const std::vector<int> predicted = {0, 1, 1, 0};
  const std::vector<double> truth = {0.0, 1.0, 0.0, 0.0};
  CHECK(accuracy(predicted, truth) == doctest::Approx(0.75));
}

TEST_CASE("auc is the rank statistic with ties at half") {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<double> truth = {0.0, 0.0, 1.0, 1.0};
  CHECK(auc_score(scores, truth) == doctest::Approx(0.75));

  // Monotone transforms leave the statistic unchanged.
  std::vector<double> warped(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    warped[i] = std::exp(3.0 * scores[i]) - 2.0;
  }
  CHECK(auc_score(warped, truth) == doctest::Approx(0.75));

  const std::vector<double> tied = {0.5, 0.5};
  const std::vector<double> half = {0.0, 1.0};
  CHECK(auc_score(tied, half) == doctest::Approx(0.5));

  const std::vector<double> perfect = {0.0, 0.0, 1.0, 1.0};
  CHECK(auc_score(perfect, perfect) == doctest::Approx(1.0));

  const std::vector<double> lone = {0.0, 0.0};
  CHECK_THROWS_AS(auc_score(tied, lone), InputError);
}

TEST_CASE("rmse") {
  const std::vector<double> predicted = {1.0, 2.0, 3.0};
  const std::vector<double> truth = {1.0, 4.0, 1.0};
  CHECK(rmse(predicted, truth) == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(rmse(truth, truth) == doctest::Approx(0.0));
}
