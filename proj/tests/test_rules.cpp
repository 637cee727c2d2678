#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "ttr/infer/predict.hpp"
#include "ttr/nn/model.hpp"
#include "ttr/rules/extract.hpp"
#include "ttr/rules/json_io.hpp"
#include "ttr/rules/ruleset.hpp"
#include "ttr/rules/text_io.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

using namespace ttr;
using namespace ttr::rules;

namespace {

// Sorted feature names of one clause, prefixed with "!" when the literal
// tests the condition negatively.
std::vector<std::string> clause_signature(const Rule& rule,
                                          const logic::Clause& clause) {
  std::vector<std::string> parts;
  for (const auto& lit : clause.literals) {
    const Condition& cond = rule.conditions[lit.bit];
    parts.push_back((lit.positive ? "" : "!") + cond.feature);
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

bool rules_agree_with_model(const nn::TTnetModel& model, const RuleSet& rs,
                            double tolerance = 0.0) {
  const nn::ModelEvaluator ev(model);
  const int cols = static_cast<int>(model.schema.size());
  const std::vector<float> rows = fixtures::all_rows(cols);
  for (int r = 0; r < (1 << cols); ++r) {
    const std::span<const float> row(rows.data() + r * cols, cols);
    const std::vector<double> net = ev.predict(row);
    const auto p = infer::classify(rs, row);
    for (std::size_t c = 0; c < net.size(); ++c) {
      if (std::abs(net[c] - p.scores[c]) > tolerance) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("extraction yields one rule per slot with folded weights") {
  const nn::TTnetModel model = fixtures::census_model();
  const RuleSet rs = extract_rules(model);
  rs.validate();
  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.provenance == Provenance::RawR);
  CHECK(rs.num_classes == 2);
  REQUIRE(rs.filter_tables.size() == 1);
  CHECK(rs.filter_tables[0].outputs[1] == 1);

  // Both slots carry head weight (0, 1) scaled by the identity batch norm.
  const nn::FoldedHead head = nn::fold_head(model);
  for (int r = 0; r < 2; ++r) {
    const Rule& rule = rs.rules[static_cast<std::size_t>(r)];
    CHECK(rule.rule_id == r);
    CHECK(rule.filter_id == 0);
    CHECK(rule.patch_id == r);
    CHECK(rule.weights[0] == head.w[static_cast<std::size_t>(r) * 2]);
    CHECK(rule.weights[1] == head.w[static_cast<std::size_t>(r) * 2 + 1]);
    REQUIRE(rule.dnf.clauses.size() == 1);
    CHECK(rule.dnf.literal_count() == 4);
  }
  CHECK(rs.bias == head.bias);

  // Patch 0 reads columns 0..3, patch 1 columns 1..4.
  CHECK(clause_signature(rs.rules[0], rs.rules[0].dnf.clauses[0]) ==
        std::vector<std::string>{"!GoUni", "!Male", "!Married", "BornUS"});
  CHECK(clause_signature(rs.rules[1], rs.rules[1].dnf.clauses[0]) ==
        std::vector<std::string>{"!BornUS", "!GoUni", "!Married", "BornUK"});

  CHECK(rules_agree_with_model(model, rs));

  nn::TTnetModel unfinalized = fixtures::census_model();
  unfinalized.bn_finalized = false;
  CHECK_THROWS_AS(extract_rules(unfinalized), StateError);
}

TEST_CASE("impossible-input reduction drops the redundant country literal") {
  const nn::TTnetModel model = fixtures::census_model();
  const RuleSet raw = extract_rules(model);
  const RuleSet reduced = apply_dct(raw, model.schema);
  reduced.validate();
  CHECK(reduced.provenance == Provenance::DctReduced);
  REQUIRE(reduced.rules.size() == 2);

  // Patch 0 covers only one column of the country group: unchanged.
  CHECK(clause_signature(reduced.rules[0], reduced.rules[0].dnf.clauses[0]) ==
        std::vector<std::string>{"!GoUni", "!Male", "!Married", "BornUS"});

  // Patch 1 covers both country columns; assignments with both set are
  // impossible, which frees the cover to drop the BornUS test.
  REQUIRE(reduced.rules[1].dnf.clauses.size() == 1);
  CHECK(clause_signature(reduced.rules[1], reduced.rules[1].dnf.clauses[0]) ==
        std::vector<std::string>{"!GoUni", "!Married", "BornUK"});

  // Literal totals never grow.
  CHECK(complexity(reduced).total_literals <= complexity(raw).total_literals);
  CHECK(complexity(reduced).total_literals == 7);

  // Scores still match the network on every one-hot-valid row.
  const nn::ModelEvaluator ev(model);
  const std::vector<float> rows = fixtures::all_rows(5);
  for (int r = 0; r < 32; ++r) {
    const std::span<const float> row(rows.data() + r * 5, 5);
    const bool both_countries = row[3] != 0.0f && row[4] != 0.0f;
    if (both_countries) continue;
    CHECK(ev.predict(row) == infer::classify(reduced, row).scores);
  }
}

TEST_CASE("truth-table correlation is a signed agreement fraction") {
  const std::vector<std::uint8_t> y = {0, 1, 1, 0, 1, 0, 0, 0};
  std::vector<std::uint8_t> inverted(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) inverted[i] = 1 - y[i];
  CHECK(ttc(y, y) == 1.0);
  CHECK(ttc(y, inverted) == -1.0);

  // Six of eight rows agree.
  std::vector<std::uint8_t> mostly = y;
  mostly[0] = 1;
  mostly[4] = 0;
  CHECK(ttc(y, mostly) == doctest::Approx(0.75));

  // Two of eight agree: complement-leaning, reported negative.
  std::vector<std::uint8_t> contrary = inverted;
  contrary[1] = y[1];
  contrary[2] = y[2];
  CHECK(ttc(y, contrary) == doctest::Approx(-0.75));

  ttr::Rng rng(606);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::uint8_t> a(16);
    std::vector<std::uint8_t> b(16);
    for (std::size_t i = 0; i < 16; ++i) {
      a[i] = rng.bernoulli(0.5) ? 1 : 0;
      b[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    const double ab = ttc(a, b);
    CHECK(ttc(b, a) == ab);
    CHECK(std::abs(ab) <= 1.0);
    CHECK(std::abs(ab) >= 0.5);
  }

  CHECK_THROWS_AS(ttc(y, std::vector<std::uint8_t>(4, 0)), ContractError);
}

TEST_CASE("complementary filters merge without changing any score") {
  const nn::TTnetModel model = fixtures::complement_pair_model();
  model.validate();
  const RuleSet rs = extract_rules(model);
  REQUIRE(rs.filter_tables.size() == 2);

  // Precondition of the fixture: the second table is the exact complement.
  for (std::size_t r = 0; r < 8; ++r) {
    CHECK(rs.filter_tables[0].outputs[r] ==
          1 - rs.filter_tables[1].outputs[r]);
  }
  CHECK(ttc(rs.filter_tables[0].outputs, rs.filter_tables[1].outputs) == -1.0);

  const RuleSet merged = dedup_filters(rs, model, 0.9);
  merged.validate();
  CHECK(merged.provenance == Provenance::TtcDeduped);
  CHECK(merged.rules.size() < rs.rules.size());
  CHECK(rules_agree_with_model(model, merged, 1e-9));

  // Identical filters merge the same way.
  nn::TTnetModel twin = fixtures::complement_pair_model();
  twin.blocks[1] = twin.blocks[0];
  const RuleSet twin_rs = extract_rules(twin);
  CHECK(ttc(twin_rs.filter_tables[0].outputs,
            twin_rs.filter_tables[1].outputs) == 1.0);
  const RuleSet twin_merged = dedup_filters(twin_rs, twin, 0.9);
  CHECK(twin_merged.rules.size() < twin_rs.rules.size());
  CHECK(rules_agree_with_model(twin, twin_merged, 1e-9));

  // Thresholds outside the attainable correlation range are rejected.
  CHECK_THROWS_AS(dedup_filters(rs, model, 1.1), ContractError);
  CHECK_THROWS_AS(dedup_filters(rs, model, 0.2), ContractError);
}

TEST_CASE("architecture complexity estimate") {
  CHECK(estimate_complexity(5, 100, 5, 10) == 15200);
  CHECK(estimate_complexity(6, 17, 1, 5) == 10560);
  CHECK_THROWS_AS(estimate_complexity(0, 10, 1, 1), ContractError);
}

TEST_CASE("complexity counts only weighted rules") {
  RuleSet rs = extract_rules(fixtures::census_model());
  CHECK(complexity(rs).num_rules == 2);
  CHECK(complexity(rs).total_literals == 8);
  rs.rules[1].weights = {0.0, 0.0};
  CHECK(complexity(rs).num_rules == 1);
  CHECK(complexity(rs).total_literals == 4);
}

TEST_CASE("rule text round trips semantically") {
  RuleSet rs;
  data::Column plain;
  plain.name = "plain_name";
  data::Column spaced;
  spaced.name = "needs quoting";
  data::Column keyword;
  keyword.name = "AND";
  data::Column numeric;
  numeric.name = "temp.c";
  rs.schema.columns = {plain, spaced, keyword, numeric};
  rs.task = data::Task::Binary;
  rs.num_classes = 2;
  rs.class_labels = {"down", "up"};
  rs.bias = {0.125, -3.5};
  rs.seed = 987654321;
  rs.config_digest = "fixturedigest";

  Rule r0;
  r0.rule_id = 4;
  r0.dnf.num_bits = 3;
  r0.dnf.clauses.push_back({{{0, true}, {1, false}}});
  r0.dnf.clauses.push_back({{{2, true}}});
  Condition c0;
  c0.feature = "plain_name";
  c0.column = 0;
  c0.form = ConditionForm::IsTrue;
  Condition c1;
  c1.feature = "needs quoting";
  c1.column = 1;
  c1.form = ConditionForm::IsFalse;
  Condition c2;
  c2.feature = "temp.c";
  c2.column = 3;
  c2.form = ConditionForm::GreaterThan;
  c2.threshold = -12.625;
  r0.conditions = {c0, c1, c2};
  r0.weights = {1.25, -1.25};
  rs.rules.push_back(r0);

  Rule r1;
  r1.rule_id = 9;
  r1.dnf.num_bits = 2;
  r1.dnf.clauses.push_back({{{0, false}, {1, true}}});
  Condition k0;
  k0.feature = "AND";
  k0.column = 2;
  k0.form = ConditionForm::LessThan;
  k0.threshold = 0.3333333333333333;
  Condition k1;
  k1.feature = "";
  k1.column = -1;
  k1.form = ConditionForm::ConstTrue;
  r1.conditions = {k0, k1};
  r1.weights = {0.0, 2.0};
  rs.rules.push_back(r1);
  rs.validate();

  const std::string text = rules_to_text(rs);
  CHECK(text.find("\"needs quoting\"") != std::string::npos);
  CHECK(text.find("\"AND\"") != std::string::npos);
  CHECK(text.find("BIAS") != std::string::npos);
  CHECK(text.find("seed: 987654321") != std::string::npos);

  const RuleSet back = parse_rules(text, rs.schema);
  back.validate();
  REQUIRE(back.rules.size() == 2);
  CHECK(back.rules[0].rule_id == 4);
  CHECK(back.rules[1].rule_id == 9);
  CHECK(back.bias == rs.bias);
  CHECK(back.class_labels == rs.class_labels);
  CHECK(back.seed == rs.seed);
  CHECK(back.config_digest == rs.config_digest);
  CHECK(back.rules[0].weights == rs.rules[0].weights);
  CHECK(back.rules[1].weights == rs.rules[1].weights);

  // Firing agrees on randomized rows, thresholds included exactly.
  ttr::Rng rng(5150);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<float> row(4);
    row[0] = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    row[1] = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    row[2] = static_cast<float>(rng.uniform(-1.0, 1.0));
    row[3] = static_cast<float>(rng.uniform(-20.0, 0.0));
    if (trial == 0) row[3] = -12.625f;
    if (trial == 1) row[2] = static_cast<float>(0.3333333333333333);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(infer::eval_rule(rs.rules[i], row) ==
            infer::eval_rule(back.rules[i], row));
    }
  }

  // A second render is stable.
  CHECK(rules_to_text(back) == rules_to_text(parse_rules(text, rs.schema)));
}

TEST_CASE("rule text grammar errors carry position") {
  const data::FeatureSchema schema = fixtures::census_schema();

  const auto expect_parse_error = [&](const std::string& text,
                                      const std::string& needle) {
    try {
      parse_rules(text, schema, "bad.rules");
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CAPTURE(text);
      CAPTURE(msg);
      CHECK(msg.find("bad.rules:") != std::string::npos);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  expect_parse_error("RULE x WEIGHTS 1 : (Male)", "rule id");
  expect_parse_error("RULE 0 WEIGHTS 1,2 : (Unknown)", "Unknown");
  expect_parse_error("RULE 0 WEIGHTS 1,2 : (Male AND NOT Male)", "contradict");
  expect_parse_error(
      "RULE 0 WEIGHTS 1,2 : (Male)\nRULE 0 WEIGHTS 1,2 : (GoUni)",
      "duplicate");
  expect_parse_error("RULE 0 WEIGHTS 0,0 : (Male)", "zero");
  expect_parse_error("RULE 0 WEIGHTS 1,2 : (Male", "expected");
  expect_parse_error("BIAS 1,0\nBIAS 0,1\nRULE 0 WEIGHTS 1,2 : (Male)",
                     "BIAS");
  expect_parse_error("RULE 0 WEIGHTS 1,2 : (Male)\nRULE 1 WEIGHTS 1 : (GoUni)",
                     "weights");
  expect_parse_error("", "no rules");
}

TEST_CASE("negated comparisons keep the boundary row") {
  data::FeatureSchema schema;
  data::Column t;
  t.name = "t";
  t.kind = data::ColumnKind::Continuous;
  schema.columns = {t};

  // NOT (t > 2.5) renders as t <= 2.5 and must stay true at exactly 2.5.
  RuleSet rs;
  rs.schema = schema;
  rs.task = data::Task::Binary;
  rs.num_classes = 2;
  rs.class_labels = {"n", "y"};
  rs.bias = {0.0, 0.0};
  Rule rule;
  rule.rule_id = 0;
  rule.dnf.num_bits = 1;
  rule.dnf.clauses.push_back({{{0, false}}});
  Condition cond;
  cond.feature = "t";
  cond.column = 0;
  cond.form = ConditionForm::GreaterThan;
  cond.threshold = 2.5;
  rule.conditions = {cond};
  rule.weights = {0.0, 1.0};
  rs.rules.push_back(rule);

  const std::string text = rules_to_text(rs);
  CHECK(text.find("<=") != std::string::npos);
  const RuleSet back = parse_rules(text, schema);
  const std::vector<float> boundary = {2.5f};
  const std::vector<float> above = {2.5f + 0.25f};
  CHECK(infer::eval_rule(back.rules[0], boundary));
  CHECK(infer::eval_rule(rs.rules[0], boundary));
  CHECK_FALSE(infer::eval_rule(back.rules[0], above));
}

TEST_CASE("json io preserves every field byte for byte") {
  const nn::TTnetModel model = fixtures::census_model();
  RuleSet rs = extract_rules(model);
  rs.seed = 41;
  rs.config_digest = "deadbeef01";

  const std::string json = rules_to_json(rs);
  const RuleSet back = rules_from_json(json);
  back.validate();
  CHECK(rules_to_json(back) == json);

  CHECK(back.rules.size() == rs.rules.size());
  CHECK(back.bias == rs.bias);
  CHECK(back.seed == 41);
  CHECK(back.config_digest == "deadbeef01");
  CHECK(back.provenance == rs.provenance);
  CHECK(back.block_spec.patch_width == rs.block_spec.patch_width);
  REQUIRE(back.filter_tables.size() == 1);
  CHECK(back.filter_tables[0].outputs == rs.filter_tables[0].outputs);
  CHECK(back.rules[1].realized == rs.rules[1].realized);
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    CHECK(back.rules[i].dnf == rs.rules[i].dnf);
    CHECK(back.rules[i].weights == rs.rules[i].weights);
  }

  CHECK_THROWS_AS(rules_from_json("{}"), ParseError);
  CHECK_THROWS_AS(rules_from_json("[1,2]"), ParseError);
}
