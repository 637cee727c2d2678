#include "ttr/rules/json_io.hpp"

#include "ttr/logic/truth_table.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/fs.hpp"
#include "util/serde.hpp"

namespace ttr::rules {

namespace {

constexpr const char* kFormat = "ttnet-ruleset";
constexpr int kVersion = 1;

using serde::Json;

Json condition_json(const Condition& cond) {
  return Json{{"feature", cond.feature},
              {"column", cond.column},
              {"form", std::string(condition_form_name(cond.form))},
              {"threshold", cond.threshold}};
}

Condition condition_from(const Json& doc) {
  Condition cond;
  cond.feature = serde::field_str(doc, "feature");
  cond.column = static_cast<int>(serde::field_int(doc, "column"));
  cond.form = condition_form_from_name(serde::field_str(doc, "form"));
  cond.threshold = serde::field_num(doc, "threshold");
  return cond;
}

Json rule_json(const Rule& rule) {
  Json clauses = Json::array();
  for (const logic::Clause& clause : rule.dnf.clauses) {
    Json lits = Json::array();
    for (const logic::Literal& lit : clause.literals) {
      lits.push_back(Json{{"bit", static_cast<int>(lit.bit)},
                          {"positive", lit.positive}});
    }
    clauses.push_back(std::move(lits));
  }
  Json conditions = Json::array();
  for (const Condition& cond : rule.conditions) {
    conditions.push_back(condition_json(cond));
  }
  Json doc{{"rule_id", rule.rule_id},
           {"filter_id", rule.filter_id},
           {"patch_id", rule.patch_id},
           {"num_bits", rule.dnf.num_bits},
           {"clauses", std::move(clauses)},
           {"conditions", std::move(conditions)},
           {"weights", rule.weights}};
  if (rule.realized.empty()) {
    doc["realized"] = nullptr;
  } else {
    doc["realized"] = logic::column_to_hex(rule.realized);
  }
  return doc;
}

Rule rule_from(const Json& doc) {
  Rule rule;
  rule.rule_id = static_cast<int>(serde::field_int(doc, "rule_id"));
  rule.filter_id = static_cast<int>(serde::field_int(doc, "filter_id"));
  rule.patch_id = static_cast<int>(serde::field_int(doc, "patch_id"));
  rule.dnf.num_bits = static_cast<int>(serde::field_int(doc, "num_bits"));
  if (rule.dnf.num_bits < 0 || rule.dnf.num_bits > 256) {
    throw ParseError("rule " + std::to_string(rule.rule_id) +
                     ": num_bits outside [0, 256]");
  }
  const Json& clauses = serde::field(doc, "clauses");
  if (!clauses.is_array()) throw ParseError("field 'clauses' is not an array");
  for (const Json& lits : clauses) {
    if (!lits.is_array()) throw ParseError("clause is not an array");
    logic::Clause clause;
    for (const Json& lit : lits) {
      const auto bit = serde::field_int(lit, "bit");
      if (bit < 0 || bit >= rule.dnf.num_bits) {
        throw ParseError("rule " + std::to_string(rule.rule_id) +
                         ": literal bit outside the patch");
      }
      clause.literals.push_back({static_cast<std::uint8_t>(bit),
                                 serde::field_bool(lit, "positive")});
    }
    rule.dnf.clauses.push_back(std::move(clause));
  }
  const Json& conditions = serde::field(doc, "conditions");
  if (!conditions.is_array()) {
    throw ParseError("field 'conditions' is not an array");
  }
  for (const Json& cond : conditions) {
    rule.conditions.push_back(condition_from(cond));
  }
  rule.weights = serde::field_dvec(doc, "weights");
  const Json& realized = serde::field(doc, "realized");
  if (!realized.is_null()) {
    if (!realized.is_string()) {
      throw ParseError("field 'realized' is neither null nor a hex string");
    }
    if (rule.dnf.num_bits > 20) {
      throw ParseError("rule " + std::to_string(rule.rule_id) +
                       ": realized column over more than 20 bits");
    }
    rule.realized = logic::column_from_hex(
        realized.get<std::string>(),
        static_cast<std::size_t>(1) << rule.dnf.num_bits);
  }
  return rule;
}

}  // namespace

std::string rules_to_json(const RuleSet& rs) {
  rs.validate();
  Json rules = Json::array();
  for (const Rule& rule : rs.rules) rules.push_back(rule_json(rule));
  Json tables = Json::array();
  for (const logic::TruthTable& table : rs.filter_tables) {
    tables.push_back(Json{{"filter_id", table.filter_id},
                          {"n", table.n},
                          {"hex", table.to_hex()}});
  }
  Json doc{{"format", kFormat},
           {"version", kVersion},
           {"provenance", std::string(provenance_name(rs.provenance))},
           {"task", std::string(data::task_name(rs.task))},
           {"num_classes", rs.num_classes},
           {"class_labels", rs.class_labels},
           {"schema", serde::schema_json(rs.schema)},
           {"block_spec", serde::spec_json(rs.block_spec)},
           {"bias", rs.bias},
           {"rules", std::move(rules)},
           {"filter_tables", std::move(tables)},
           {"target_affine", serde::affine_json(rs.target_affine)},
           {"seed", rs.seed},
           {"config_digest", rs.config_digest}};
  return doc.dump(1);
}

RuleSet rules_from_json(std::string_view text, const std::string& origin) {
  const Json doc = serde::parse_document(text, origin);
  if (serde::field_str(doc, "format") != kFormat) {
    throw ParseError(origin + ": not a " + std::string(kFormat) + " document");
  }
  if (serde::field_int(doc, "version") != kVersion) {
    throw ParseError(origin + ": unsupported version");
  }
  RuleSet rs;
  rs.provenance = provenance_from_name(serde::field_str(doc, "provenance"));
  rs.task = data::task_from_name(serde::field_str(doc, "task"));
  const auto classes = serde::field_int(doc, "num_classes");
  if (classes < 1) throw ParseError(origin + ": num_classes must be positive");
  rs.num_classes = static_cast<std::size_t>(classes);
  rs.class_labels = serde::field_svec(doc, "class_labels");
  rs.schema = serde::schema_from(serde::field(doc, "schema"));
  rs.block_spec = serde::spec_from(serde::field(doc, "block_spec"));
  rs.bias = serde::field_dvec(doc, "bias");
  const Json& rules = serde::field(doc, "rules");
  if (!rules.is_array()) throw ParseError("field 'rules' is not an array");
  for (const Json& rule : rules) rs.rules.push_back(rule_from(rule));
  const Json& tables = serde::field(doc, "filter_tables");
  if (!tables.is_array()) {
    throw ParseError("field 'filter_tables' is not an array");
  }
  for (const Json& table : tables) {
    rs.filter_tables.push_back(logic::TruthTable::from_hex(
        serde::field_str(table, "hex"),
        static_cast<int>(serde::field_int(table, "n")),
        static_cast<int>(serde::field_int(table, "filter_id"))));
  }
  rs.target_affine = serde::affine_from(serde::field(doc, "target_affine"));
  rs.seed = serde::field_u64(doc, "seed");
  rs.config_digest = serde::field_str(doc, "config_digest");
  rs.validate();
  return rs;
}

void save_rules_json(const RuleSet& rs, const std::string& path) {
  write_file(path, rules_to_json(rs));
}

RuleSet load_rules_json(const std::string& path) {
  return rules_from_json(read_file(path), path);
}

}  // namespace ttr::rules
