#include "ttr/rules/ruleset.hpp"

#include <set>

#include "ttr/util/error.hpp"

namespace ttr::rules {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::RawR:
      return "raw_R";
    case Provenance::DctReduced:
      return "dct_reduced";
    case Provenance::TtcDeduped:
      return "ttc_deduped";
  }
  return "?";
}

Provenance provenance_from_name(std::string_view name) {
  if (name == "raw_R") return Provenance::RawR;
  if (name == "dct_reduced") return Provenance::DctReduced;
  if (name == "ttc_deduped") return Provenance::TtcDeduped;
  throw ConfigError("unknown provenance '" + std::string(name) + "'");
}

bool Rule::all_weights_zero() const {
  for (const double w : weights) {
    if (w != 0.0) return false;
  }
  return true;
}

void Rule::validate(std::size_t num_classes) const {
  if (weights.size() != num_classes) {
    throw ContractError("rule " + std::to_string(rule_id) +
                        ": weight count != class count");
  }
  if (conditions.size() != static_cast<std::size_t>(dnf.num_bits)) {
    throw ContractError("rule " + std::to_string(rule_id) +
                        ": one condition per patch bit required");
  }
  for (const logic::Clause& clause : dnf.clauses) {
    for (const logic::Literal& lit : clause.literals) {
      if (static_cast<int>(lit.bit) >= dnf.num_bits) {
        throw ContractError("rule " + std::to_string(rule_id) +
                            ": literal outside patch");
      }
    }
  }
  if (!realized.empty() &&
      realized.size() != (static_cast<std::size_t>(1) << dnf.num_bits)) {
    throw ContractError("rule " + std::to_string(rule_id) +
                        ": realized column size != 2^n");
  }
}

void RuleSet::validate() const {
  schema.validate();
  if (bias.size() != num_classes) {
    throw ContractError("rule set: bias size != class count");
  }
  std::set<int> seen_ids;
  for (const Rule& rule : rules) {
    rule.validate(num_classes);
    if (!seen_ids.insert(rule.rule_id).second) {
      throw ContractError("rule set: duplicate rule id " +
                          std::to_string(rule.rule_id));
    }
    if (rule.all_weights_zero()) {
      throw ContractError("rule set: rule " + std::to_string(rule.rule_id) +
                          " has all-zero weights");
    }
    for (const Condition& cond : rule.conditions) {
      const bool constant = cond.form == ConditionForm::ConstTrue ||
                            cond.form == ConditionForm::ConstFalse;
      if (cond.column < 0 && constant) continue;
      if (cond.column < 0 ||
          static_cast<std::size_t>(cond.column) >= schema.size()) {
        throw ContractError("rule set: rule " + std::to_string(rule.rule_id) +
                            " binds unknown column");
      }
    }
  }
}

Complexity complexity(const RuleSet& rs) {
  Complexity result;
  for (const Rule& rule : rs.rules) {
    if (rule.all_weights_zero()) continue;
    ++result.num_rules;
    result.total_literals += rule.dnf.literal_count();
  }
  return result;
}

std::int64_t estimate_complexity(int n, int input_len, int stride, int filters) {
  if (n < 1 || n > 9) throw ContractError("estimate_complexity: n outside [1, 9]");
  if (stride < 1) throw ContractError("estimate_complexity: stride must be positive");
  if (filters < 1) throw ContractError("estimate_complexity: filters must be positive");
  if (input_len < n) {
    throw ContractError("estimate_complexity: input length shorter than patch");
  }
  const std::int64_t patches = (input_len - n) / stride;
  return static_cast<std::int64_t>(n) * (std::int64_t{1} << (n - 1)) * patches *
         filters;
}

}  // namespace ttr::rules
