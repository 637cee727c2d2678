#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttr/data/dataset.hpp"
#include "ttr/logic/dnf.hpp"
#include "ttr/logic/truth_table.hpp"
#include "ttr/nn/ltt.hpp"
#include "ttr/rules/condition.hpp"

namespace ttr::rules {

// Where a rule set stands in the pipeline: fresh extraction, after
// impossible-input reduction, after correlated-filter merging.
enum class Provenance { RawR, DctReduced, TtcDeduped };

std::string_view provenance_name(Provenance p);
Provenance provenance_from_name(std::string_view name);

// One rule: a DNF over patch bits, each bit bound to a condition on a raw
// feature, plus one additive weight per class. A rule fires on a row when
// its DNF is satisfied by the bound condition values; firing adds the weight
// vector to the scores.
struct Rule {
  int rule_id = 0;    // slot index at extraction time; stable afterwards
  int filter_id = -1; // -1 for hand-written rules
  int patch_id = -1;
  logic::Dnf dnf;
  std::vector<Condition> conditions;  // conditions[j] binds patch bit j
  std::vector<double> weights;        // one per class
  // Output column the cover realizes (equals the filter table except on
  // rows freed as impossible). Exactness audits restrict to valid rows.
  std::vector<std::uint8_t> realized;

  bool all_weights_zero() const;
  void validate(std::size_t num_classes) const;
};

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<double> bias;  // one per class
  data::Task task = data::Task::Binary;
  std::size_t num_classes = 2;
  std::vector<std::string> class_labels;
  data::FeatureSchema schema;
  nn::LttBlockSpec block_spec;  // patch geometry the rules came from
  Provenance provenance = Provenance::RawR;
  // Raw filter truth columns, kept for merging and audit.
  std::vector<logic::TruthTable> filter_tables;
  data::TargetAffine target_affine;
  std::uint64_t seed = 0;
  std::string config_digest;

  std::size_t num_rules() const { return rules.size(); }
  void validate() const;
};

// (number of rules with a nonzero weight, total literal count over those
// rules). The literal total is the complexity measure optimization reports.
struct Complexity {
  std::size_t num_rules = 0;
  std::size_t total_literals = 0;
};

Complexity complexity(const RuleSet& rs);

// Upper bound on rule-set size straight from the architecture numbers:
// n * 2^(n-1) * floor((L - n) / s) * F.
std::int64_t estimate_complexity(int n, int input_len, int stride, int filters);

}  // namespace ttr::rules
