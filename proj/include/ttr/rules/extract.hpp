#pragma once

#include <cstdint>
#include <span>

#include "ttr/nn/model.hpp"
#include "ttr/rules/ruleset.hpp"

namespace ttr::rules {

// Exactly-equivalent rule form of a finalized model: one rule per (filter,
// patch) slot, the filter's minimized truth table as the DNF, patch bits
// bound to input conditions, head weights folded through the final batch
// norm. Rules whose weights are all zero are dropped; the rest reproduce the
// network's scores bit for bit when summed in rule order.
RuleSet extract_rules(const nn::TTnetModel& model);

// Re-minimizes every rule with the assignments that schema's one-hot groups
// make impossible marked as free. Firing behavior is unchanged on every row
// that satisfies the one-hot constraints, and no rule ever gets more
// literals (re-minimization keeps the old cover when freeing rows cannot
// shrink it).
RuleSet apply_dct(const RuleSet& rs, const data::FeatureSchema& schema);

// Correlation of two truth-table output columns of equal length. Returns
// the agreement fraction a when a >= 0.5, otherwise -(1 - a); +1 means
// identical, -1 complementary. Values always land in [-1,-0.5] or [0.5,1].
double ttc(std::span<const std::uint8_t> table_a,
           std::span<const std::uint8_t> table_b);

// Greedy pairwise merge of filters whose tables correlate: scanning pairs
// (f, g) with f < g in ascending order, |ttc| >= threshold folds g's weights
// into f's slots (negated for anti-correlation, which also shifts the bias
// by g's weight since NOT r fires exactly when r does not). Merges at
// ttc = +/-1 preserve every score exactly; below 1 the merge trades accuracy
// for fewer rules. Never increases the rule count.
RuleSet dedup_filters(const RuleSet& rs, const nn::TTnetModel& model,
                      double threshold = 0.9);

}  // namespace ttr::rules
