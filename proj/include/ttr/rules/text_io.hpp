#pragma once

#include <string>
#include <string_view>

#include "ttr/rules/ruleset.hpp"

namespace ttr::rules {

// One line per rule:
//   RULE <id> WEIGHTS <w,...> : (<lit> AND <lit>) OR (...)
// A literal is a feature name, NOT name, name > num, name < num, or the
// complements name <= num and name >= num; TRUE and FALSE stand for
// constant conditions. Names are bare when they use only
// [A-Za-z0-9_./=+-] and are not grammar keywords, double-quoted with
// backslash escapes otherwise. A BIAS line carries the per-class offsets
// and `# key: value` comments carry provenance, task, class labels, and
// the regression target affine.
std::string rules_to_text(const RuleSet& rs);

// Inverse of rules_to_text up to semantic equality: ids, weights, bias,
// and per-row firing survive the round trip; condition encodings may
// normalize (NOT x and an is-false test read back identically). Errors
// carry origin:line:column. The schema resolves feature names; parsed
// rules carry no filter provenance or truth tables.
RuleSet parse_rules(std::string_view text, const data::FeatureSchema& schema,
                    const std::string& origin = "<memory>");

void save_rules_text(const RuleSet& rs, const std::string& path);
RuleSet load_rules_text(const std::string& path,
                        const data::FeatureSchema& schema);

}  // namespace ttr::rules
