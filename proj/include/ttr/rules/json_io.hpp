#pragma once

#include <string>
#include <string_view>

#include "ttr/rules/ruleset.hpp"

namespace ttr::rules {

// Complete machine-readable form: every RuleSet field survives, including
// filter truth tables (hex columns) and realized covers, so optimization
// and audits can resume from the file. Keys are sorted and doubles print
// in shortest round-trip form; equal rule sets serialize byte-identically.
std::string rules_to_json(const RuleSet& rs);
RuleSet rules_from_json(std::string_view text,
                        const std::string& origin = "<memory>");

void save_rules_json(const RuleSet& rs, const std::string& path);
RuleSet load_rules_json(const std::string& path);

}  // namespace ttr::rules
