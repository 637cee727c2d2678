#pragma once

#include <cstdint>
#include <span>

#include "ttr/logic/dnf.hpp"

namespace ttr::logic {

struct QmOptions {
  // Cyclic cores with at most this many candidate implicants are solved
  // exactly for minimum total literal count; larger cores fall back to the
  // greedy cover. Cores beyond a few hundred candidates only show up for
  // adversarial wide-patch tables.
  int exact_cover_limit = 512;

  // Branch-and-bound node budget for one exact-cover search. When the
  // search exceeds it, the best cover found so far is kept (never worse
  // than the greedy cover that seeds the bound). Purely input-determined,
  // so results stay reproducible.
  long search_node_limit = 4000000;
};

// Two-level minimization of a truth-table column with optional don't-care
// rows. The result agrees with `outputs` on every row where dont_care is 0
// and is free on the rest. Prime implicants come from classic merging;
// cover selection runs essential extraction and dominance reduction, then an
// exact branch-and-bound on the remaining core (greedy beyond
// exact_cover_limit). Ties between minimal covers are broken by the
// lexicographic order of the implicant patterns, so equal inputs always give
// the identical formula.
//
// outputs.size() must be a power of two (2^n, n in [1, 9]); dont_care is
// either empty or the same size.
Dnf quine_mccluskey(std::span<const std::uint8_t> outputs,
                    std::span<const std::uint8_t> dont_care = {},
                    const QmOptions& options = {});

}  // namespace ttr::logic
