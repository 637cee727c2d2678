#include "ttr/logic/quine_mccluskey.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <vector>

#include "ttr/util/error.hpp"

namespace ttr::logic {
namespace {

// care bit set = variable fixed to the corresponding value bit. An implicant
// covers row r iff (r & care) == value. Bits use the row-index convention
// (patch bit j at index bit n-1-j).
struct Implicant {
  std::uint16_t value = 0;
  std::uint16_t care = 0;
};

int literal_cost(const Implicant& imp) { return std::popcount(imp.care); }

// Pattern order: per variable, fixed-0 < fixed-1 < free, scanning patch bits
// first to last. This is the tie-breaking order for covers.
bool pattern_less(const Implicant& a, const Implicant& b, int n) {
  for (int j = 0; j < n; ++j) {
    const int rb = n - 1 - j;
    const auto rank = [rb](const Implicant& imp) {
      if (!((imp.care >> rb) & 1)) return 2;
      return (imp.value >> rb) & 1;
    };
    const int ra = rank(a);
    const int rb2 = rank(b);
    if (ra != rb2) return ra < rb2;
  }
  return false;
}

// Word-packed set of on-row positions.
class RowSet {
 public:
  explicit RowSet(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= 1ull << (i % 64); }
  void clear(std::size_t i) { words_[i / 64] &= ~(1ull << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }

  std::size_t count() const {
    std::size_t c = 0;
    for (const std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool any() const {
    for (const std::uint64_t w : words_) {
      if (w) return true;
    }
    return false;
  }

  bool subset_of(const RowSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
  }

  std::size_t intersect_count(const RowSet& other) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    }
    return c;
  }

  void subtract(const RowSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  }

  std::size_t size() const { return bits_; }

 private:
  std::size_t bits_;
  std::vector<std::uint64_t> words_;
};

std::vector<Implicant> prime_implicants(const std::vector<std::uint16_t>& minterms,
                                        int n) {
  const std::uint16_t full =
      static_cast<std::uint16_t>((1u << n) - 1u);
  std::set<std::pair<std::uint16_t, std::uint16_t>> current;  // (care, value)
  for (const std::uint16_t m : minterms) current.insert({full, m});

  std::vector<Implicant> primes;
  while (!current.empty()) {
    std::set<std::pair<std::uint16_t, std::uint16_t>> next;
    std::set<std::pair<std::uint16_t, std::uint16_t>> merged;
    for (const auto& entry : current) {
      const std::uint16_t care = entry.first;
      const std::uint16_t value = entry.second;
      for (int b = 0; b < n; ++b) {
        const std::uint16_t bit = static_cast<std::uint16_t>(1u << b);
        if (!(care & bit) || (value & bit)) continue;
        // Partner has the same care mask and this bit set to 1.
        const auto partner = std::make_pair(care, static_cast<std::uint16_t>(value | bit));
        if (current.count(partner)) {
          next.insert({static_cast<std::uint16_t>(care & ~bit), value});
          merged.insert(entry);
          merged.insert(partner);
        }
      }
    }
    for (const auto& entry : current) {
      if (!merged.count(entry)) primes.push_back({entry.second, entry.first});
    }
    current = std::move(next);
  }
  return primes;
}

struct CoverProblem {
  int n = 0;
  std::vector<Implicant> primes;       // pattern-sorted
  std::vector<RowSet> coverage;        // per prime, over on-row positions
  std::vector<std::uint16_t> on_rows;  // row index per position
};

// Exact minimum-literal cover of the remaining rows by branch and bound.
// Equal-cost solutions resolve to the lexicographically smallest selection
// (by pattern order of the sorted chosen implicants).
class ExactCover {
 public:
  ExactCover(const CoverProblem& problem, const std::vector<int>& active,
             long node_limit)
      : problem_(problem), active_(active), nodes_left_(node_limit) {
    min_cost_ = 1 << 30;
    max_cover_ = 1;
    for (const int p : active_) {
      min_cost_ = std::min(min_cost_, literal_cost(problem_.primes[static_cast<std::size_t>(p)]));
      max_cover_ = std::max(max_cover_,
                            problem_.coverage[static_cast<std::size_t>(p)].count());
    }
    if (min_cost_ == (1 << 30)) min_cost_ = 0;
  }

  // `uncovered` positions refer to problem_.on_rows.
  std::vector<int> solve(const RowSet& uncovered, int initial_bound,
                         const std::vector<int>& initial) {
    best_cost_ = initial_bound;
    best_ = initial;
    std::vector<int> chosen;
    RowSet rows = uncovered;
    search(rows, chosen, 0);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  int lower_bound(std::size_t uncovered_count) const {
    if (uncovered_count == 0) return 0;
    const std::size_t sets =
        (uncovered_count + max_cover_ - 1) / max_cover_;
    return static_cast<int>(sets) * min_cost_;
  }

  void search(RowSet& uncovered, std::vector<int>& chosen, int cost) {
    if (nodes_left_ <= 0) return;
    --nodes_left_;
    const std::size_t remaining = uncovered.count();
    if (remaining == 0) {
      if (cost < best_cost_ || (cost == best_cost_ && selection_less(chosen))) {
        best_cost_ = cost;
        best_ = chosen;
        std::sort(best_.begin(), best_.end());
      }
      return;
    }
    if (cost + lower_bound(remaining) > best_cost_) return;

    // Branch on the uncovered row with the fewest candidate primes.
    std::size_t pivot = uncovered.size();
    std::size_t pivot_count = active_.size() + 1;
    for (std::size_t pos = 0; pos < uncovered.size(); ++pos) {
      if (!uncovered.test(pos)) continue;
      std::size_t c = 0;
      for (const int p : active_) {
        if (problem_.coverage[static_cast<std::size_t>(p)].test(pos)) ++c;
      }
      if (c < pivot_count) {
        pivot_count = c;
        pivot = pos;
        if (c <= 1) break;
      }
    }
    if (pivot_count == 0) return;  // row not coverable; caller guarantees otherwise

    for (const int p : active_) {
      const RowSet& cov = problem_.coverage[static_cast<std::size_t>(p)];
      if (!cov.test(pivot)) continue;
      RowSet rest = uncovered;
      rest.subtract(cov);
      chosen.push_back(p);
      search(rest, chosen, cost + literal_cost(problem_.primes[static_cast<std::size_t>(p)]));
      chosen.pop_back();
    }
  }

  bool selection_less(std::vector<int> candidate) const {
    std::sort(candidate.begin(), candidate.end());
    std::vector<int> current = best_;
    std::sort(current.begin(), current.end());
    return candidate < current;  // prime indices are pattern-sorted
  }

  const CoverProblem& problem_;
  const std::vector<int>& active_;
  int best_cost_ = 0;
  std::vector<int> best_;
  int min_cost_ = 0;
  std::size_t max_cover_ = 1;
  long nodes_left_ = 0;
};

std::vector<int> greedy_cover(const CoverProblem& problem,
                              const std::vector<int>& active,
                              const RowSet& uncovered_in) {
  std::vector<int> chosen;
  RowSet uncovered = uncovered_in;
  while (uncovered.any()) {
    int best = -1;
    std::size_t best_new = 0;
    int best_cost = 0;
    for (const int p : active) {
      const std::size_t gain =
          problem.coverage[static_cast<std::size_t>(p)].intersect_count(uncovered);
      if (gain == 0) continue;
      const int cost = literal_cost(problem.primes[static_cast<std::size_t>(p)]);
      // Most newly covered rows; then fewest literals; then pattern order.
      const bool better =
          best < 0 || gain > best_new || (gain == best_new && cost < best_cost);
      if (better) {
        best = p;
        best_new = gain;
        best_cost = cost;
      }
    }
    if (best < 0) {
      throw ContractError("cover: uncovered row has no candidate implicant");
    }
    chosen.push_back(best);
    uncovered.subtract(problem.coverage[static_cast<std::size_t>(best)]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Clause implicant_to_clause(const Implicant& imp, int n) {
  Clause clause;
  for (int j = 0; j < n; ++j) {
    const int rb = n - 1 - j;
    if ((imp.care >> rb) & 1) {
      clause.literals.push_back(
          {static_cast<std::uint8_t>(j), ((imp.value >> rb) & 1) != 0});
    }
  }
  return clause;
}

}  // namespace

Dnf quine_mccluskey(std::span<const std::uint8_t> outputs,
                    std::span<const std::uint8_t> dont_care,
                    const QmOptions& options) {
  const std::size_t size = outputs.size();
  if (size < 2 || (size & (size - 1)) != 0 || size > 512) {
    throw ContractError("quine_mccluskey: output column size must be 2^n, n in [1, 9]");
  }
  if (!dont_care.empty() && dont_care.size() != size) {
    throw ContractError("quine_mccluskey: don't-care mask size mismatch");
  }
  const int n = std::countr_zero(size);

  std::vector<std::uint16_t> on;
  std::vector<std::uint16_t> care_minterms;
  for (std::size_t r = 0; r < size; ++r) {
    if (outputs[r] > 1) throw ContractError("quine_mccluskey: non-boolean output");
    const bool dc = !dont_care.empty() && dont_care[r] != 0;
    if (dc) {
      care_minterms.push_back(static_cast<std::uint16_t>(r));
    } else if (outputs[r]) {
      on.push_back(static_cast<std::uint16_t>(r));
      care_minterms.push_back(static_cast<std::uint16_t>(r));
    }
  }
  if (on.empty()) return Dnf::constant(false, n);

  CoverProblem problem;
  problem.n = n;
  problem.primes = prime_implicants(care_minterms, n);
  std::sort(problem.primes.begin(), problem.primes.end(),
            [n](const Implicant& a, const Implicant& b) {
              return pattern_less(a, b, n);
            });
  problem.on_rows = on;
  problem.coverage.reserve(problem.primes.size());
  for (const Implicant& imp : problem.primes) {
    RowSet rows(on.size());
    for (std::size_t pos = 0; pos < on.size(); ++pos) {
      if ((on[pos] & imp.care) == imp.value) rows.set(pos);
    }
    problem.coverage.push_back(std::move(rows));
  }

  std::vector<int> chosen;
  std::vector<char> picked(problem.primes.size(), 0);
  std::vector<char> removed(problem.primes.size(), 0);
  RowSet uncovered(on.size());
  for (std::size_t pos = 0; pos < on.size(); ++pos) uncovered.set(pos);
  std::vector<char> row_active(on.size(), 1);

  // Essential extraction and dominance reduction to a cyclic core.
  bool changed = true;
  while (changed && uncovered.any()) {
    changed = false;

    for (std::size_t pos = 0; pos < on.size(); ++pos) {
      if (!row_active[pos] || !uncovered.test(pos)) continue;
      int sole = -1;
      int count = 0;
      for (std::size_t p = 0; p < problem.primes.size(); ++p) {
        if (removed[p] || picked[p]) continue;
        if (problem.coverage[p].test(pos)) {
          sole = static_cast<int>(p);
          if (++count > 1) break;
        }
      }
      if (count == 1) {
        picked[static_cast<std::size_t>(sole)] = 1;
        chosen.push_back(sole);
        uncovered.subtract(problem.coverage[static_cast<std::size_t>(sole)]);
        changed = true;
      }
    }
    for (std::size_t pos = 0; pos < on.size(); ++pos) {
      if (!uncovered.test(pos)) row_active[pos] = 0;
    }
    if (!uncovered.any()) break;

    // Row dominance: if the candidate primes of r1 are a subset of those of
    // r2, covering r1 covers r2; drop r2.
    std::vector<std::vector<std::uint32_t>> row_primes(on.size());
    std::vector<int> candidates;
    for (std::size_t p = 0; p < problem.primes.size(); ++p) {
      if (removed[p] || picked[p]) continue;
      if (!problem.coverage[p].intersect_count(uncovered)) continue;
      candidates.push_back(static_cast<int>(p));
      for (std::size_t pos = 0; pos < on.size(); ++pos) {
        if (row_active[pos] && problem.coverage[p].test(pos)) {
          row_primes[pos].push_back(static_cast<std::uint32_t>(p));
        }
      }
    }
    for (std::size_t r1 = 0; r1 < on.size(); ++r1) {
      if (!row_active[r1]) continue;
      for (std::size_t r2 = 0; r2 < on.size(); ++r2) {
        if (r1 == r2 || !row_active[r2]) continue;
        if (row_primes[r1].size() > row_primes[r2].size()) continue;
        // Equal candidate sets are symmetric; keep the lower row index.
        if (row_primes[r1].size() == row_primes[r2].size() && r1 > r2) continue;
        if (std::includes(row_primes[r2].begin(), row_primes[r2].end(),
                          row_primes[r1].begin(), row_primes[r1].end())) {
          row_active[r2] = 0;
          uncovered.clear(r2);
          changed = true;
        }
      }
    }

    // Prime dominance on the active rows: drop p when another candidate
    // covers a superset of its rows at no higher literal cost. Skipped for
    // very large candidate lists; it only speeds up the core search.
    if (candidates.size() <= 4096) {
      std::vector<RowSet> masked;
      masked.reserve(candidates.size());
      for (const int p : candidates) {
        RowSet rs(on.size());
        for (std::size_t pos = 0; pos < on.size(); ++pos) {
          if (row_active[pos] && uncovered.test(pos) &&
              problem.coverage[static_cast<std::size_t>(p)].test(pos)) {
            rs.set(pos);
          }
        }
        masked.push_back(std::move(rs));
      }
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::size_t p = static_cast<std::size_t>(candidates[i]);
        if (removed[p]) continue;
        for (std::size_t j = 0; j < candidates.size(); ++j) {
          if (i == j) continue;
          const std::size_t q = static_cast<std::size_t>(candidates[j]);
          if (removed[q]) continue;
          if (literal_cost(problem.primes[q]) > literal_cost(problem.primes[p])) {
            continue;
          }
          if (!masked[i].subset_of(masked[j])) continue;
          if (masked[i].count() == masked[j].count() &&
              literal_cost(problem.primes[q]) == literal_cost(problem.primes[p]) &&
              q > p) {
            continue;  // symmetric pair: keep the pattern-smaller prime
          }
          removed[p] = 1;
          changed = true;
          break;
        }
      }
    }
  }

  if (uncovered.any()) {
    std::vector<int> active;
    for (std::size_t p = 0; p < problem.primes.size(); ++p) {
      if (removed[p] || picked[p]) continue;
      if (problem.coverage[p].intersect_count(uncovered)) {
        active.push_back(static_cast<int>(p));
      }
    }
    const std::vector<int> fallback = greedy_cover(problem, active, uncovered);
    std::vector<int> core;
    if (static_cast<int>(active.size()) <= options.exact_cover_limit) {
      int bound = 0;
      for (const int p : fallback) {
        bound += literal_cost(problem.primes[static_cast<std::size_t>(p)]);
      }
      ExactCover exact(problem, active, options.search_node_limit);
      core = exact.solve(uncovered, bound, fallback);
    } else {
      core = fallback;
    }
    chosen.insert(chosen.end(), core.begin(), core.end());
  }

  std::sort(chosen.begin(), chosen.end());
  Dnf dnf;
  dnf.num_bits = n;
  for (const int p : chosen) {
    dnf.clauses.push_back(
        implicant_to_clause(problem.primes[static_cast<std::size_t>(p)], n));
  }
  dnf.normalize();
  return dnf;
}

}  // namespace ttr::logic
