#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ttr::logic {

// One literal over patch bit `bit` (0-based within the patch).
struct Literal {
  std::uint8_t bit = 0;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal& a, const Literal& b) {
    if (a.bit != b.bit) return a.bit <=> b.bit;
    // Negative literal orders before positive on the same bit.
    return static_cast<int>(a.positive) <=> static_cast<int>(b.positive);
  }
};

// Conjunction of literals, sorted by bit, at most one literal per bit.
// An empty clause is the constant true.
struct Clause {
  std::vector<Literal> literals;

  bool eval_row(std::uint32_t row, int n) const;
  friend bool operator==(const Clause&, const Clause&) = default;
  friend auto operator<=>(const Clause& a, const Clause& b) {
    return a.literals <=> b.literals;
  }
};

// Disjunction of clauses over n patch bits. No clauses is the constant
// false; a single empty clause is the constant true. Assignments are
// addressed as row indices with bit 0 of the patch in the most significant
// position: bit j of row r is (r >> (n-1-j)) & 1.
struct Dnf {
  int num_bits = 0;
  std::vector<Clause> clauses;

  static Dnf constant(bool value, int n);
  bool is_constant_false() const { return clauses.empty(); }
  bool is_constant_true() const {
    return clauses.size() == 1 && clauses.front().literals.empty();
  }

  bool eval_row(std::uint32_t row) const;

  // Evaluates against explicit bit values, bits[j] for patch bit j.
  bool eval_bits(const std::uint8_t* bits) const;

  std::size_t literal_count() const;

  // Sorts clause literals, sorts clauses, drops duplicate clauses. Throws
  // ContractError if a clause binds the same bit twice.
  void normalize();

  // Debug form like "(x0 AND NOT x2) OR (x1)".
  std::string to_string() const;

  friend bool operator==(const Dnf&, const Dnf&) = default;
};

}  // namespace ttr::logic
