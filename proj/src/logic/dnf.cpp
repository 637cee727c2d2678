#include "ttr/logic/dnf.hpp"

#include <algorithm>

#include "ttr/util/error.hpp"

namespace ttr::logic {

bool Clause::eval_row(std::uint32_t row, int n) const {
  for (const Literal& lit : literals) {
    const int value = (row >> (n - 1 - static_cast<int>(lit.bit))) & 1u;
    if ((value != 0) != lit.positive) return false;
  }
  return true;
}

Dnf Dnf::constant(bool value, int n) {
  Dnf dnf;
  dnf.num_bits = n;
  if (value) dnf.clauses.push_back(Clause{});
  return dnf;
}

bool Dnf::eval_row(std::uint32_t row) const {
  for (const Clause& clause : clauses) {
    if (clause.eval_row(row, num_bits)) return true;
  }
  return false;
}

bool Dnf::eval_bits(const std::uint8_t* bits) const {
  for (const Clause& clause : clauses) {
    bool hold = true;
    for (const Literal& lit : clause.literals) {
      if ((bits[lit.bit] != 0) != lit.positive) {
        hold = false;
        break;
      }
    }
    if (hold) return true;
  }
  return false;
}

std::size_t Dnf::literal_count() const {
  std::size_t count = 0;
  for (const Clause& clause : clauses) count += clause.literals.size();
  return count;
}

void Dnf::normalize() {
  for (Clause& clause : clauses) {
    std::sort(clause.literals.begin(), clause.literals.end());
    for (std::size_t i = 1; i < clause.literals.size(); ++i) {
      if (clause.literals[i].bit == clause.literals[i - 1].bit) {
        throw ContractError("dnf: clause binds bit " +
                            std::to_string(clause.literals[i].bit) + " twice");
      }
    }
    for (const Literal& lit : clause.literals) {
      if (static_cast<int>(lit.bit) >= num_bits) {
        throw ContractError("dnf: literal bit " + std::to_string(lit.bit) +
                            " outside " + std::to_string(num_bits) + " inputs");
      }
    }
  }
  std::sort(clauses.begin(), clauses.end());
  clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
}

std::string Dnf::to_string() const {
  if (is_constant_false()) return "FALSE";
  std::string out;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) out += " OR ";
    out += "(";
    const Clause& clause = clauses[i];
    if (clause.literals.empty()) out += "TRUE";
    for (std::size_t j = 0; j < clause.literals.size(); ++j) {
      if (j) out += " AND ";
      if (!clause.literals[j].positive) out += "NOT ";
      out += "x" + std::to_string(clause.literals[j].bit);
    }
    out += ")";
  }
  return out;
}

}  // namespace ttr::logic
