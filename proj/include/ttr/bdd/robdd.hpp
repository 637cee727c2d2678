#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttr/logic/dnf.hpp"

namespace ttr::bdd {

// Reduced ordered binary decision diagram. Nodes 0 and 1 are the false and
// true terminals; every other node tests one patch bit and branches to the
// cofactor with that bit cleared (lo) or set (hi). No node has lo == hi and
// no two nodes share (var, lo, hi), so equal functions built with the same
// variable order produce byte-identical node arrays.
struct Robdd {
  struct Node {
    int var = -1;  // patch bit tested; -1 for terminals
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;

    bool operator==(const Node&) const = default;
  };

  int num_bits = 0;
  std::vector<int> order;  // order[level] = patch bit tested at that level
  std::vector<Node> nodes; // [0] false terminal, [1] true terminal
  std::uint32_t root = 0;

  // Total nodes reachable from the root, terminals included.
  std::size_t node_count() const;

  bool evaluate(std::span<const std::uint8_t> bits) const;

  friend bool operator==(const Robdd&, const Robdd&) = default;
};

// Builds the canonical diagram of a DNF under the given variable order
// (identity when omitted). The order must be a permutation of the patch
// bits.
Robdd build_from_dnf(const logic::Dnf& dnf);
Robdd build_from_dnf(const logic::Dnf& dnf, std::span<const int> order);

// Searches for a small variable order: exhaustive for up to 7 bits, seeded
// random sampling above that. Ties resolve to the lexicographically
// smallest permutation.
std::vector<int> find_small_order(const logic::Dnf& dnf,
                                  std::uint64_t seed = 0x5eed,
                                  int samples = 2000);

// Graphviz form. Decision nodes are ellipses labeled by var_labels; the
// edge to hi is solid, the edge to lo carries an open dot at its tail.
// Terminals are boxes labeled false_label / true_label (the rule's
// per-class contribution goes in true_label).
struct DotOptions {
  std::string graph_name = "rule";
  std::string false_label = "0";
  std::string true_label = "1";
};

std::string to_dot(const Robdd& bdd, std::span<const std::string> var_labels,
                   const DotOptions& options = {});

}  // namespace ttr::bdd
