#include "ttr/bdd/robdd.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

namespace ttr::bdd {
namespace {

void check_order(std::span<const int> order, int n) {
  if (order.size() != static_cast<std::size_t>(n)) {
    throw ContractError("robdd: order must list every patch bit once");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const int v : order) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
      throw ContractError("robdd: order is not a permutation of the patch bits");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

class Builder {
 public:
  Builder(const logic::Dnf& dnf, std::span<const int> order) : n_(dnf.num_bits) {
    check_order(order, n_);
    bdd_.num_bits = n_;
    bdd_.order.assign(order.begin(), order.end());
    bdd_.nodes.push_back({-1, 0, 0});  // false
    bdd_.nodes.push_back({-1, 1, 1});  // true

    // Function table in order-permuted index space: the bit fixed at level l
    // sits at index bit n-1-l.
    const std::size_t rows = static_cast<std::size_t>(1) << n_;
    table_.resize(rows);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_));
    for (std::size_t u = 0; u < rows; ++u) {
      for (int level = 0; level < n_; ++level) {
        bits[static_cast<std::size_t>(bdd_.order[static_cast<std::size_t>(level)])] =
            static_cast<std::uint8_t>((u >> (n_ - 1 - level)) & 1);
      }
      table_[u] = dnf.eval_bits(bits.data()) ? 1 : 0;
    }
    bdd_.root = build(0, 0);
  }

  Robdd take() { return std::move(bdd_); }

 private:
  std::uint32_t make_node(int var, std::uint32_t lo, std::uint32_t hi) {
    if (lo == hi) return lo;
    const auto key = std::make_tuple(var, lo, hi);
    const auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    const std::uint32_t id = static_cast<std::uint32_t>(bdd_.nodes.size());
    bdd_.nodes.push_back({var, lo, hi});
    unique_.emplace(key, id);
    return id;
  }

  std::uint32_t build(int level, std::size_t offset) {
    const std::size_t width = static_cast<std::size_t>(1) << (n_ - level);
    if (level == n_) return table_[offset] ? 1u : 0u;
    bool all_equal = true;
    for (std::size_t i = 1; i < width; ++i) {
      if (table_[offset + i] != table_[offset]) {
        all_equal = false;
        break;
      }
    }
    if (all_equal) return table_[offset] ? 1u : 0u;
    const std::uint32_t lo = build(level + 1, offset);
    const std::uint32_t hi = build(level + 1, offset + width / 2);
    return make_node(bdd_.order[static_cast<std::size_t>(level)], lo, hi);
  }

  int n_;
  Robdd bdd_;
  std::vector<std::uint8_t> table_;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::uint32_t> unique_;
};

void append_escaped(std::string& out, const std::string& label) {
  for (const char c : label) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
}

}  // namespace

std::size_t Robdd::node_count() const {
  if (root <= 1) return 1;
  std::set<std::uint32_t> reachable;
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (!reachable.insert(id).second) continue;
    if (id > 1) {
      stack.push_back(nodes[id].lo);
      stack.push_back(nodes[id].hi);
    }
  }
  return reachable.size();
}

bool Robdd::evaluate(std::span<const std::uint8_t> bits) const {
  if (bits.size() != static_cast<std::size_t>(num_bits)) {
    throw ContractError("robdd: assignment width != patch width");
  }
  std::uint32_t id = root;
  while (id > 1) {
    const Node& node = nodes[id];
    id = bits[static_cast<std::size_t>(node.var)] ? node.hi : node.lo;
  }
  return id == 1;
}

Robdd build_from_dnf(const logic::Dnf& dnf) {
  std::vector<int> order(static_cast<std::size_t>(dnf.num_bits));
  std::iota(order.begin(), order.end(), 0);
  return build_from_dnf(dnf, order);
}

Robdd build_from_dnf(const logic::Dnf& dnf, std::span<const int> order) {
  if (dnf.num_bits < 1 || dnf.num_bits > 9) {
    throw ContractError("robdd: patch width outside [1, 9]");
  }
  Builder builder(dnf, order);
  return builder.take();
}

std::vector<int> find_small_order(const logic::Dnf& dnf, std::uint64_t seed,
                                  int samples) {
  const int n = dnf.num_bits;
  std::vector<int> best(static_cast<std::size_t>(n));
  std::iota(best.begin(), best.end(), 0);
  std::size_t best_count = build_from_dnf(dnf, best).node_count();

  const auto consider = [&](const std::vector<int>& order) {
    const std::size_t count = build_from_dnf(dnf, order).node_count();
    if (count < best_count || (count == best_count && order < best)) {
      best_count = count;
      best = order;
    }
  };

  if (n <= 7) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      consider(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  Rng rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int s = 0; s < samples; ++s) {
    rng.shuffle(perm);
    consider(perm);
  }
  return best;
}

std::string to_dot(const Robdd& bdd, std::span<const std::string> var_labels,
                   const DotOptions& options) {
  std::string out = "digraph \"";
  append_escaped(out, options.graph_name);
  out += "\" {\n";
  out += "  rankdir=TB;\n";

  std::set<std::uint32_t> reachable;
  std::vector<std::uint32_t> stack{bdd.root};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    if (!reachable.insert(id).second) continue;
    if (id > 1) {
      stack.push_back(bdd.nodes[id].lo);
      stack.push_back(bdd.nodes[id].hi);
    }
  }

  for (const std::uint32_t id : reachable) {
    if (id > 1) {
      const int var = bdd.nodes[id].var;
      if (var < 0 || static_cast<std::size_t>(var) >= var_labels.size() ||
          var_labels[static_cast<std::size_t>(var)].empty()) {
        throw ContractError("to_dot: missing label for patch bit " +
                            std::to_string(var));
      }
    }
  }

  if (reachable.count(0)) {
    out += "  n0 [shape=box, label=\"";
    append_escaped(out, options.false_label);
    out += "\"];\n";
  }
  if (reachable.count(1)) {
    out += "  n1 [shape=box, label=\"";
    append_escaped(out, options.true_label);
    out += "\"];\n";
  }
  for (const std::uint32_t id : reachable) {
    if (id <= 1) continue;
    out += "  n" + std::to_string(id) + " [shape=ellipse, label=\"";
    append_escaped(out, var_labels[static_cast<std::size_t>(bdd.nodes[id].var)]);
    out += "\"];\n";
  }
  for (const std::uint32_t id : reachable) {
    if (id <= 1) continue;
    const Robdd::Node& node = bdd.nodes[id];
    // True branch: plain solid edge. False branch: open dot at the tail.
    out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.hi) + ";\n";
    out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.lo) +
           " [dir=both, arrowtail=odot];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ttr::bdd
