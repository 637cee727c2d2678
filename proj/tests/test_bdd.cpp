#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "ttr/bdd/robdd.hpp"
#include "ttr/logic/dnf.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

using namespace ttr::bdd;
using namespace ttr::logic;

namespace {

std::vector<std::uint8_t> row_bits(std::uint32_t row, int n) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    bits[static_cast<std::size_t>(j)] =
        static_cast<std::uint8_t>((row >> (n - 1 - j)) & 1);
  }
  return bits;
}

Dnf random_dnf(ttr::Rng& rng, int n) {
  Dnf dnf;
  dnf.num_bits = n;
  const int clauses = 1 + static_cast<int>(rng.below(4));
  for (int c = 0; c < clauses; ++c) {
    Clause clause;
    for (int bit = 0; bit < n; ++bit) {
      const double pick = rng.uniform();
      if (pick < 0.3) {
        clause.literals.push_back(
            {static_cast<std::uint8_t>(bit), rng.bernoulli(0.5)});
      }
    }
    dnf.clauses.push_back(std::move(clause));
  }
  dnf.normalize();
  return dnf;
}

}  // namespace

TEST_CASE("diagram of a single literal") {
  Dnf dnf;
  dnf.num_bits = 2;
  dnf.clauses.push_back({{{1, true}}});
  const Robdd bdd = build_from_dnf(dnf);
  // One decision node plus both terminals.
  CHECK(bdd.node_count() == 3);
  for (std::uint32_t r = 0; r < 4; ++r) {
    CHECK(bdd.evaluate(row_bits(r, 2)) == dnf.eval_row(r));
  }
}

TEST_CASE("constants collapse to a terminal") {
  const Robdd t = build_from_dnf(Dnf::constant(true, 5));
  CHECK(t.root == 1);
  CHECK(t.node_count() == 1);
  const Robdd f = build_from_dnf(Dnf::constant(false, 5));
  CHECK(f.root == 0);
  CHECK(f.node_count() == 1);
}

TEST_CASE("diagrams agree with their formulas exhaustively") {
  ttr::Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(9));
    const Dnf dnf = random_dnf(rng, n);
    const Robdd bdd = build_from_dnf(dnf);
    CAPTURE(trial);
    CAPTURE(n);
    CHECK(bdd.node_count() <= (std::size_t{1} << n) + 2);
    for (std::uint32_t r = 0; r < (1u << n); ++r) {
      REQUIRE(bdd.evaluate(row_bits(r, n)) == dnf.eval_row(r));
    }
  }
}

TEST_CASE("equal functions build equal diagrams") {
  // (x0) OR (NOT x0 AND x1) is x0 OR x1.
  Dnf a;
  a.num_bits = 2;
  a.clauses.push_back({{{0, true}}});
  a.clauses.push_back({{{0, false}, {1, true}}});
  a.normalize();
  Dnf b;
  b.num_bits = 2;
  b.clauses.push_back({{{0, true}}});
  b.clauses.push_back({{{1, true}}});
  b.normalize();
  CHECK(build_from_dnf(a) == build_from_dnf(b));

  // Absorbed clause: (x0 AND x1) adds nothing to (x0).
  Dnf c;
  c.num_bits = 2;
  c.clauses.push_back({{{0, true}}});
  c.clauses.push_back({{{0, true}, {1, true}}});
  c.normalize();
  Dnf d;
  d.num_bits = 2;
  d.clauses.push_back({{{0, true}}});
  d.normalize();
  CHECK(build_from_dnf(c) == build_from_dnf(d));
}

TEST_CASE("no redundant tests or duplicate nodes") {
  ttr::Rng rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const Robdd bdd = build_from_dnf(random_dnf(rng, n));
    std::vector<std::vector<std::uint32_t>> seen;
    for (std::size_t i = 2; i < bdd.nodes.size(); ++i) {
      const auto& node = bdd.nodes[i];
      CHECK(node.lo != node.hi);
      const std::vector<std::uint32_t> key = {
          static_cast<std::uint32_t>(node.var), node.lo, node.hi};
      CHECK(std::find(seen.begin(), seen.end(), key) == seen.end());
      seen.push_back(key);
    }
  }
}

TEST_CASE("custom orders evaluate identically and round trip the order") {
  ttr::Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(5));
    const Dnf dnf = random_dnf(rng, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    const Robdd bdd = build_from_dnf(dnf, order);
    CHECK(bdd.order == order);
    for (std::uint32_t r = 0; r < (1u << n); ++r) {
      REQUIRE(bdd.evaluate(row_bits(r, n)) == dnf.eval_row(r));
    }
  }

  Dnf dnf;
  dnf.num_bits = 3;
  dnf.clauses.push_back({{{0, true}, {2, true}}});
  const std::vector<int> bad = {0, 0, 1};
  CHECK_THROWS_AS(build_from_dnf(dnf, bad), ttr::ContractError);
}

TEST_CASE("order search never loses to the identity order") {
  ttr::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const Dnf dnf = random_dnf(rng, n);
    const std::vector<int> order = find_small_order(dnf);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int j = 0; j < n; ++j) CHECK(sorted[static_cast<std::size_t>(j)] == j);
    CHECK(build_from_dnf(dnf, order).node_count() <=
          build_from_dnf(dnf).node_count());
    for (std::uint32_t r = 0; r < (1u << n); ++r) {
      REQUIRE(build_from_dnf(dnf, order).evaluate(row_bits(r, n)) ==
              dnf.eval_row(r));
    }
  }
}

TEST_CASE("dot output is well formed") {
  Dnf dnf;
  dnf.num_bits = 3;
  dnf.clauses.push_back({{{0, true}, {1, false}}});
  dnf.clauses.push_back({{{2, true}}});
  dnf.normalize();
  const Robdd bdd = build_from_dnf(dnf);
  const std::vector<std::string> labels = {"age > 30", "smoker", "city=oslo"};
  DotOptions options;
  options.graph_name = "rule_7";
  options.true_label = "+0.5 / -0.5";
  const std::string dot = to_dot(bdd, labels, options);

  CHECK(dot.find("digraph \"rule_7\"") != std::string::npos);
  CHECK(dot.find("age > 30") != std::string::npos);
  CHECK(dot.find("+0.5 / -0.5") != std::string::npos);
  CHECK(dot.rfind("}") != std::string::npos);

  // Each decision node contributes exactly two edges.
  std::size_t arrows = 0;
  for (std::size_t pos = dot.find("->"); pos != std::string::npos;
       pos = dot.find("->", pos + 2)) {
    ++arrows;
  }
  CHECK(arrows == 2 * (bdd.node_count() - 2));

  // Braces balance.
  CHECK(std::count(dot.begin(), dot.end(), '{') ==
        std::count(dot.begin(), dot.end(), '}'));
}
