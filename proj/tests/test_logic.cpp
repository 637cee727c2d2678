#include <cstdint>
#include <vector>

#include "doctest.h"
#include "support/qm_oracle.hpp"
#include "ttr/logic/dnf.hpp"
#include "ttr/logic/quine_mccluskey.hpp"
#include "ttr/logic/truth_table.hpp"
#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

using namespace ttr::logic;

namespace {

// bits[j] of row r under the msb-first patch convention.
std::vector<std::uint8_t> row_bits(std::uint32_t row, int n) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    bits[static_cast<std::size_t>(j)] =
        static_cast<std::uint8_t>((row >> (n - 1 - j)) & 1);
  }
  return bits;
}

}  // namespace

TEST_CASE("dnf rows address patch bit 0 as the most significant index bit") {
  Dnf dnf;
  dnf.num_bits = 3;
  dnf.clauses.push_back({{{0, true}}});
  for (std::uint32_t r = 0; r < 8; ++r) {
    CHECK(dnf.eval_row(r) == (((r >> 2) & 1) != 0));
    CHECK(dnf.eval_bits(row_bits(r, 3).data()) == dnf.eval_row(r));
  }
}

TEST_CASE("dnf constants") {
  const Dnf t = Dnf::constant(true, 4);
  const Dnf f = Dnf::constant(false, 4);
  CHECK(t.is_constant_true());
  CHECK(f.is_constant_false());
  CHECK(t.eval_row(0));
  CHECK(t.eval_row(15));
  CHECK_FALSE(f.eval_row(7));
  CHECK(t.literal_count() == 0);
  CHECK(f.literal_count() == 0);
}

TEST_CASE("normalize sorts and deduplicates clauses") {
  Dnf dnf;
  dnf.num_bits = 3;
  dnf.clauses.push_back({{{2, false}, {0, true}}});
  dnf.clauses.push_back({{{0, true}, {2, false}}});
  dnf.clauses.push_back({{{1, true}}});
  dnf.normalize();
  REQUIRE(dnf.clauses.size() == 2);
  CHECK(dnf.clauses[0].literals.front().bit == 0);
  CHECK(dnf.clauses[0].literals.back().bit == 2);
  CHECK(dnf.literal_count() == 3);

  Dnf bad;
  bad.num_bits = 2;
  bad.clauses.push_back({{{1, true}, {1, false}}});
  CHECK_THROWS_AS(bad.normalize(), ttr::ContractError);
}

TEST_CASE("truth table hex round trip") {
  // Column (0,1,0,0): row 0 is the least significant encoded bit.
  const std::vector<std::uint8_t> column = {0, 1, 0, 0};
  CHECK(column_to_hex(column) == "2");
  CHECK(column_from_hex("2", 4) == column);

  ttr::Rng rng(99);
  for (int n = 1; n <= 9; ++n) {
    TruthTable table;
    table.n = n;
    table.filter_id = n;
    table.outputs.resize(std::size_t{1} << n);
    for (auto& o : table.outputs) o = rng.bernoulli(0.5) ? 1 : 0;
    const TruthTable back = TruthTable::from_hex(table.to_hex(), n, n);
    CHECK(back.outputs == table.outputs);
    CHECK(back.n == n);
  }

  CHECK_THROWS_AS(column_from_hex("zz", 8), ttr::ContractError);
}

TEST_CASE("minimizer reproduces the exact function without don't-cares") {
  ttr::Rng rng(4242);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    const std::size_t rows = std::size_t{1} << n;
    std::vector<std::uint8_t> outputs(rows);
    for (auto& o : outputs) o = rng.bernoulli(0.4) ? 1 : 0;
    const Dnf dnf = quine_mccluskey(outputs);
    for (std::uint32_t r = 0; r < rows; ++r) {
      CHECK(dnf.eval_row(r) == (outputs[r] != 0));
    }
  }
}

TEST_CASE("minimizer matches the reference cover with don't-cares") {
  ttr::Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    const std::size_t rows = std::size_t{1} << n;
    std::vector<std::uint8_t> outputs(rows);
    std::vector<std::uint8_t> dc(rows);
    std::vector<int> outputs_i(rows);
    std::vector<int> dc_i(rows);
    const double dc_rate = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 0.5);
    for (std::size_t r = 0; r < rows; ++r) {
      outputs[r] = rng.bernoulli(0.5) ? 1 : 0;
      dc[r] = rng.bernoulli(dc_rate) ? 1 : 0;
      outputs_i[r] = outputs[r];
      dc_i[r] = dc[r];
    }
    CAPTURE(trial);
    CAPTURE(n);
    const Dnf dnf = quine_mccluskey(outputs, dc);
    const qm_oracle::Result ref = qm_oracle::minimize(outputs_i, dc_i, n);
    for (std::uint32_t r = 0; r < rows; ++r) {
      if (dc[r]) continue;
      CHECK(dnf.eval_row(r) == (outputs[r] != 0));
    }
    CHECK(dnf.literal_count() == static_cast<std::size_t>(ref.literal_count));
  }
}

TEST_CASE("minimizer is deterministic and handles constants") {
  std::vector<std::uint8_t> zeros(16, 0);
  CHECK(quine_mccluskey(zeros).is_constant_false());
  std::vector<std::uint8_t> ones(16, 1);
  CHECK(quine_mccluskey(ones).is_constant_true());

  // Everything free: the empty cover wins.
  std::vector<std::uint8_t> dc(16, 1);
  const Dnf free = quine_mccluskey(zeros, dc);
  CHECK(free.literal_count() == 0);

  ttr::Rng rng(7);
  std::vector<std::uint8_t> outputs(64);
  std::vector<std::uint8_t> mask(64);
  for (std::size_t r = 0; r < 64; ++r) {
    outputs[r] = rng.bernoulli(0.5) ? 1 : 0;
    mask[r] = rng.bernoulli(0.2) ? 1 : 0;
  }
  const Dnf a = quine_mccluskey(outputs, mask);
  const Dnf b = quine_mccluskey(outputs, mask);
  CHECK(a == b);

  CHECK_THROWS_AS(quine_mccluskey(std::vector<std::uint8_t>(3, 0)),
                  ttr::ContractError);
}

TEST_CASE("impossible-assignment masks cover same-group pairs") {
  ttr::data::FeatureSchema schema;
  for (int i = 0; i < 2; ++i) {
    ttr::data::Column col;
    col.name = "b" + std::to_string(i);
    col.kind = ttr::data::ColumnKind::Binary;
    schema.columns.push_back(col);
  }
  for (int i = 0; i < 3; ++i) {
    ttr::data::Column col;
    col.name = "g=" + std::to_string(i);
    col.kind = ttr::data::ColumnKind::CategoricalExpanded;
    col.group_id = 0;
    col.category_label = std::to_string(i);
    schema.columns.push_back(col);
  }

  // Patch over the three group columns: assignments with two or more set
  // are impossible.
  const std::vector<int> group_patch = {2, 3, 4};
  const DcMask mask = dc_mask_for_patch(schema, group_patch, 5);
  REQUIRE(mask.dont_care.size() == 8);
  CHECK(mask.patch_id == 5);
  for (std::uint32_t r = 0; r < 8; ++r) {
    int set = 0;
    for (int j = 0; j < 3; ++j) set += (r >> (2 - j)) & 1;
    CHECK((mask.dont_care[r] != 0) == (set >= 2));
  }
  CHECK(mask.count() == 4);

  // Patch touching one group column and the binaries: nothing impossible.
  const std::vector<int> mixed_patch = {0, 1, 2};
  CHECK(dc_mask_for_patch(schema, mixed_patch).count() == 0);

  // Patch over two of the three group columns: only the both-set pair.
  const std::vector<int> pair_patch = {2, 4};
  const DcMask pair = dc_mask_for_patch(schema, pair_patch);
  REQUIRE(pair.dont_care.size() == 4);
  CHECK(pair.count() == 1);
  CHECK(pair.dont_care[3] == 1);
}
