#include "ttr/logic/truth_table.hpp"

#include <algorithm>
#include <bit>

#include "ttr/util/error.hpp"

namespace ttr::logic {

void TruthTable::validate() const {
  if (n < 1 || n > 9) {
    throw ContractError("truth table: width " + std::to_string(n) +
                        " outside [1, 9]");
  }
  if (outputs.size() != (static_cast<std::size_t>(1) << n)) {
    throw ContractError("truth table: output column size != 2^n");
  }
  for (const std::uint8_t v : outputs) {
    if (v > 1) throw ContractError("truth table: non-boolean output");
  }
}

std::string column_to_hex(std::span<const std::uint8_t> column) {
  const std::size_t nibbles = (column.size() + 3) / 4;
  std::string hex(nibbles, '0');
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column[r]) continue;
    const std::size_t nibble = r / 4;
    const int bit = static_cast<int>(r % 4);
    // Last string character holds rows 0..3.
    char& c = hex[nibbles - 1 - nibble];
    int v = c <= '9' ? c - '0' : c - 'a' + 10;
    v |= 1 << bit;
    c = v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10);
  }
  return hex;
}

std::vector<std::uint8_t> column_from_hex(const std::string& hex, std::size_t size) {
  if (hex.size() != (size + 3) / 4) {
    throw ContractError("hex column: expected " + std::to_string((size + 3) / 4) +
                        " digits, got " + std::to_string(hex.size()));
  }
  std::vector<std::uint8_t> column(size, 0);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const char c = hex[i];
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw ContractError("hex column: invalid digit");
    }
    const std::size_t base = (hex.size() - 1 - i) * 4;
    for (int b = 0; b < 4; ++b) {
      const std::size_t r = base + static_cast<std::size_t>(b);
      if (r < size) column[r] = static_cast<std::uint8_t>((v >> b) & 1);
    }
  }
  return column;
}

std::string TruthTable::to_hex() const { return column_to_hex(outputs); }

TruthTable TruthTable::from_hex(const std::string& hex, int n, int filter_id) {
  TruthTable table;
  table.n = n;
  table.filter_id = filter_id;
  table.outputs = column_from_hex(hex, static_cast<std::size_t>(1) << n);
  table.validate();
  return table;
}

TruthTable enumerate_block(const nn::LttBlockParams& block, int filter_id) {
  block.validate();
  const int n = block.spec.patch_width;
  TruthTable table;
  table.n = n;
  table.filter_id = filter_id;
  const std::size_t rows = static_cast<std::size_t>(1) << n;
  table.outputs.resize(rows);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < rows; ++r) {
    for (int j = 0; j < n; ++j) {
      bits[static_cast<std::size_t>(j)] =
          static_cast<std::uint8_t>((r >> (n - 1 - j)) & 1);
    }
    table.outputs[r] = static_cast<std::uint8_t>(nn::block_forward(block, bits));
  }
  return table;
}

std::size_t DcMask::count() const {
  return static_cast<std::size_t>(
      std::count(dont_care.begin(), dont_care.end(), std::uint8_t{1}));
}

DcMask dc_mask_for_patch(const data::FeatureSchema& schema,
                         std::span<const int> patch_columns, int patch_id) {
  std::vector<BitMap> identity(patch_columns.size());
  for (std::size_t j = 0; j < patch_columns.size(); ++j) {
    const int c = patch_columns[j];
    if (c < 0 || static_cast<std::size_t>(c) >= schema.size()) {
      throw ContractError("dc mask: patch column index out of range");
    }
    if (schema.columns[static_cast<std::size_t>(c)].kind ==
        data::ColumnKind::Continuous) {
      identity[j].unconstrained = true;
    }
  }
  return dc_mask_for_patch(schema, patch_columns, identity, patch_id);
}

DcMask dc_mask_for_patch(const data::FeatureSchema& schema,
                         std::span<const int> patch_columns,
                         std::span<const BitMap> bit_maps, int patch_id) {
  const int n = static_cast<int>(patch_columns.size());
  if (n < 1 || n > 9) {
    throw ContractError("dc mask: patch width outside [1, 9]");
  }
  if (bit_maps.size() != patch_columns.size()) {
    throw ContractError("dc mask: one bit map per patch column required");
  }
  for (const int c : patch_columns) {
    if (c < 0 || static_cast<std::size_t>(c) >= schema.size()) {
      throw ContractError("dc mask: patch column index out of range");
    }
  }

  // Positions of each one-hot group inside the patch. A group's reachable
  // sub-patterns are the images of its valid raw assignments: every member
  // zero, or exactly one member set.
  std::vector<std::vector<int>> groups;
  {
    std::vector<std::vector<int>> by_group;
    for (int j = 0; j < n; ++j) {
      const auto& col =
          schema.columns[static_cast<std::size_t>(patch_columns[j])];
      if (!col.group_id || bit_maps[static_cast<std::size_t>(j)].unconstrained) {
        continue;
      }
      const std::size_t g = static_cast<std::size_t>(*col.group_id);
      if (by_group.size() <= g) by_group.resize(g + 1);
      by_group[g].push_back(j);
    }
    for (auto& members : by_group) {
      if (!members.empty()) groups.push_back(std::move(members));
    }
  }
  std::vector<char> grouped(static_cast<std::size_t>(n), 0);
  for (const auto& members : groups) {
    for (const int j : members) grouped[static_cast<std::size_t>(j)] = 1;
  }

  // Reachable sub-patterns per group, encoded on the row-index bits of the
  // member positions.
  const auto row_bit = [n](int j) { return 1u << (n - 1 - j); };
  std::vector<std::vector<std::uint32_t>> reachable(groups.size());
  std::vector<std::uint32_t> group_bits(groups.size(), 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::uint32_t base = 0;
    for (const int j : groups[g]) {
      group_bits[g] |= row_bit(j);
      if (bit_maps[static_cast<std::size_t>(j)].at_zero) base |= row_bit(j);
    }
    reachable[g].push_back(base);
    for (const int j : groups[g]) {
      const BitMap& map = bit_maps[static_cast<std::size_t>(j)];
      std::uint32_t one = base & ~row_bit(j);
      if (map.at_one) one |= row_bit(j);
      reachable[g].push_back(one);
    }
    std::sort(reachable[g].begin(), reachable[g].end());
    reachable[g].erase(std::unique(reachable[g].begin(), reachable[g].end()),
                       reachable[g].end());
  }

  DcMask mask;
  mask.n = n;
  mask.patch_id = patch_id;
  const std::size_t rows = static_cast<std::size_t>(1) << n;
  mask.dont_care.assign(rows, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      const BitMap& map = bit_maps[static_cast<std::size_t>(j)];
      if (map.unconstrained || grouped[static_cast<std::size_t>(j)]) continue;
      const std::uint8_t bit = (r >> (n - 1 - j)) & 1;
      ok = bit == map.at_zero || bit == map.at_one;
    }
    for (std::size_t g = 0; g < groups.size() && ok; ++g) {
      const std::uint32_t sub = static_cast<std::uint32_t>(r) & group_bits[g];
      ok = std::binary_search(reachable[g].begin(), reachable[g].end(), sub);
    }
    if (!ok) mask.dont_care[r] = 1;
  }
  return mask;
}

}  // namespace ttr::logic
