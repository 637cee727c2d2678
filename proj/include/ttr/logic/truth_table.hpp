#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttr/data/schema.hpp"
#include "ttr/nn/ltt.hpp"

namespace ttr::logic {

// Output column of one filter over all 2^n patch assignments. Row indices
// follow the Dnf convention: patch bit 0 is the most significant index bit.
struct TruthTable {
  int n = 0;
  int filter_id = -1;
  std::vector<std::uint8_t> outputs;  // size 2^n, values 0/1

  void validate() const;

  // Hex digest of the output column: row 0 is the least significant bit of
  // the encoded integer, most significant nibble printed first.
  std::string to_hex() const;
  static TruthTable from_hex(const std::string& hex, int n, int filter_id = -1);
};

std::string column_to_hex(std::span<const std::uint8_t> column);
std::vector<std::uint8_t> column_from_hex(const std::string& hex, std::size_t size);

// Exhaustive enumeration of one block over its patch inputs, inference
// statistics. n is the block's patch width.
TruthTable enumerate_block(const nn::LttBlockParams& block, int filter_id = -1);

// Assignments a patch can never see on schema-valid rows: any assignment
// outside the image of the valid raw inputs (at most one column set per
// one-hot group) under the per-column binarization.
struct DcMask {
  int n = 0;
  int patch_id = -1;
  std::vector<std::uint8_t> dont_care;  // size 2^n

  std::size_t count() const;
};

// How one patch column's raw value turns into its bit. Binarization can
// invert a 0/1 column or pin it constant; continuous columns reach both bit
// values and carry no group coupling.
struct BitMap {
  std::uint8_t at_zero = 0;
  std::uint8_t at_one = 1;
  bool unconstrained = false;
};

// patch_columns[j] is the schema column index of patch bit j. The first
// overload assumes the identity bit map for every column; the second takes
// the realized maps, one per patch bit.
DcMask dc_mask_for_patch(const data::FeatureSchema& schema,
                         std::span<const int> patch_columns, int patch_id = -1);
DcMask dc_mask_for_patch(const data::FeatureSchema& schema,
                         std::span<const int> patch_columns,
                         std::span<const BitMap> bit_maps, int patch_id = -1);

}  // namespace ttr::logic
