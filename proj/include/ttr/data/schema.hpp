#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttr::data {

enum class ColumnKind { Binary, Continuous, CategoricalExpanded };

std::string_view column_kind_name(ColumnKind kind);
ColumnKind column_kind_from_name(std::string_view name);

// One column of the expanded feature matrix. Expanded categorical columns
// carry the source group id and the category label they encode.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Binary;
  std::optional<int> group_id;
  std::optional<std::string> category_label;
};

// Ordered description of the expanded feature matrix; the bridge between
// rule literals and human-readable conditions. Column order is load order
// and is persisted with every model, since patch geometry depends on it.
struct FeatureSchema {
  std::vector<Column> columns;

  std::size_t size() const { return columns.size(); }

  // Index of the named column, -1 when absent.
  int column_index(std::string_view name) const;

  // group_id -> indices of the columns in that one-hot group, ascending.
  // Group ids are dense starting at 0.
  std::vector<std::vector<int>> onehot_groups() const;

  // Throws ContractError when names collide or group annotations are
  // inconsistent with column kinds.
  void validate() const;
};

}  // namespace ttr::data
