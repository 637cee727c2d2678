#include "ttr/data/schema.hpp"

#include <unordered_set>

#include "ttr/util/error.hpp"

namespace ttr::data {

std::string_view column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Binary:
      return "binary";
    case ColumnKind::Continuous:
      return "continuous";
    case ColumnKind::CategoricalExpanded:
      return "categorical";
  }
  return "?";
}

ColumnKind column_kind_from_name(std::string_view name) {
  if (name == "binary") return ColumnKind::Binary;
  if (name == "continuous") return ColumnKind::Continuous;
  if (name == "categorical") return ColumnKind::CategoricalExpanded;
  throw ParseError("unknown column kind '" + std::string(name) + "'");
}

int FeatureSchema::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::vector<int>> FeatureSchema::onehot_groups() const {
  int max_group = -1;
  for (const Column& c : columns) {
    if (c.group_id && *c.group_id > max_group) max_group = *c.group_id;
  }
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(max_group + 1));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].group_id) {
      groups[static_cast<std::size_t>(*columns[i].group_id)].push_back(
          static_cast<int>(i));
    }
  }
  return groups;
}

void FeatureSchema::validate() const {
  std::unordered_set<std::string_view> seen;
  for (const Column& c : columns) {
    if (c.name.empty()) throw ContractError("schema: empty column name");
    if (!seen.insert(c.name).second) {
      throw ContractError("schema: duplicate column name '" + c.name + "'");
    }
    const bool expanded = c.kind == ColumnKind::CategoricalExpanded;
    if (expanded != c.group_id.has_value()) {
      throw ContractError("schema: column '" + c.name +
                          "' group annotation does not match its kind");
    }
    if (expanded && *c.group_id < 0) {
      throw ContractError("schema: column '" + c.name + "' has negative group id");
    }
  }
  for (const auto& group : onehot_groups()) {
    if (group.empty()) {
      throw ContractError("schema: one-hot group ids are not dense");
    }
  }
}

}  // namespace ttr::data
