#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ttr/data/schema.hpp"

namespace ttr::data {

enum class Task { Binary, Multiclass, Regression };

std::string_view task_name(Task task);
Task task_from_name(std::string_view name);

// y_original = y_standardized * sd + mean. Identity for classification.
struct TargetAffine {
  double mean = 0.0;
  double sd = 1.0;
};

// Expanded feature matrix plus targets. Features are stored row-major as
// float; binary and expanded-categorical cells are exactly 0.0f or 1.0f.
// For classification y holds class indices; for regression y is the
// standardized target and target_affine maps back to original units.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> x;
  std::vector<double> y;
  FeatureSchema schema;
  Task task = Task::Binary;
  std::size_t num_classes = 0;
  std::vector<std::string> class_labels;
  TargetAffine target_affine;

  std::span<const float> row(std::size_t r) const {
    return {x.data() + r * cols, cols};
  }
};

// Column kinds may be declared per source-column name; undeclared columns
// are inferred (all cells in {0,1} -> binary; otherwise numeric ->
// continuous; otherwise up to 32 distinct values -> categorical).
using DeclaredKinds = std::map<std::string, ColumnKind>;

// Loads a CSV with a header row, expands categorical columns to one-hot
// groups (categories in sorted order, named "column=label"), and encodes the
// target. Missing categorical cells become all-zero groups; a missing or
// non-numeric cell in a binary or continuous column is a parse error naming
// the row and column. Regression targets are standardized here and the
// affine recorded.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 Task task, const DeclaredKinds& declared = {});

// Same loader over in-memory text; `origin` names the source in errors.
Dataset load_csv_text(std::string_view text, const std::string& target_column,
                      Task task, const DeclaredKinds& declared = {},
                      const std::string& origin = "<memory>");

// Five shuffled 80/20 train/test partitions. Fold test sizes differ by at
// most one row; every row appears in exactly one test fold. Indices are
// ascending within each list.
struct SplitPlan {
  std::uint64_t seed = 0;
  struct Fold {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> test;
  };
  std::vector<Fold> folds;
};

SplitPlan kfold_split(const Dataset& ds, std::uint64_t seed, int num_folds = 5);

// Rows violating a one-hot group constraint (more than one column of the
// group set). Empty groups are allowed: they encode a missing value.
struct OneHotViolation {
  std::uint32_t row = 0;
  int group_id = 0;
  std::vector<std::string> columns_set;
};

std::vector<OneHotViolation> validate_onehot(const Dataset& ds);

// Mean and population standard deviation of ds.y over `rows`.
TargetAffine target_stats(const Dataset& ds, std::span<const std::uint32_t> rows);

}  // namespace ttr::data
