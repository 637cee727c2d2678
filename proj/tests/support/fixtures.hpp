// Hand-built models small enough to verify by hand, shared across suites.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttr/data/schema.hpp"
#include "ttr/nn/ltt.hpp"
#include "ttr/nn/model.hpp"

namespace fixtures {

// Four-bit block whose truth column is 1 exactly on assignment
// x0=0, x1=0, x2=0, x3=1 (row 1 under the msb-first row convention).
inline ttr::nn::LttBlockParams narrow_block() {
  ttr::nn::LttBlockParams block;
  block.spec.patch_width = 4;
  block.spec.stride = 1;
  block.spec.amplification = 4;
  block.spec.kernel1 = 3;
  block.spec.kernel2 = 2;
  block.spec.has_inner_bn = false;
  block.w1 = {
      10, -1, 3,
      6, -5, 4,
      4, 4, -3,
      4, 4, 3,
  };
  block.w2 = {
      -5, 0, 9, -5,
      -5, 4, 0, 0,
  };
  return block;
}

// Five binary-ish survey columns; the last two form a one-hot birth-country
// group, so assignments setting both are impossible.
inline ttr::data::FeatureSchema census_schema() {
  ttr::data::FeatureSchema schema;
  const char* plain[] = {"Male", "GoUni", "Married"};
  for (const char* name : plain) {
    ttr::data::Column col;
    col.name = name;
    col.kind = ttr::data::ColumnKind::Binary;
    schema.columns.push_back(col);
  }
  ttr::data::Column us;
  us.name = "BornUS";
  us.kind = ttr::data::ColumnKind::CategoricalExpanded;
  us.group_id = 0;
  us.category_label = "US";
  schema.columns.push_back(us);
  ttr::data::Column uk;
  uk.name = "BornUK";
  uk.kind = ttr::data::ColumnKind::CategoricalExpanded;
  uk.group_id = 0;
  uk.category_label = "UK";
  schema.columns.push_back(uk);
  return schema;
}

// One narrow_block filter slid over census_schema (stride 1, two patches),
// identity batch norms, float head weighting both slots into class 1.
inline ttr::nn::TTnetModel census_model() {
  ttr::nn::TTnetModel model;
  model.schema = census_schema();
  model.task = ttr::data::Task::Binary;
  model.num_classes = 2;
  model.class_labels = {"no", "yes"};
  model.input_bn.init(5);
  model.blocks.push_back(narrow_block());
  model.final_bn.init(2);
  model.head_mode = ttr::nn::HeadMode::Float;
  model.head_w = {0.0, 1.0, 0.0, 1.0};
  model.head_bias = {0.0, 0.0};
  model.bn_finalized = true;
  model.seed = 1;
  model.config_digest = "fixture";
  return model;
}

// Two filters whose truth columns are exact complements: same taps, second
// w2 negated, and the inner batch-norm shifts keep every pre-activation away
// from zero. Four binary columns, stride 1, two patches per filter.
inline ttr::nn::TTnetModel complement_pair_model() {
  ttr::nn::LttBlockParams f;
  f.spec.patch_width = 3;
  f.spec.stride = 1;
  f.spec.amplification = 2;
  f.spec.kernel1 = 2;
  f.spec.kernel2 = 2;
  f.spec.has_inner_bn = true;
  f.w1 = {0.7, -0.4, -0.9, 0.6};
  f.w2 = {0.5, 0.8, -0.6, 0.45};
  f.inner_bn.init(2);
  f.inner_bn.beta = {0.31, -0.17};

  ttr::nn::LttBlockParams g = f;
  for (double& w : g.w2) w = -w;

  ttr::nn::TTnetModel model;
  for (int i = 0; i < 4; ++i) {
    ttr::data::Column col;
    col.name = "c" + std::to_string(i);
    col.kind = ttr::data::ColumnKind::Binary;
    model.schema.columns.push_back(col);
  }
  model.task = ttr::data::Task::Binary;
  model.num_classes = 2;
  model.class_labels = {"neg", "pos"};
  model.input_bn.init(4);
  model.blocks = {f, g};
  model.final_bn.init(4);
  model.head_mode = ttr::nn::HeadMode::Float;
  model.head_w = {
      1.0, 0.0,
      0.5, -0.25,
      0.75, 0.5,
      -0.3, 0.2,
  };
  model.head_bias = {0.1, -0.1};
  model.bn_finalized = true;
  model.seed = 2;
  model.config_digest = "fixture";
  return model;
}

// All 2^cols binary rows, row-major.
inline std::vector<float> all_rows(int cols) {
  std::vector<float> x;
  const int total = 1 << cols;
  x.reserve(static_cast<std::size_t>(total) * cols);
  for (int r = 0; r < total; ++r) {
    for (int j = 0; j < cols; ++j) {
      x.push_back(static_cast<float>((r >> (cols - 1 - j)) & 1));
    }
  }
  return x;
}

}  // namespace fixtures
