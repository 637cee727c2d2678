#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "ttr/data/dataset.hpp"
#include "ttr/logic/truth_table.hpp"
#include "ttr/nn/checkpoint.hpp"
#include "ttr/nn/ltt.hpp"
#include "ttr/nn/model.hpp"
#include "ttr/nn/train.hpp"
#include "ttr/synth/generators.hpp"
#include "ttr/util/error.hpp"

using namespace ttr::nn;

namespace {

std::vector<std::uint32_t> iota_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
  return rows;
}

TrainConfig separable_config() {
  TrainConfig tc;
  tc.block.patch_width = 8;
  tc.block.stride = 1;
  tc.block.amplification = 4;
  tc.block.kernel1 = 8;
  tc.block.kernel2 = 1;
  tc.block.has_inner_bn = true;
  tc.filters = 3;
  tc.epochs = 30;
  tc.batch_size = 32;
  tc.learning_rate = 0.02;
  tc.seed = 11;
  tc.config_digest = "test";
  return tc;
}

double train_accuracy(const TTnetModel& model, const ttr::data::Dataset& ds) {
  const ModelEvaluator ev(model);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ds.rows; ++r) {
    const auto scores = ev.predict(ds.row(r));
    if (ev.label_of(scores) == static_cast<int>(ds.y[r])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.rows);
}

}  // namespace

TEST_CASE("step activation maps zero to zero") {
  CHECK(bin_act(0.0) == 0);
  CHECK(bin_act(-1e-12) == 0);
  CHECK(bin_act(1e-300) == 1);
}

TEST_CASE("patch counts follow the window arithmetic") {
  LttBlockSpec spec;
  spec.patch_width = 5;
  spec.stride = 5;
  spec.amplification = 10;
  spec.kernel1 = 5;
  spec.kernel2 = 1;
  CHECK(spec.patch_count(100) == 20);

  spec.patch_width = 6;
  spec.stride = 1;
  spec.kernel1 = 6;
  CHECK(spec.patch_count(17) == 12);

  spec.patch_width = 10;
  CHECK_THROWS_AS(spec.validate(), ttr::ContractError);
}

TEST_CASE("hand-built block realizes its printed truth column") {
  const LttBlockParams block = fixtures::narrow_block();
  block.validate();

  // Assignment x3=1, rest 0 (row 1): the second conv position sees the
  // third taps, relu keeps (3, 4, 0, 3), and the second w2 row gives
  // -5*3 + 4*4 = 1.
  const std::vector<std::uint8_t> bits = {0, 0, 0, 1};
  CHECK(block_preactivation(block, bits) == doctest::Approx(1.0));
  CHECK(block_forward(block, bits) == 1);

  const ttr::logic::TruthTable table = ttr::logic::enumerate_block(block, 3);
  CHECK(table.filter_id == 3);
  REQUIRE(table.outputs.size() == 16);
  for (std::uint32_t r = 0; r < 16; ++r) {
    CHECK(table.outputs[r] == (r == 1 ? 1 : 0));
  }
}

TEST_CASE("evaluator and direct forward agree everywhere") {
  const TTnetModel model = fixtures::census_model();
  model.validate();
  const ModelEvaluator ev(model);
  const std::vector<float> rows = fixtures::all_rows(5);
  std::vector<std::uint8_t> bits;
  for (int r = 0; r < 32; ++r) {
    const std::span<const float> row(rows.data() + r * 5, 5);
    const ForwardResult direct = model_forward(model, row);
    ev.slot_bits(row, bits);
    CHECK(bits == direct.slot_bits);
    CHECK(ev.scores(bits) == direct.scores);
    CHECK(ev.predict(row) == direct.scores);
  }
}

TEST_CASE("model validation rejects inconsistent shapes") {
  TTnetModel model = fixtures::census_model();
  model.head_w.pop_back();
  CHECK_THROWS_AS(model.validate(), ttr::ContractError);

  TTnetModel unfinalized = fixtures::census_model();
  unfinalized.bn_finalized = false;
  const std::vector<float> row(5, 0.0f);
  CHECK_THROWS_AS(model_forward(unfinalized, row), ttr::StateError);
}

TEST_CASE("training learns a noise-free conjunction") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(600, 3);
  REQUIRE(ds.cols == 8);
  const TTnetModel model = train(ds, iota_rows(ds.rows), separable_config());
  CHECK(model.bn_finalized);
  CHECK(train_accuracy(model, ds) >= 0.95);
}

TEST_CASE("binary_sparse head weights land in {-1, 0, +1}") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(300, 5);
  TrainConfig tc = separable_config();
  tc.epochs = 5;
  const TTnetModel model = train(ds, iota_rows(ds.rows), tc);
  REQUIRE(model.head_mode == HeadMode::BinarySparse);
  for (std::size_t slot = 0; slot < model.slots(); ++slot) {
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      const double w = model.head_weight(slot, c);
      CHECK((w == -1.0 || w == 0.0 || w == 1.0));
    }
  }
}

TEST_CASE("equal seeds train byte-identical models") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(300, 5);
  TrainConfig tc = separable_config();
  tc.epochs = 4;
  const std::string a = checkpoint_to_json(train(ds, iota_rows(ds.rows), tc));
  const std::string b = checkpoint_to_json(train(ds, iota_rows(ds.rows), tc));
  CHECK(a == b);
}

TEST_CASE("finalized statistics are the population statistics") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(400, 9);
  TrainConfig tc = separable_config();
  tc.epochs = 3;
  const std::vector<std::uint32_t> rows = iota_rows(ds.rows);
  TTnetModel model = train(ds, rows, tc);

  for (std::size_t c = 0; c < ds.cols; ++c) {
    double mean = 0.0;
    for (const std::uint32_t r : rows) mean += ds.x[r * ds.cols + c];
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const std::uint32_t r : rows) {
      const double d = ds.x[r * ds.cols + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(rows.size());
    CHECK(model.input_bn.running_mean[c] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(model.input_bn.running_var[c] == doctest::Approx(var).epsilon(1e-9));
  }

  // Slot statistics match the bits the finalized model actually emits.
  const ModelEvaluator ev(model);
  std::vector<double> slot_mean(model.slots(), 0.0);
  std::vector<std::uint8_t> bits;
  for (const std::uint32_t r : rows) {
    ev.slot_bits(ds.row(r), bits);
    for (std::size_t s = 0; s < bits.size(); ++s) slot_mean[s] += bits[s];
  }
  for (std::size_t s = 0; s < model.slots(); ++s) {
    slot_mean[s] /= static_cast<double>(rows.size());
    CHECK(model.final_bn.running_mean[s] ==
          doctest::Approx(slot_mean[s]).epsilon(1e-9));
  }

  // Recomputing again is a fixed point.
  const std::string before = checkpoint_to_json(model);
  recompute_bn_stats(model, ds, rows);
  CHECK(checkpoint_to_json(model) == before);
}

TEST_CASE("checkpoints round trip byte for byte") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(200, 21);
  TrainConfig tc = separable_config();
  tc.epochs = 2;
  const TTnetModel model = train(ds, iota_rows(ds.rows), tc);

  const std::string json = checkpoint_to_json(model);
  const TTnetModel back = checkpoint_from_json(json);
  CHECK(checkpoint_to_json(back) == json);

  const ModelEvaluator ev_a(model);
  const ModelEvaluator ev_b(back);
  for (std::size_t r = 0; r < 20; ++r) {
    CHECK(ev_a.predict(ds.row(r)) == ev_b.predict(ds.row(r)));
  }

  CHECK_THROWS_AS(checkpoint_from_json("{\"format\": \"other\"}"),
                  ttr::ParseError);
  CHECK_THROWS_AS(checkpoint_from_json("not json at all"), ttr::ParseError);
}

TEST_CASE("float head trains and keeps dense weights") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(400, 2);
  TrainConfig tc = separable_config();
  tc.head_mode = HeadMode::Float;
  tc.epochs = 20;
  const TTnetModel model = train(ds, iota_rows(ds.rows), tc);
  CHECK(model.head_mode == HeadMode::Float);
  CHECK(model.head_mask.empty());
  CHECK(train_accuracy(model, ds) >= 0.95);
}

TEST_CASE("train rejects bad configuration") {
  const ttr::data::Dataset ds = ttr::synth::make_separable(100, 1);
  TrainConfig tc = separable_config();
  tc.epochs = 0;
  CHECK_THROWS_AS(train(ds, iota_rows(ds.rows), tc), ttr::ConfigError);

  TrainConfig wide = separable_config();
  wide.block.patch_width = 9;
  wide.block.kernel1 = 9;
  // Patch wider than the 8-column input.
  CHECK_THROWS_AS(train(ds, iota_rows(ds.rows), wide), ttr::ContractError);
}
