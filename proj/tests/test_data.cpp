#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "ttr/data/dataset.hpp"
#include "ttr/util/error.hpp"

using namespace ttr::data;

namespace {

const char* kSurveyCsv =
    "city,age,smoker,label\n"
    "berlin,34,1,yes\n"
    "oslo,51,0,no\n"
    "berlin,29,0,no\n"
    "austin,40,1,yes\n"
    ",22,0,no\n";

}  // namespace

TEST_CASE("categorical columns expand to sorted one-hot groups") {
  const Dataset ds = load_csv_text(kSurveyCsv, "label", Task::Binary);
  // city expands to 3 columns (alphabetical), age stays continuous, smoker
  // stays binary.
  REQUIRE(ds.cols == 5);
  CHECK(ds.schema.columns[0].name == "city=austin");
  CHECK(ds.schema.columns[1].name == "city=berlin");
  CHECK(ds.schema.columns[2].name == "city=oslo");
  CHECK(ds.schema.columns[3].name == "age");
  CHECK(ds.schema.columns[4].name == "smoker");
  CHECK(ds.schema.columns[0].kind == ColumnKind::CategoricalExpanded);
  CHECK(ds.schema.columns[0].group_id == 0);
  CHECK(ds.schema.columns[1].group_id == 0);
  CHECK(ds.schema.columns[3].kind == ColumnKind::Continuous);
  CHECK(ds.schema.columns[4].kind == ColumnKind::Binary);

  // Row 0 is berlin: only the berlin column of the group is set.
  CHECK(ds.x[0 * 5 + 0] == 0.0f);
  CHECK(ds.x[0 * 5 + 1] == 1.0f);
  CHECK(ds.x[0 * 5 + 2] == 0.0f);
  CHECK(ds.x[0 * 5 + 3] == 34.0f);
  CHECK(ds.x[0 * 5 + 4] == 1.0f);

  // Row 4 has a missing city: the whole group is zero.
  CHECK(ds.x[4 * 5 + 0] == 0.0f);
  CHECK(ds.x[4 * 5 + 1] == 0.0f);
  CHECK(ds.x[4 * 5 + 2] == 0.0f);

  // Binary targets sort, so "no" is class 0.
  REQUIRE(ds.class_labels == std::vector<std::string>{"no", "yes"});
  CHECK(ds.y == std::vector<double>{1, 0, 0, 1, 0});
  CHECK(ds.num_classes == 2);
}

TEST_CASE("declared kinds override inference") {
  // smoker is 0/1 but declared continuous; age declared categorical.
  DeclaredKinds declared;
  declared["smoker"] = ColumnKind::Continuous;
  declared["age"] = ColumnKind::CategoricalExpanded;
  const Dataset ds = load_csv_text(kSurveyCsv, "label", Task::Binary, declared);
  const int smoker = ds.schema.column_index("smoker");
  REQUIRE(smoker >= 0);
  CHECK(ds.schema.columns[static_cast<std::size_t>(smoker)].kind ==
        ColumnKind::Continuous);
  CHECK(ds.schema.column_index("age=22") >= 0);
  CHECK(ds.schema.column_index("age") == -1);
}

TEST_CASE("numeric class labels sort numerically") {
  const Dataset ds = load_csv_text(
      "f,label\n1,10\n0,9\n1,10\n0,2\n", "label", Task::Multiclass);
  CHECK(ds.class_labels == std::vector<std::string>{"2", "9", "10"});
  CHECK(ds.y == std::vector<double>{2, 1, 2, 0});
}

TEST_CASE("loader errors name the offending cell") {
  CHECK_THROWS_AS(load_csv_text("a,label\nx,1\n", "missing", Task::Binary),
                  ttr::ConfigError);
  // Declared-binary column holding a 2.
  DeclaredKinds declared;
  declared["a"] = ColumnKind::Binary;
  try {
    load_csv_text("a,label\n2,1\n0,0\n", "label", Task::Binary, declared);
    FAIL("expected ParseError");
  } catch (const ttr::ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("'a'") != std::string::npos);
  }
  // Ragged row.
  CHECK_THROWS_AS(load_csv_text("a,b,label\n1,2\n", "label", Task::Binary),
                  ttr::ParseError);
  // Single-valued target.
  CHECK_THROWS_AS(load_csv_text("a,label\n1,x\n0,x\n", "label", Task::Binary),
                  ttr::InputError);
}

TEST_CASE("regression targets are standardized with the affine recorded") {
  const Dataset ds = load_csv_text("f,y\n0,2\n1,4\n0,6\n1,8\n", "y",
                                   Task::Regression);
  CHECK(ds.target_affine.mean == doctest::Approx(5.0));
  // Population sd of {2,4,6,8}.
  CHECK(ds.target_affine.sd == doctest::Approx(std::sqrt(5.0)));
  for (std::size_t r = 0; r < ds.rows; ++r) {
    const double original = ds.y[r] * ds.target_affine.sd + ds.target_affine.mean;
    CHECK(original == doctest::Approx(2.0 + 2.0 * static_cast<double>(r)));
  }
  double mean = 0.0;
  for (const double v : ds.y) mean += v;
  CHECK(mean / 4.0 == doctest::Approx(0.0));
}

TEST_CASE("kfold split partitions every row exactly once") {
  Dataset ds;
  ds.rows = 103;
  ds.cols = 1;
  ds.x.assign(103, 0.0f);
  ds.y.assign(103, 0.0);
  Column col;
  col.name = "f";
  ds.schema.columns.push_back(col);

  const SplitPlan plan = kfold_split(ds, 42, 5);
  REQUIRE(plan.folds.size() == 5);
  std::set<std::uint32_t> seen;
  for (const auto& fold : plan.folds) {
    CHECK(std::is_sorted(fold.test.begin(), fold.test.end()));
    CHECK(std::is_sorted(fold.train.begin(), fold.train.end()));
    CHECK(fold.train.size() + fold.test.size() == 103);
    // Test sizes differ by at most one row: 103 = 5 * 20 + 3.
    CHECK(fold.test.size() >= 20);
    CHECK(fold.test.size() <= 21);
    for (const std::uint32_t r : fold.test) {
      CHECK(seen.insert(r).second);
    }
    std::set<std::uint32_t> train(fold.train.begin(), fold.train.end());
    for (const std::uint32_t r : fold.test) CHECK(train.count(r) == 0);
  }
  CHECK(seen.size() == 103);

  const SplitPlan again = kfold_split(ds, 42, 5);
  CHECK(again.folds[0].test == plan.folds[0].test);
  const SplitPlan other = kfold_split(ds, 43, 5);
  bool any_difference = false;
  for (int f = 0; f < 5; ++f) {
    if (other.folds[static_cast<std::size_t>(f)].test !=
        plan.folds[static_cast<std::size_t>(f)].test) {
      any_difference = true;
    }
  }
  CHECK(any_difference);

  CHECK_THROWS_AS(kfold_split(ds, 1, 1), ttr::ContractError);
}

TEST_CASE("one-hot violations are reported per group") {
  Dataset ds = load_csv_text(kSurveyCsv, "label", Task::Binary);
  CHECK(validate_onehot(ds).empty());
  // Force berlin and oslo on row 1.
  ds.x[1 * 5 + 1] = 1.0f;
  ds.x[1 * 5 + 2] = 1.0f;
  const auto violations = validate_onehot(ds);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].row == 1);
  CHECK(violations[0].group_id == 0);
  CHECK(violations[0].columns_set ==
        std::vector<std::string>{"city=berlin", "city=oslo"});
}

TEST_CASE("target_stats computes population statistics") {
  Dataset ds;
  ds.rows = 4;
  ds.cols = 1;
  ds.x.assign(4, 0.0f);
  ds.y = {1.0, 3.0, 5.0, 7.0};
  const std::vector<std::uint32_t> rows = {0, 1, 2, 3};
  const TargetAffine stats = target_stats(ds, rows);
  CHECK(stats.mean == doctest::Approx(4.0));
  CHECK(stats.sd == doctest::Approx(std::sqrt(5.0)));

  const std::vector<std::uint32_t> head = {0, 1};
  const TargetAffine partial = target_stats(ds, head);
  CHECK(partial.mean == doctest::Approx(2.0));
  CHECK(partial.sd == doctest::Approx(1.0));
}
