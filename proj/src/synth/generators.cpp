#include "ttr/synth/generators.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ttr/util/error.hpp"
#include "ttr/util/rng.hpp"

namespace ttr::synth {

namespace {

// Index into `weights` drawn proportionally; weights need not sum to one.
std::size_t pick(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (const double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  return weights.size() - 1;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

long long clamp_ll(double v, long long lo, long long hi) {
  const long long r = static_cast<long long>(std::llround(v));
  return r < lo ? lo : (r > hi ? hi : r);
}

// --- census-style table ----------------------------------------------------

constexpr std::array<const char*, 8> kWorkclass = {
    "Federal-gov", "Local-gov",   "Never-worked", "Private",
    "Self-emp-inc", "Self-emp-not-inc", "State-gov", "Without-pay"};
constexpr std::array<double, 8> kWorkclassW = {0.03, 0.065, 0.0005, 0.70,
                                               0.035, 0.08, 0.04, 0.0005};

constexpr std::array<const char*, 16> kEducation = {
    "10th",      "11th",        "12th",      "1st-4th",
    "5th-6th",   "7th-8th",     "9th",       "Assoc-acdm",
    "Assoc-voc", "Bachelors",   "Doctorate", "HS-grad",
    "Masters",   "Preschool",   "Prof-school", "Some-college"};
constexpr std::array<double, 16> kEducationW = {
    0.028, 0.036, 0.013, 0.005, 0.010, 0.020, 0.015, 0.032,
    0.042, 0.165, 0.012, 0.320, 0.054, 0.001, 0.017, 0.220};
constexpr std::array<int, 16> kEducationNum = {6,  7,  8, 2, 3, 4,  5,  12,
                                               11, 13, 16, 9, 14, 1, 15, 10};

constexpr std::array<const char*, 7> kMarital = {
    "Divorced", "Married-AF-spouse", "Married-civ-spouse",
    "Married-spouse-absent", "Never-married", "Separated", "Widowed"};
// Rows: age < 26, 26..39, 40 and up.
constexpr std::array<std::array<double, 7>, 3> kMaritalByAge = {{
    {0.040, 0.010, 0.120, 0.045, 0.750, 0.030, 0.005},
    {0.110, 0.005, 0.500, 0.035, 0.300, 0.040, 0.010},
    {0.180, 0.001, 0.600, 0.029, 0.100, 0.040, 0.050},
}};

constexpr std::array<const char*, 14> kOccupation = {
    "Adm-clerical",    "Armed-Forces",     "Craft-repair",
    "Exec-managerial", "Farming-fishing",  "Handlers-cleaners",
    "Machine-op-inspct", "Other-service",  "Priv-house-serv",
    "Prof-specialty",  "Protective-serv",  "Sales",
    "Tech-support",    "Transport-moving"};
// Rows: education_num >= 13, below 13.
constexpr std::array<std::array<double, 14>, 2> kOccupationByEd = {{
    {0.060, 0.005, 0.040, 0.280, 0.010, 0.010, 0.020, 0.030, 0.005, 0.340,
     0.020, 0.100, 0.060, 0.020},
    {0.140, 0.002, 0.160, 0.070, 0.040, 0.060, 0.090, 0.130, 0.020, 0.050,
     0.020, 0.100, 0.030, 0.070},
}};

constexpr std::array<const char*, 6> kRelationship = {
    "Husband", "Not-in-family", "Other-relative", "Own-child", "Unmarried",
    "Wife"};

constexpr std::array<const char*, 5> kRace = {
    "Amer-Indian-Eskimo", "Asian-Pac-Islander", "Black", "Other", "White"};
constexpr std::array<double, 5> kRaceW = {0.010, 0.031, 0.096, 0.008, 0.855};

constexpr std::array<const char*, 36> kCountry = {
    "Cambodia", "Canada",    "China",     "Columbia", "Cuba",
    "Dominican-Republic", "Ecuador", "El-Salvador", "England", "France",
    "Germany",  "Greece",    "Guatemala", "Haiti",    "Honduras",
    "Hungary",  "India",     "Iran",      "Ireland",  "Italy",
    "Jamaica",  "Japan",     "Laos",      "Mexico",   "Nicaragua",
    "Philippines", "Poland", "Portugal",  "Puerto-Rico", "Scotland",
    "South",    "Taiwan",    "Thailand",  "United-States", "Vietnam",
    "Yugoslavia"};

// Sharpness of the label draw; higher means less label noise. Tuned so the
// best attainable accuracy sits near 0.88.
constexpr double kAdultSharpness = 3.2;

// --- recidivism-style table -------------------------------------------------

constexpr std::array<const char*, 4> kAgeBucket = {"25_35", "35_45", "over45",
                                                   "under25"};
constexpr std::array<const char*, 4> kPriorsBucket = {"more_five", "none",
                                                      "one_two", "three_five"};
constexpr std::array<const char*, 4> kCustodyBucket = {"long", "medium",
                                                       "none", "short"};

constexpr double kCompasSharpness = 1.6;

}  // namespace

std::string adult_like_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::string out;
  out.reserve(rows * 130 + 256);
  out +=
      "age,workclass,fnlwgt,education,education_num,marital_status,"
      "occupation,relationship,race,sex,capital_gain,capital_loss,"
      "hours_per_week,native_country,income\n";

  for (std::size_t r = 0; r < rows; ++r) {
    const long long age = clamp_ll(rng.normal(38.6, 13.6), 17, 90);
    const bool male = rng.bernoulli(0.67);

    const std::size_t age_band = age < 26 ? 0 : (age < 40 ? 1 : 2);
    const std::size_t marital = pick(rng, kMaritalByAge[age_band]);
    const bool married = std::string_view(kMarital[marital]) ==
                         "Married-civ-spouse";

    const std::size_t education = pick(rng, kEducationW);
    const int ed_num = kEducationNum[education];
    const std::size_t occupation =
        pick(rng, kOccupationByEd[ed_num >= 13 ? 0 : 1]);
    const bool exec_or_prof =
        std::string_view(kOccupation[occupation]) == "Exec-managerial" ||
        std::string_view(kOccupation[occupation]) == "Prof-specialty";

    std::size_t relationship;
    if (married) {
      relationship = male ? 0 : 5;  // Husband / Wife
    } else if (age < 26) {
      constexpr std::array<double, 6> w = {0.0, 0.30, 0.07, 0.50, 0.13, 0.0};
      relationship = pick(rng, w);
    } else {
      constexpr std::array<double, 6> w = {0.0, 0.55, 0.10, 0.05, 0.30, 0.0};
      relationship = pick(rng, w);
    }
    const bool own_child = relationship == 3;

    const std::size_t workclass = pick(rng, kWorkclassW);
    const std::size_t race = pick(rng, kRaceW);

    std::size_t country;
    if (rng.bernoulli(0.90)) {
      country = 33;  // United-States
    } else if (rng.bernoulli(0.20)) {
      country = 23;  // Mexico
    } else {
      country = rng.below(kCountry.size());
    }

    const long long fnlwgt = clamp_ll(std::exp(rng.normal(11.9, 0.5)), 13000,
                                      1500000);
    long long capital_gain = 0;
    if (rng.bernoulli(ed_num >= 13 ? 0.10 : 0.07)) {
      capital_gain = clamp_ll(std::exp(rng.normal(8.6, 1.1)), 114, 99999);
    }
    long long capital_loss = 0;
    if (rng.bernoulli(0.047)) {
      capital_loss = clamp_ll(std::exp(rng.normal(7.4, 0.35)), 155, 4356);
    }
    const long long hours =
        clamp_ll(rng.normal(exec_or_prof ? 44.0 : 40.0, 11.0), 1, 99);

    double logit = -2.6;
    if (married) logit += 1.7;
    if (ed_num >= 13) logit += 0.9;
    if (ed_num >= 14) logit += 0.45;
    if (age > 33) logit += 0.8;
    if (hours > 42) logit += 0.5;
    if (capital_gain > 5000) logit += 1.9;
    if (capital_loss > 1800) logit += 0.5;
    if (exec_or_prof) logit += 0.7;
    if (male) logit += 0.2;
    if (own_child) logit -= 0.9;
    if (age <= 25) logit -= 0.4;
    const bool high = rng.bernoulli(sigmoid(kAdultSharpness * logit));

    out += std::to_string(age);
    out.push_back(',');
    out += kWorkclass[workclass];
    out.push_back(',');
    out += std::to_string(fnlwgt);
    out.push_back(',');
    out += kEducation[education];
    out.push_back(',');
    out += std::to_string(ed_num);
    out.push_back(',');
    out += kMarital[marital];
    out.push_back(',');
    out += kOccupation[occupation];
    out.push_back(',');
    out += kRelationship[relationship];
    out.push_back(',');
    out += kRace[race];
    out.push_back(',');
    out += male ? "Male" : "Female";
    out.push_back(',');
    out += std::to_string(capital_gain);
    out.push_back(',');
    out += std::to_string(capital_loss);
    out.push_back(',');
    out += std::to_string(hours);
    out.push_back(',');
    out += kCountry[country];
    out.push_back(',');
    out += high ? ">50K" : "<=50K";
    out.push_back('\n');
  }
  return out;
}

std::string compas_like_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::string out;
  out.reserve(rows * 40 + 128);
  out +=
      "sex_male,juv_felony,juv_misd,charge_felony,violent_history,"
      "age_bucket,priors_bucket,custody_bucket,reoffend\n";

  // Bucket orders match the constant arrays: age {25_35, 35_45, over45,
  // under25}, priors {more_five, none, one_two, three_five}, custody
  // {long, medium, none, short}.
  constexpr std::array<double, 4> age_w = {0.35, 0.22, 0.21, 0.22};
  constexpr std::array<std::array<double, 4>, 4> priors_by_age = {{
      {0.19, 0.33, 0.27, 0.21},  // 25_35
      {0.24, 0.28, 0.25, 0.23},  // 35_45
      {0.24, 0.30, 0.24, 0.22},  // over45
      {0.10, 0.45, 0.30, 0.15},  // under25
  }};
  constexpr std::array<std::array<double, 4>, 4> custody_by_priors = {{
      {0.22, 0.30, 0.20, 0.28},  // more_five
      {0.05, 0.12, 0.55, 0.28},  // none
      {0.10, 0.18, 0.42, 0.30},  // one_two
      {0.15, 0.25, 0.30, 0.30},  // three_five
  }};

  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t age = pick(rng, age_w);
    const bool under25 = age == 3;
    const bool over45 = age == 2;

    const bool male = rng.bernoulli(0.81);
    const bool juv_fel = rng.bernoulli(under25 ? 0.11 : (over45 ? 0.02 : 0.05));
    const bool juv_misd =
        rng.bernoulli(under25 ? 0.16 : (over45 ? 0.03 : 0.08));
    const std::size_t priors = pick(rng, priors_by_age[age]);
    const bool many_priors = priors == 0;
    const bool some_priors = priors == 3;
    const bool charge_felony = rng.bernoulli(0.64);
    const bool violent = rng.bernoulli(
        0.10 + (many_priors || some_priors ? 0.25 : 0.0) +
        (juv_fel ? 0.10 : 0.0));
    const std::size_t custody = pick(rng, custody_by_priors[priors]);

    double logit = -0.8;
    if (many_priors) logit += 0.95;
    if (some_priors) logit += 0.55;
    if (priors == 2) logit += 0.18;
    if (under25) logit += 0.6;
    if (age == 0) logit += 0.22;
    if (over45) logit -= 0.3;
    if (juv_fel) logit += 0.45;
    if (juv_misd) logit += 0.28;
    if (male) logit += 0.22;
    if (charge_felony) logit += 0.18;
    if (violent) logit += 0.25;
    if (custody == 0) logit += 0.3;
    if (custody == 1) logit += 0.12;
    const bool reoffend = rng.bernoulli(sigmoid(kCompasSharpness * logit));

    out += male ? "1," : "0,";
    out += juv_fel ? "1," : "0,";
    out += juv_misd ? "1," : "0,";
    out += charge_felony ? "1," : "0,";
    out += violent ? "1," : "0,";
    out += kAgeBucket[age];
    out.push_back(',');
    out += kPriorsBucket[priors];
    out.push_back(',');
    out += kCustodyBucket[custody];
    out.push_back(',');
    out += reoffend ? "1" : "0";
    out.push_back('\n');
  }
  return out;
}

data::Dataset load_adult_like(std::size_t rows, std::uint64_t seed) {
  // The country column holds more distinct values than inference will
  // expand on its own.
  const data::DeclaredKinds declared = {
      {"native_country", data::ColumnKind::CategoricalExpanded}};
  return data::load_csv_text(adult_like_csv(rows, seed), "income",
                             data::Task::Binary, declared, "adult_like");
}

data::Dataset load_compas_like(std::size_t rows, std::uint64_t seed) {
  return data::load_csv_text(compas_like_csv(rows, seed), "reoffend",
                             data::Task::Binary, {}, "compas_like");
}

data::Dataset make_wide(std::size_t rows, std::size_t cols,
                        std::uint64_t seed) {
  if (cols < 16) throw ContractError("make_wide: needs at least 16 columns");
  Rng rng(seed);
  data::Dataset ds;
  ds.rows = rows;
  ds.cols = cols;
  ds.task = data::Task::Binary;
  ds.num_classes = 2;
  ds.class_labels = {"0", "1"};
  ds.schema.columns.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    ds.schema.columns[c].name = "b" + std::to_string(c);
    ds.schema.columns[c].kind = data::ColumnKind::Binary;
  }
  ds.x.resize(rows * cols);
  ds.y.resize(rows);
  const std::size_t a = cols / 7;
  const std::size_t b = cols / 3;
  const std::size_t c1 = (2 * cols) / 3;
  const std::size_t c2 = c1 + 1;
  for (std::size_t r = 0; r < rows; ++r) {
    float* row = ds.x.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    }
    const bool target =
        (row[a] != 0.0f && row[b] == 0.0f) || (row[c1] != 0.0f && row[c2] != 0.0f);
    const bool label = rng.bernoulli(0.08) ? !target : target;
    ds.y[r] = label ? 1.0 : 0.0;
  }
  return ds;
}

data::Dataset make_separable(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  data::Dataset ds;
  ds.rows = rows;
  ds.cols = 8;
  ds.task = data::Task::Binary;
  ds.num_classes = 2;
  ds.class_labels = {"0", "1"};
  ds.schema.columns.resize(8);
  for (std::size_t c = 0; c < 8; ++c) {
    ds.schema.columns[c].name = "f" + std::to_string(c);
    ds.schema.columns[c].kind = data::ColumnKind::Binary;
  }
  ds.x.resize(rows * 8);
  ds.y.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    float* row = ds.x.data() + r * 8;
    for (std::size_t c = 0; c < 8; ++c) {
      row[c] = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    }
    ds.y[r] = (row[1] != 0.0f && row[4] == 0.0f) ? 1.0 : 0.0;
  }
  return ds;
}

}  // namespace ttr::synth
