#pragma once

#include <cstdint>
#include <string>

#include "ttr/data/dataset.hpp"

namespace ttr::synth {

// Default sizes of the bundled tables.
inline constexpr std::size_t kAdultRows = 48842;
inline constexpr std::size_t kCompasRows = 6172;

// Census-style income table: 6 numeric columns and 8 categorical columns
// that expand to exactly 100 feature columns, target `income` with labels
// <=50K / >50K. Labels are drawn from an additive logistic model over
// threshold and category indicators, so a per-column binarization can
// carry the full signal.
std::string adult_like_csv(std::size_t rows, std::uint64_t seed);

// Recidivism-style table: 5 binary columns and 3 four-way categorical
// columns expanding to 17 feature columns, target `reoffend` in {0,1}.
// Labels are noisier than the census table; the one-hot groups sit inside
// most patch windows, which is what impossible-input reduction feeds on.
std::string compas_like_csv(std::size_t rows, std::uint64_t seed);

// The CSV above run through the standard loader.
data::Dataset load_adult_like(std::size_t rows, std::uint64_t seed);
data::Dataset load_compas_like(std::size_t rows, std::uint64_t seed);

// Wide binary matrix with a planted two-clause concept and 8% label noise,
// built in memory; a CSV of this would be pointlessly large.
data::Dataset make_wide(std::size_t rows, std::size_t cols,
                        std::uint64_t seed);

// Noise-free single-conjunction concept (y = f1 AND NOT f4) over 8 binary
// features.
data::Dataset make_separable(std::size_t rows, std::uint64_t seed);

}  // namespace ttr::synth
