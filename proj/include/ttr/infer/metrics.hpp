#pragma once

#include <optional>
#include <span>
#include <vector>

namespace ttr::infer {

// accuracy: fraction of exact label matches.
double accuracy(std::span<const int> predicted, std::span<const double> truth);

// Rank-statistic AUC of binary labels against real-valued scores: the
// probability a positive outranks a negative, ties counted half. Invariant
// under any strictly increasing transform of the scores. Throws InputError
// when only one class is present.
double auc_score(std::span<const double> scores, std::span<const double> truth);

double rmse(std::span<const double> predicted, std::span<const double> truth);

struct MetricsReport {
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> auc;        // binary only
  std::optional<double> rmse_std;   // regression, standardized units
  std::optional<double> rmse_orig;  // regression, original units
};

}  // namespace ttr::infer
