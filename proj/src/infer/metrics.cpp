#include "ttr/infer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttr/util/error.hpp"

namespace ttr::infer {

double accuracy(std::span<const int> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw ContractError("accuracy: label lists must have equal nonzero length");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == static_cast<int>(truth[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double auc_score(std::span<const double> scores, std::span<const double> truth) {
  if (scores.size() != truth.size() || scores.empty()) {
    throw ContractError("auc: score and label lists must have equal nonzero length");
  }
  std::size_t positives = 0;
  for (const double y : truth) {
    if (y != 0.0) ++positives;
  }
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw InputError("auc: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Sum of positive ranks with tied scores sharing their average rank.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] != 0.0) positive_rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw ContractError("rmse: value lists must have equal nonzero length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

}  // namespace ttr::infer
