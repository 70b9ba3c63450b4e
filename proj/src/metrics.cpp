/*
 * Copyright 2026 The g2v Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "g2v/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "g2v/error.hpp"

namespace g2v {
namespace {

void CheckShapes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kShapeMismatch, "scores and labels differ in length");
  }
}

std::vector<size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double AveragePrecision(std::span<const double> scores, std::span<const int> labels) {
  CheckShapes(scores, labels);
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  if (positives == 0) throw Error(ErrorKind::kNoPositives, "average precision");
  const auto order = DescendingOrder(scores);
  double sum = 0.0;
  size_t hits = 0;
  for (size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(positives);
}

double AucRoc(std::span<const double> scores, std::span<const int> labels) {
  CheckShapes(scores, labels);
  const auto positives = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  const auto negatives = static_cast<long>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw Error(ErrorKind::kSingleClass, "auc-roc");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) rank_sum += avg_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

}  // namespace g2v
