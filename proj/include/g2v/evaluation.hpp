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

#ifndef G2V_EVALUATION_HPP_
#define G2V_EVALUATION_HPP_

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2v/negative_sampling.hpp"
#include "g2v/temporal_graph.hpp"

namespace g2v {

enum class EvalSetting { kTransductive, kInductive };

std::string_view EvalSettingName(EvalSetting s);
EvalSetting ParseEvalSetting(std::string_view name);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> per_seed;
};

MetricSummary Summarize(std::vector<double> values);

struct EvalReport {
  EvalSetting setting = EvalSetting::kTransductive;
  NegStrategy strategy = NegStrategy::kRandom;
  std::vector<uint64_t> seeds;
  MetricSummary ap;
  MetricSummary auc;
  size_t fallback_count = 0;
  size_t num_positives = 0;

  std::string ToJson() const;
  static std::string CsvHeader();
  std::string ToCsvRow() const;
};

// Scores a list of queries. One scorer is built per seed.
using Scorer = std::function<std::vector<double>(std::span<const Query>)>;
using ScorerFactory = std::function<Scorer(uint64_t seed)>;

// Events in [begin, end); the inductive setting keeps only events touching
// a held-out node.
std::vector<Query> EvalPositives(const TemporalGraph& graph, const SplitSpec& split,
                                 EvalSetting setting, size_t begin, size_t end);

// Seeded negative stream for evaluation batch `batch`.
uint64_t EvalNegativeSeed(uint64_t seed, NegStrategy strategy, size_t batch);

// Scores every test positive and one sampled negative per positive, per
// seed. Throws EmptyEvalSet when the filter leaves no positives.
EvalReport Evaluate(const ScorerFactory& scorers, const TemporalGraph& graph,
                    const SplitSpec& split, const NegativeSampler& sampler, EvalSetting setting,
                    NegStrategy strategy, std::span<const uint64_t> seeds,
                    size_t batch_size = 200);

}  // namespace g2v

#endif  // G2V_EVALUATION_HPP_
