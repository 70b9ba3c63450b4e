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

#include "g2v/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "g2v/error.hpp"
#include "g2v/hash.hpp"
#include "g2v/metrics.hpp"

namespace g2v {

std::string_view EvalSettingName(EvalSetting s) {
  return s == EvalSetting::kInductive ? "inductive" : "transductive";
}

EvalSetting ParseEvalSetting(std::string_view name) {
  if (name == "transductive") return EvalSetting::kTransductive;
  if (name == "inductive") return EvalSetting::kInductive;
  throw Error(ErrorKind::kInvalidValue, "setting: " + std::string(name));
}

MetricSummary Summarize(std::vector<double> values) {
  MetricSummary out;
  out.per_seed = std::move(values);
  if (out.per_seed.empty()) return out;
  double sum = 0.0;
  for (double v : out.per_seed) sum += v;
  out.mean = sum / static_cast<double>(out.per_seed.size());
  double sq = 0.0;
  for (double v : out.per_seed) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(out.per_seed.size()));
  return out;
}

namespace {

nlohmann::json SummaryJson(const MetricSummary& m) {
  return {{"mean", m.mean}, {"std", m.std}, {"per_seed", m.per_seed}};
}

}  // namespace

std::string EvalReport::ToJson() const {
  nlohmann::json j;
  j["setting"] = std::string(EvalSettingName(setting));
  j["strategy"] = std::string(NegStrategyName(strategy));
  j["seeds"] = seeds;
  j["ap"] = SummaryJson(ap);
  j["auc"] = SummaryJson(auc);
  j["fallback_count"] = fallback_count;
  j["num_positives"] = num_positives;
  return j.dump(2);
}

std::string EvalReport::CsvHeader() {
  return "setting,strategy,num_seeds,ap_mean,ap_std,auc_mean,auc_std,fallback_count";
}

std::string EvalReport::ToCsvRow() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,%.6f,%.6f,%.6f,%zu",
                std::string(EvalSettingName(setting)).c_str(),
                std::string(NegStrategyName(strategy)).c_str(), seeds.size(), ap.mean, ap.std,
                auc.mean, auc.std, fallback_count);
  return buf;
}

std::vector<Query> EvalPositives(const TemporalGraph& graph, const SplitSpec& split,
                                 EvalSetting setting, size_t begin, size_t end) {
  std::vector<Query> out;
  for (size_t i = begin; i < end && i < graph.size(); ++i) {
    const Event& e = graph.event(i);
    if (setting == EvalSetting::kInductive && !split.IsNewNode(e.src) && !split.IsNewNode(e.dst)) {
      continue;
    }
    out.push_back({e.src, e.dst, e.t});
  }
  return out;
}

uint64_t EvalNegativeSeed(uint64_t seed, NegStrategy strategy, size_t batch) {
  return MixSeed(MixSeed(seed, Fnv1a64(NegStrategyName(strategy))), batch);
}

EvalReport Evaluate(const ScorerFactory& scorers, const TemporalGraph& graph,
                    const SplitSpec& split, const NegativeSampler& sampler, EvalSetting setting,
                    NegStrategy strategy, std::span<const uint64_t> seeds, size_t batch_size) {
  const auto positives = EvalPositives(graph, split, setting, split.val_end_idx, graph.size());
  if (positives.empty()) {
    throw Error(ErrorKind::kEmptyEvalSet, std::string(EvalSettingName(setting)) +
                                              " filter left no test events");
  }
  if (batch_size == 0) throw Error(ErrorKind::kInvalidValue, "batch_size");
  EvalReport report;
  report.setting = setting;
  report.strategy = strategy;
  report.seeds.assign(seeds.begin(), seeds.end());
  report.num_positives = positives.size();
  std::vector<double> aps, aucs;
  for (uint64_t seed : seeds) {
    const Scorer scorer = scorers(seed);
    std::vector<double> scores;
    std::vector<int> labels;
    for (size_t start = 0, b = 0; start < positives.size(); start += batch_size, ++b) {
      const size_t end = std::min(positives.size(), start + batch_size);
      std::vector<Query> queries(positives.begin() + static_cast<std::ptrdiff_t>(start),
                                 positives.begin() + static_cast<std::ptrdiff_t>(end));
      const auto negs = sampler.Sample(queries, strategy, EvalNegativeSeed(seed, strategy, b));
      report.fallback_count += negs.fallback_count;
      const size_t n_pos = queries.size();
      queries.insert(queries.end(), negs.negatives.begin(), negs.negatives.end());
      const auto batch_scores = scorer(queries);
      if (batch_scores.size() != queries.size()) {
        throw Error(ErrorKind::kShapeMismatch, "scorer returned wrong number of scores");
      }
      scores.insert(scores.end(), batch_scores.begin(), batch_scores.end());
      labels.insert(labels.end(), n_pos, 1);
      labels.insert(labels.end(), queries.size() - n_pos, 0);
    }
    aps.push_back(AveragePrecision(scores, labels));
    aucs.push_back(AucRoc(scores, labels));
  }
  report.ap = Summarize(std::move(aps));
  report.auc = Summarize(std::move(aucs));
  return report;
}

}  // namespace g2v
