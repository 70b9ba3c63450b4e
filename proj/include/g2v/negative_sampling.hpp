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

#ifndef G2V_NEGATIVE_SAMPLING_HPP_
#define G2V_NEGATIVE_SAMPLING_HPP_

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "g2v/hash.hpp"
#include "g2v/temporal_graph.hpp"

namespace g2v {

enum class NegStrategy { kRandom, kHistorical, kInductive };

std::string_view NegStrategyName(NegStrategy s);  // rnd | hist | ind
NegStrategy ParseNegStrategy(std::string_view name);

struct Query {
  NodeId u = 0;
  NodeId v = 0;
  double t = 0.0;

  bool operator==(const Query&) const = default;
};

// Uniform draw from a sorted node list, skipping `exclude` when present.
NodeId UniformExcluding(std::span<const NodeId> sorted_nodes, NodeId exclude, Rng& rng);

struct NegativeBatch {
  std::vector<Query> negatives;
  // fell_back[i] is set when the hist/ind pool for positive i was empty and
  // a random destination was drawn instead.
  std::vector<bool> fell_back;
  size_t fallback_count = 0;
};

// Time-aware negative pools over a split log.
//   rnd:  destinations uniform over the active nodes, excluding the true v.
//   hist: directed pairs from training events whose first occurrence is
//         before the query time.
//   ind:  directed pairs first seen in val/test events before the query
//         time whose endpoints never interacted during training.
// hist and ind never return the positive pair itself.
class NegativeSampler {
 public:
  NegativeSampler(const TemporalGraph& graph, const SplitSpec& split);

  NegativeBatch Sample(std::span<const Query> positives, NegStrategy strategy,
                       uint64_t seed) const;

  const std::vector<NodeId>& nodes() const { return nodes_; }
  // Unordered membership in the training edge set.
  bool IsTrainEdge(NodeId a, NodeId b) const;
  size_t PoolSize(NegStrategy strategy, double t) const;

 private:
  struct Pool {
    std::vector<std::pair<NodeId, NodeId>> pairs;  // ordered by first time
    std::vector<double> first_t;
    size_t CountBefore(double t) const;
  };

  static uint64_t PairKey(NodeId a, NodeId b);
  const Pool& PoolFor(NegStrategy strategy) const;

  std::vector<NodeId> nodes_;
  std::unordered_set<uint64_t> train_edges_;
  Pool hist_;
  Pool ind_;
};

}  // namespace g2v

#endif  // G2V_NEGATIVE_SAMPLING_HPP_
