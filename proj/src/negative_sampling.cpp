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

#include "g2v/negative_sampling.hpp"

#include <algorithm>
#include <unordered_map>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {

std::string_view NegStrategyName(NegStrategy s) {
  switch (s) {
    case NegStrategy::kRandom: return "rnd";
    case NegStrategy::kHistorical: return "hist";
    case NegStrategy::kInductive: return "ind";
  }
  return "?";
}

NegStrategy ParseNegStrategy(std::string_view name) {
  if (name == "rnd") return NegStrategy::kRandom;
  if (name == "hist") return NegStrategy::kHistorical;
  if (name == "ind") return NegStrategy::kInductive;
  throw Error(ErrorKind::kInvalidValue, "strategy: " + std::string(name));
}

uint64_t NegativeSampler::PairKey(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return MixSeed(a, b);
}

size_t NegativeSampler::Pool::CountBefore(double t) const {
  return static_cast<size_t>(std::lower_bound(first_t.begin(), first_t.end(), t) -
                             first_t.begin());
}

NegativeSampler::NegativeSampler(const TemporalGraph& graph, const SplitSpec& split)
    : nodes_(graph.ActiveNodes()) {
  const auto events = graph.events();
  std::unordered_map<uint64_t, size_t> seen;
  // Directed pairs are tracked separately from the unordered edge set.
  const auto directed = [](NodeId a, NodeId b) { return MixSeed(MixSeed(a, 0x5eed), b); };
  for (size_t i = 0; i < split.train_end_idx && i < events.size(); ++i) {
    const Event& e = events[i];
    train_edges_.insert(PairKey(e.src, e.dst));
    if (seen.emplace(directed(e.src, e.dst), i).second) {
      hist_.pairs.emplace_back(e.src, e.dst);
      hist_.first_t.push_back(e.t);
    }
  }
  for (size_t i = split.train_end_idx; i < events.size(); ++i) {
    const Event& e = events[i];
    if (train_edges_.count(PairKey(e.src, e.dst)) != 0) continue;
    if (seen.emplace(directed(e.src, e.dst), i).second) {
      ind_.pairs.emplace_back(e.src, e.dst);
      ind_.first_t.push_back(e.t);
    }
  }
}

bool NegativeSampler::IsTrainEdge(NodeId a, NodeId b) const {
  return train_edges_.count(PairKey(a, b)) != 0;
}

const NegativeSampler::Pool& NegativeSampler::PoolFor(NegStrategy strategy) const {
  return strategy == NegStrategy::kHistorical ? hist_ : ind_;
}

size_t NegativeSampler::PoolSize(NegStrategy strategy, double t) const {
  if (strategy == NegStrategy::kRandom) return nodes_.size();
  return PoolFor(strategy).CountBefore(t);
}

NodeId UniformExcluding(std::span<const NodeId> nodes, NodeId exclude, Rng& rng) {
  if (nodes.empty()) throw Error(ErrorKind::kEmptyEvalSet, "no nodes to sample from");
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), exclude);
  const bool present = it != nodes.end() && *it == exclude;
  if (!present) return nodes[rng.UniformIndex(nodes.size())];
  if (nodes.size() == 1) return nodes[0];
  const auto pos = static_cast<size_t>(it - nodes.begin());
  size_t idx = rng.UniformIndex(nodes.size() - 1);
  if (idx >= pos) ++idx;
  return nodes[idx];
}

NegativeBatch NegativeSampler::Sample(std::span<const Query> positives, NegStrategy strategy,
                                      uint64_t seed) const {
  Rng rng(seed);
  NegativeBatch out;
  out.negatives.reserve(positives.size());
  out.fell_back.assign(positives.size(), false);
  for (size_t i = 0; i < positives.size(); ++i) {
    const Query& q = positives[i];
    if (strategy != NegStrategy::kRandom) {
      const Pool& pool = PoolFor(strategy);
      const size_t n = pool.CountBefore(q.t);
      const std::pair<NodeId, NodeId> positive{q.u, q.v};
      size_t usable = n;
      // A pair occurs once per pool, so at most one entry equals the positive.
      for (size_t j = 0; j < n && usable == n; ++j) {
        if (pool.pairs[j] == positive) usable = n - 1;
      }
      if (usable > 0) {
        for (;;) {
          const auto& pair = pool.pairs[rng.UniformIndex(n)];
          if (pair != positive) {
            out.negatives.push_back({pair.first, pair.second, q.t});
            break;
          }
        }
        continue;
      }
      out.fell_back[i] = true;
      ++out.fallback_count;
    }
    out.negatives.push_back({q.u, UniformExcluding(nodes_, q.v, rng), q.t});
  }
  return out;
}

}  // namespace g2v
