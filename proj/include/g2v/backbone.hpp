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

#ifndef G2V_BACKBONE_HPP_
#define G2V_BACKBONE_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "g2v/tape.hpp"
#include "g2v/temporal_graph.hpp"

namespace g2v {

// Fixed cosine time encoding, TE(dt)_i = cos(w_i dt) with
// w_i = 10^(-4 (i-1) / (dim-1)).
class TimeEncoder {
 public:
  explicit TimeEncoder(int dim = 100);

  int dim() const { return static_cast<int>(omega_.size()); }
  double omega(int i) const { return omega_[i]; }

  // Throws Error(kNegativeDelta) for dt < 0.
  std::vector<float> Encode(double delta_t) const;
  void EncodeInto(double delta_t, float* out) const;

 private:
  std::vector<double> omega_;
};

inline constexpr int kDefaultNodeDim = 172;
inline constexpr int kDefaultRecentEvents = 20;

// Mean over the m most recent 1-hop events of x before t of
// [node_feat(neighbor) | edge_feat | TE(t - t')]. Zeros without history.
std::vector<float> MeanMessage(NodeId x, double t, const TemporalGraph& graph,
                               const NeighborIndex& index, const TimeEncoder& time,
                               int recent_events = kDefaultRecentEvents);

// Backbone plug point. An encoder maps (node, time, history) to a feature
// vector. When `trainable_head()` is true the vector feeds the reference
// two-layer head (see BackboneParams); otherwise it is used as the node
// state directly and receives no gradient.
class DynamicEncoder {
 public:
  virtual ~DynamicEncoder() = default;
  virtual std::string name() const = 0;
  virtual int output_dim() const = 0;
  virtual bool trainable_head() const = 0;
  virtual std::vector<float> Features(NodeId x, double t, const TemporalGraph& graph,
                                      const NeighborIndex& index) const = 0;
};

struct EncoderSpec {
  int time_dim = 100;
  int recent_events = kDefaultRecentEvents;
  int node_dim = kDefaultNodeDim;
};

using EncoderFactory =
    std::function<std::unique_ptr<DynamicEncoder>(const TemporalGraph&, const EncoderSpec&)>;

// Built-ins: "mean-mlp" (the reference encoder: MeanMessage into the
// trainable head) and "zero" (all-zero node states, for video-only runs).
void RegisterDynamicEncoder(const std::string& name, EncoderFactory factory);
std::unique_ptr<DynamicEncoder> CreateDynamicEncoder(const std::string& name,
                                                     const TemporalGraph& graph,
                                                     const EncoderSpec& spec);
std::vector<std::string> RegisteredDynamicEncoders();

// h = W_2 relu(W_1 m + b_1) + b_2.
template <typename T>
struct BackboneParams {
  Param<T> w1, b1, w2, b2;

  typename Tape<T>::Id Forward(Tape<T>& tape, typename Tape<T>::Id message) {
    const auto hidden = tape.Relu(tape.Affine(w1, message, b1));
    return tape.Affine(w2, hidden, b2);
  }
};

// Full node state for x at t under the reference encoder and `params`.
std::vector<float> NodeState(NodeId x, double t, const TemporalGraph& graph,
                             const NeighborIndex& index, const TimeEncoder& time,
                             BackboneParams<float>& params,
                             int recent_events = kDefaultRecentEvents);

}  // namespace g2v

#endif  // G2V_BACKBONE_HPP_
