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

#ifndef G2V_MODEL_HPP_
#define G2V_MODEL_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "g2v/backbone.hpp"
#include "g2v/fusion.hpp"
#include "g2v/tape.hpp"

namespace g2v {

struct ModelConfig {
  // Width of the vectors handed to the model as node inputs. For a
  // trainable head this is the message width; otherwise it must equal
  // node_dim.
  int node_input_dim = 100;
  bool trainable_backbone = true;
  int backbone_hidden = kDefaultNodeDim;
  int node_dim = kDefaultNodeDim;
  int d_vid = 128;
  FusionStrategy fusion = FusionStrategy::kAttention;
  int fusion_heads = 4;
  int ffn_hidden = kDefaultNodeDim;
  int fusion_mlp_hidden = kDefaultNodeDim;
  int predictor_hidden = kDefaultNodeDim;
  double alpha = 0.01;
  GateMode gate = GateMode::kFixed;
  uint64_t seed = 0;

  void Validate() const;
  std::string CanonicalString() const;
};

// Everything the model needs to score one (u, v, t) query: backbone inputs
// for both endpoints, the frozen link embedding, and the label.
struct SampleInput {
  std::vector<float> node_u;
  std::vector<float> node_v;
  std::vector<float> video;
  float label = 0.0f;
};

// Backbone head + fusion + edge predictor with named parameters. Parameters
// whose name starts with "fusion." form the video branch.
template <typename T>
class LinkModel {
 public:
  using Id = typename Tape<T>::Id;
  using ParamVisitor = std::function<void(const std::string&, Param<T>&)>;
  using ConstParamVisitor = std::function<void(const std::string&, const Param<T>&)>;

  // Weights ~ uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)), seeded per
  // parameter name so configurations that share a parameter share its
  // initial value. Biases start at zero; the gate logit at logit(alpha).
  explicit LinkModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // Visits active parameters in a fixed order.
  void ForEachParam(const ParamVisitor& fn);
  void ForEachParam(const ConstParamVisitor& fn) const;
  Param<T>* FindParam(const std::string& name);
  size_t NumScalars() const;

  static bool IsVideoBranch(const std::string& name) { return name.rfind("fusion.", 0) == 0; }

  template <typename U>
  LinkModel<U> Cast() const {
    LinkModel<U> out(config_);
    std::vector<const Param<T>*> src;
    ForEachParam([&](const std::string&, const Param<T>& p) { src.push_back(&p); });
    size_t i = 0;
    out.ForEachParam([&](const std::string&, Param<U>& p) {
      p.value = src[i++]->value.template cast<U>();
      p.ZeroGrad();
    });
    return out;
  }

  Id NodeState(Tape<T>& tape, std::span<const float> input);
  // Clamped link probability node.
  Id Probability(Tape<T>& tape, const SampleInput& sample);

  double Score(const SampleInput& sample);
  // Mean BCE over the batch. With `with_grads`, gradients of that mean are
  // written to every parameter (previous gradients are discarded).
  // `branch_signature` receives a hash of all ReLU/clamp branches taken.
  double Loss(std::span<const SampleInput> batch, bool with_grads,
              uint64_t* branch_signature = nullptr);
  void ZeroGrads();

  BackboneParams<T> backbone;
  FusionParams<T> fusion;
  PredictorParams<T> predictor;

 private:
  template <typename Self, typename Fn>
  static void Visit(Self& self, const Fn& fn);

  ModelConfig config_;
};

extern template class LinkModel<float>;
extern template class LinkModel<double>;

}  // namespace g2v

#endif  // G2V_MODEL_HPP_
