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

#include "g2v/model.hpp"

#include <cmath>
#include <cstdio>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {

void ModelConfig::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidValue, "model config: " + what);
  };
  if (node_input_dim < 1 || node_dim < 1 || d_vid < 1) fail("dimensions must be positive");
  if (backbone_hidden < 1 || ffn_hidden < 1 || fusion_mlp_hidden < 1 || predictor_hidden < 1) {
    fail("hidden widths must be positive");
  }
  if (!trainable_backbone && node_input_dim != node_dim) {
    fail("a fixed backbone must emit node_dim features");
  }
  if (fusion_heads < 1 || node_dim % fusion_heads != 0) {
    fail("node_dim must be divisible by fusion_heads");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
  if (gate == GateMode::kLearnable && (alpha <= 0.0 || alpha >= 1.0)) {
    fail("a learnable gate needs alpha strictly inside (0, 1)");
  }
}

std::string ModelConfig::CanonicalString() const {
  char alpha_buf[32];
  std::snprintf(alpha_buf, sizeof(alpha_buf), "%.17g", alpha);
  return "g2v-model/1;in=" + std::to_string(node_input_dim) +
         ";trainable=" + std::to_string(trainable_backbone) +
         ";bh=" + std::to_string(backbone_hidden) + ";d=" + std::to_string(node_dim) +
         ";d_vid=" + std::to_string(d_vid) + ";fusion=" + std::string(FusionStrategyName(fusion)) +
         ";heads=" + std::to_string(fusion_heads) + ";ffn=" + std::to_string(ffn_hidden) +
         ";fmlp=" + std::to_string(fusion_mlp_hidden) +
         ";ph=" + std::to_string(predictor_hidden) + ";alpha=" + alpha_buf +
         ";gate=" + std::string(GateModeName(gate)) + ";seed=" + std::to_string(seed);
}

template <typename T>
template <typename Self, typename Fn>
void LinkModel<T>::Visit(Self& self, const Fn& fn) {
  const ModelConfig& c = self.config_;
  if (c.trainable_backbone) {
    fn("backbone.W_1", self.backbone.w1);
    fn("backbone.b_1", self.backbone.b1);
    fn("backbone.W_2", self.backbone.w2);
    fn("backbone.b_2", self.backbone.b2);
  }
  fn("fusion.W_u", self.fusion.w_u);
  fn("fusion.W_v", self.fusion.w_v);
  switch (c.fusion) {
    case FusionStrategy::kNone:
      break;
    case FusionStrategy::kAttention: {
      auto& a = self.fusion.attention;
      fn("fusion.W_f", self.fusion.w_f);
      fn("fusion.attn.W_q", a.wq);
      fn("fusion.attn.b_q", a.bq);
      fn("fusion.attn.W_k", a.wk);
      fn("fusion.attn.b_k", a.bk);
      fn("fusion.attn.W_v", a.wv);
      fn("fusion.attn.b_v", a.bv);
      fn("fusion.attn.W_o", a.wo);
      fn("fusion.attn.b_o", a.bo);
      fn("fusion.attn.ffn.W_1", a.ffn_w1);
      fn("fusion.attn.ffn.b_1", a.ffn_b1);
      fn("fusion.attn.ffn.W_2", a.ffn_w2);
      fn("fusion.attn.ffn.b_2", a.ffn_b2);
      if (c.gate == GateMode::kLearnable) fn("fusion.attn.theta", a.theta);
      break;
    }
    case FusionStrategy::kBilinear:
      fn("fusion.W_f", self.fusion.w_f);
      fn("fusion.bilinear.W", self.fusion.bilinear.w);
      fn("fusion.bilinear.b", self.fusion.bilinear.b);
      break;
    case FusionStrategy::kMlp:
      fn("fusion.W_f", self.fusion.w_f);
      fn("fusion.mlp.W_1", self.fusion.mlp.w1);
      fn("fusion.mlp.b_1", self.fusion.mlp.b1);
      fn("fusion.mlp.W_2", self.fusion.mlp.w2);
      fn("fusion.mlp.b_2", self.fusion.mlp.b2);
      break;
  }
  fn("predictor.W_1", self.predictor.w1);
  fn("predictor.b_1", self.predictor.b1);
  fn("predictor.W_2", self.predictor.w2);
  fn("predictor.b_2", self.predictor.b2);
}

template <typename T>
LinkModel<T>::LinkModel(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const Eigen::Index d = config_.node_dim;
  const auto shape = [](Param<T>& p, Eigen::Index rows, Eigen::Index cols) {
    p.value.setZero(rows, cols);
    p.grad.setZero(rows, cols);
  };
  shape(backbone.w1, config_.backbone_hidden, config_.node_input_dim);
  shape(backbone.b1, config_.backbone_hidden, 1);
  shape(backbone.w2, d, config_.backbone_hidden);
  shape(backbone.b2, d, 1);
  fusion.strategy = config_.fusion;
  fusion.gate_mode = config_.gate;
  fusion.alpha_fixed = static_cast<T>(config_.alpha);
  fusion.heads = config_.fusion_heads;
  shape(fusion.w_u, d, config_.trainable_backbone ? d : config_.node_input_dim);
  shape(fusion.w_v, d, config_.trainable_backbone ? d : config_.node_input_dim);
  shape(fusion.w_f, d, config_.d_vid);
  auto& a = fusion.attention;
  for (Param<T>* w : {&a.wq, &a.wk, &a.wv, &a.wo}) shape(*w, d, d);
  for (Param<T>* b : {&a.bq, &a.bk, &a.bv, &a.bo}) shape(*b, d, 1);
  shape(a.ffn_w1, config_.ffn_hidden, d);
  shape(a.ffn_b1, config_.ffn_hidden, 1);
  shape(a.ffn_w2, d, config_.ffn_hidden);
  shape(a.ffn_b2, d, 1);
  shape(a.theta, 1, 1);
  shape(fusion.bilinear.w, d, d * d);
  shape(fusion.bilinear.b, d, 1);
  shape(fusion.mlp.w1, config_.fusion_mlp_hidden, 2 * d);
  shape(fusion.mlp.b1, config_.fusion_mlp_hidden, 1);
  shape(fusion.mlp.w2, d, config_.fusion_mlp_hidden);
  shape(fusion.mlp.b2, d, 1);
  shape(predictor.w1, config_.predictor_hidden, 2 * d);
  shape(predictor.b1, config_.predictor_hidden, 1);
  shape(predictor.w2, 1, config_.predictor_hidden);
  shape(predictor.b2, 1, 1);

  ForEachParam([&](const std::string& name, Param<T>& p) {
    if (name == "fusion.attn.theta") {
      p.value(0, 0) = static_cast<T>(std::log(config_.alpha / (1.0 - config_.alpha)));
      return;
    }
    if (p.value.cols() == 1) return;  // biases start at zero
    const double fan_in = static_cast<double>(p.value.cols());
    const double fan_out = static_cast<double>(p.value.rows());
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(MixSeed(config_.seed, Fnv1a64(name)));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        p.value(r, c) = static_cast<T>(rng.UniformSymmetric(bound));
      }
    }
  });
}

template <typename T>
void LinkModel<T>::ForEachParam(const ParamVisitor& fn) {
  Visit(*this, fn);
}

template <typename T>
void LinkModel<T>::ForEachParam(const ConstParamVisitor& fn) const {
  Visit(*this, fn);
}

template <typename T>
Param<T>* LinkModel<T>::FindParam(const std::string& name) {
  Param<T>* found = nullptr;
  ForEachParam([&](const std::string& n, Param<T>& p) {
    if (n == name) found = &p;
  });
  return found;
}

template <typename T>
size_t LinkModel<T>::NumScalars() const {
  size_t n = 0;
  ForEachParam([&](const std::string&, const Param<T>& p) { n += static_cast<size_t>(p.size()); });
  return n;
}

template <typename T>
void LinkModel<T>::ZeroGrads() {
  ForEachParam([](const std::string&, Param<T>& p) { p.ZeroGrad(); });
}

template <typename T>
typename LinkModel<T>::Id LinkModel<T>::NodeState(Tape<T>& tape, std::span<const float> input) {
  if (static_cast<int>(input.size()) != config_.node_input_dim) {
    throw Error(ErrorKind::kShapeMismatch,
                "node input width " + std::to_string(input.size()) + ", expected " +
                    std::to_string(config_.node_input_dim));
  }
  Vec<T> in(static_cast<Eigen::Index>(input.size()));
  for (size_t i = 0; i < input.size(); ++i) in(static_cast<Eigen::Index>(i)) = input[i];
  const Id x = tape.Constant(std::move(in));
  return config_.trainable_backbone ? backbone.Forward(tape, x) : x;
}

template <typename T>
typename LinkModel<T>::Id LinkModel<T>::Probability(Tape<T>& tape, const SampleInput& sample) {
  const Id h_u = NodeState(tape, sample.node_u);
  const Id h_v = NodeState(tape, sample.node_v);
  Id f = -1;
  if (config_.fusion != FusionStrategy::kNone) {
    if (static_cast<int>(sample.video.size()) != config_.d_vid) {
      throw Error(ErrorKind::kShapeMismatch, "video embedding width " +
                                                 std::to_string(sample.video.size()));
    }
    Vec<T> video(config_.d_vid);
    for (int i = 0; i < config_.d_vid; ++i) video(i) = sample.video[i];
    f = tape.Constant(std::move(video));
  }
  const auto projected = fusion.Project(tape, h_u, h_v, f);
  const Id y_u = fusion.Fuse(tape, projected.h_u, projected.f);
  const Id y_v = fusion.Fuse(tape, projected.h_v, projected.f);
  return predictor.Probability(tape, y_u, y_v);
}

template <typename T>
double LinkModel<T>::Score(const SampleInput& sample) {
  Tape<T> tape;
  return static_cast<double>(tape.value(Probability(tape, sample))(0));
}

template <typename T>
double LinkModel<T>::Loss(std::span<const SampleInput> batch, bool with_grads,
                          uint64_t* branch_signature) {
  if (with_grads) ZeroGrads();
  if (branch_signature != nullptr) *branch_signature = 0;
  if (batch.empty()) return 0.0;
  const T weight = T(1) / static_cast<T>(batch.size());
  double total = 0.0;
  for (const SampleInput& sample : batch) {
    Tape<T> tape;
    const Id loss = tape.Bce(Probability(tape, sample), static_cast<T>(sample.label));
    total += static_cast<double>(tape.value(loss)(0));
    if (branch_signature != nullptr) {
      *branch_signature = MixSeed(*branch_signature, tape.branch_signature());
    }
    if (with_grads) tape.Backward(loss, weight);
  }
  return total / static_cast<double>(batch.size());
}

template class LinkModel<float>;
template class LinkModel<double>;

}  // namespace g2v
