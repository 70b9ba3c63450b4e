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

#ifndef G2V_FUSION_HPP_
#define G2V_FUSION_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "g2v/error.hpp"
#include "g2v/tape.hpp"

namespace g2v {

// kNone is the no-fusion baseline: the fused embedding is the projected
// node state and the video branch is never consulted.
enum class FusionStrategy { kNone, kAttention, kBilinear, kMlp };
enum class GateMode { kFixed, kLearnable };

std::string_view FusionStrategyName(FusionStrategy s);
FusionStrategy ParseFusionStrategy(std::string_view name);
std::string_view GateModeName(GateMode m);
GateMode ParseGateMode(std::string_view name);

inline constexpr double kProbClamp = 1e-7;

template <typename T>
struct AttentionFusionParams {
  Param<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Param<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Param<T> theta;  // gate logit, learnable mode only
};

template <typename T>
struct BilinearFusionParams {
  // Row k is slice W_k flattened row-major: w(k, i * d + j) = W_k[i][j].
  Param<T> w;
  Param<T> b;
};

template <typename T>
struct MlpFusionParams {
  Param<T> w1, b1, w2, b2;
};

template <typename T>
struct FusionParams {
  using Id = typename Tape<T>::Id;

  FusionStrategy strategy = FusionStrategy::kAttention;
  GateMode gate_mode = GateMode::kFixed;
  T alpha_fixed = T(0.01);
  int heads = 4;

  Param<T> w_u, w_v, w_f;
  AttentionFusionParams<T> attention;
  BilinearFusionParams<T> bilinear;
  MlpFusionParams<T> mlp;

  Eigen::Index dim() const { return w_u.value.rows(); }

  struct Projected {
    Id h_u;
    Id h_v;
    Id f;  // -1 when the strategy ignores video
  };

  // h~_u = W_u h_u, h~_v = W_v h_v, f~ = W_f f.
  Projected Project(Tape<T>& tape, Id h_u, Id h_v, Id f) {
    Check(tape.value(h_u).size() == w_u.value.cols() &&
              tape.value(h_v).size() == w_v.value.cols(),
          "node state width");
    Projected out{tape.MatVec(w_u, h_u), tape.MatVec(w_v, h_v), -1};
    if (strategy != FusionStrategy::kNone) {
      Check(f >= 0 && tape.value(f).size() == w_f.value.cols(), "video embedding width");
      out.f = tape.MatVec(w_f, f);
    }
    return out;
  }

  Id Alpha(Tape<T>& tape) {
    if (gate_mode == GateMode::kLearnable) return tape.Sigmoid(tape.Leaf(attention.theta));
    Vec<T> a(1);
    a(0) = alpha_fixed;
    return tape.Constant(std::move(a));
  }

  T AlphaValue() const {
    if (gate_mode == GateMode::kLearnable) {
      return T(1) / (T(1) + std::exp(-attention.theta.value(0, 0)));
    }
    return alpha_fixed;
  }

  // Fused, video-enhanced embedding for one endpoint.
  Id Fuse(Tape<T>& tape, Id h, Id f) {
    switch (strategy) {
      case FusionStrategy::kNone:
        return h;
      case FusionStrategy::kAttention: {
        auto& a = attention;
        const Id q = tape.Affine(a.wq, h, a.bq);
        const Id k = tape.Affine(a.wk, f, a.bk);
        const Id v = tape.Affine(a.wv, f, a.bv);
        const Id keys[] = {k};
        const Id values[] = {v};
        const Id attended = tape.Affine(a.wo, tape.MultiHeadAttend(q, keys, values, heads), a.bo);
        const Id ffn_hidden = tape.Relu(tape.Affine(a.ffn_w1, attended, a.ffn_b1));
        const Id qx = tape.Affine(a.ffn_w2, ffn_hidden, a.ffn_b2);
        return tape.Gate(h, qx, Alpha(tape));
      }
      case FusionStrategy::kBilinear:
        return tape.Affine(bilinear.w, tape.Kron(h, f), bilinear.b);
      case FusionStrategy::kMlp: {
        const Id hidden = tape.Relu(tape.Affine(mlp.w1, tape.Concat(h, f), mlp.b1));
        return tape.Relu(tape.Affine(mlp.w2, hidden, mlp.b2));
      }
    }
    return h;
  }

 private:
  static void Check(bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kShapeMismatch, std::string("fusion: ") + what);
  }
};

// Decoder g: logit = W_2 relu(W_1 [y_u | y_v] + b_1) + b_2.
template <typename T>
struct PredictorParams {
  using Id = typename Tape<T>::Id;
  Param<T> w1, b1, w2, b2;

  Id Logit(Tape<T>& tape, Id y_u, Id y_v) {
    if (tape.value(y_u).size() + tape.value(y_v).size() != w1.value.cols()) {
      throw Error(ErrorKind::kShapeMismatch, "predictor input width");
    }
    const Id hidden = tape.Relu(tape.Affine(w1, tape.Concat(y_u, y_v), b1));
    return tape.Affine(w2, hidden, b2);
  }

  // sigmoid(g), clamped to [1e-7, 1 - 1e-7].
  Id Probability(Tape<T>& tape, Id y_u, Id y_v) {
    return tape.Clamp(tape.Sigmoid(Logit(tape, y_u, y_v)), T(kProbClamp), T(1 - kProbClamp));
  }
};

template <typename T>
Vec<T> ToVec(const std::vector<T>& v) {
  return Eigen::Map<const Vec<T>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
std::vector<T> ToStd(const Vec<T>& v) {
  return {v.data(), v.data() + v.size()};
}

// Single-call forms of the three fusion steps, for callers that do not need
// gradients.
template <typename T>
struct ProjectedModalities {
  std::vector<T> h_u, h_v, f;
};

template <typename T>
ProjectedModalities<T> ProjectModalities(const std::vector<T>& h_u, const std::vector<T>& h_v,
                                         const std::vector<T>& f, FusionParams<T>& params) {
  Tape<T> tape;
  const auto in_f = params.strategy == FusionStrategy::kNone ? -1 : tape.Constant(ToVec(f));
  const auto p = params.Project(tape, tape.Constant(ToVec(h_u)), tape.Constant(ToVec(h_v)), in_f);
  ProjectedModalities<T> out{ToStd<T>(tape.value(p.h_u)), ToStd<T>(tape.value(p.h_v)), {}};
  if (p.f >= 0) out.f = ToStd<T>(tape.value(p.f));
  return out;
}

template <typename T>
std::vector<T> Fuse(const std::vector<T>& h_tilde, const std::vector<T>& f_tilde,
                    FusionParams<T>& params) {
  if (static_cast<Eigen::Index>(h_tilde.size()) != params.dim() ||
      (params.strategy != FusionStrategy::kNone &&
       static_cast<Eigen::Index>(f_tilde.size()) != params.dim())) {
    throw Error(ErrorKind::kShapeMismatch, "fusion input width");
  }
  Tape<T> tape;
  const auto h = tape.Constant(ToVec(h_tilde));
  const auto f = tape.Constant(ToVec(f_tilde));
  return ToStd<T>(tape.value(params.Fuse(tape, h, f)));
}

template <typename T>
T PredictLink(const std::vector<T>& y_u, const std::vector<T>& y_v,
              PredictorParams<T>& params) {
  Tape<T> tape;
  const auto p =
      params.Probability(tape, tape.Constant(ToVec(y_u)), tape.Constant(ToVec(y_v)));
  return tape.value(p)(0);
}

}  // namespace g2v

#endif  // G2V_FUSION_HPP_
