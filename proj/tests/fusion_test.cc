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

#include "g2v/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "g2v/error.hpp"
#include "g2v/model.hpp"
#include "test_util.hpp"

namespace g2v {
namespace {

using V = std::vector<double>;

ModelConfig SmallConfig(int d, int d_vid, FusionStrategy s, int heads = 1) {
  ModelConfig c;
  c.node_input_dim = d;
  c.backbone_hidden = 4;
  c.node_dim = d;
  c.d_vid = d_vid;
  c.fusion = s;
  c.fusion_heads = heads;
  c.ffn_hidden = 5;
  c.fusion_mlp_hidden = 5;
  c.predictor_hidden = 5;
  c.alpha = 0.3;
  return c;
}

template <typename T>
void Randomize(LinkModel<T>& m, uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  m.ForEachParam([&](const std::string&, Param<T>& p) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<T>(u(gen));
  });
}

V RandomVec(int n, std::mt19937& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  V v(n);
  for (double& x : v) x = u(gen);
  return v;
}

// y = W x + b with W taken row by row.
template <typename T>
V Affine(const Param<T>& w, const V& x, const Param<T>* b = nullptr) {
  V y(w.value.rows(), 0.0);
  for (Eigen::Index i = 0; i < w.value.rows(); ++i) {
    double s = b ? double{b->value(i, 0)} : 0.0;
    for (Eigen::Index j = 0; j < w.value.cols(); ++j) s += double{w.value(i, j)} * x[j];
    y[i] = s;
  }
  return y;
}

V Relu(V x) {
  for (double& e : x) e = std::max(0.0, e);
  return x;
}

V Cat(const V& a, const V& b) {
  V out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Independent reading of the three fusion rules.
V FuseOracle(const FusionParams<double>& p, const V& h, const V& f) {
  const size_t d = h.size();
  switch (p.strategy) {
    case FusionStrategy::kNone:
      return h;
    case FusionStrategy::kAttention: {
      const auto& a = p.attention;
      const V q = Affine(a.wq, h, &a.bq);
      const V k = Affine(a.wk, f, &a.bk);
      const V v = Affine(a.wv, f, &a.bv);
      const size_t dh = d / p.heads;
      V att(d, 0.0);
      for (int head = 0; head < p.heads; ++head) {
        double score = 0.0;
        for (size_t c = 0; c < dh; ++c) score += q[head * dh + c] * k[head * dh + c];
        score /= std::sqrt(static_cast<double>(dh));
        const double weight = std::exp(score - score);  // softmax over one key
        for (size_t c = 0; c < dh; ++c) att[head * dh + c] = weight * v[head * dh + c];
      }
      const V o = Affine(a.wo, att, &a.bo);
      const V qx = Affine(a.ffn_w2, Relu(Affine(a.ffn_w1, o, &a.ffn_b1)), &a.ffn_b2);
      const double alpha = p.gate_mode == GateMode::kLearnable
                               ? 1.0 / (1.0 + std::exp(-a.theta.value(0, 0)))
                               : p.alpha_fixed;
      V y(d);
      for (size_t i = 0; i < d; ++i) y[i] = (1 - alpha) * h[i] + alpha * qx[i];
      return y;
    }
    case FusionStrategy::kBilinear: {
      V y(d);
      for (size_t k = 0; k < d; ++k) {
        double s = p.bilinear.b.value(k, 0);
        for (size_t i = 0; i < d; ++i) {
          for (size_t j = 0; j < d; ++j) s += h[i] * p.bilinear.w.value(k, i * d + j) * f[j];
        }
        y[k] = s;
      }
      return y;
    }
    case FusionStrategy::kMlp: {
      const auto& m = p.mlp;
      return Relu(Affine(m.w2, Relu(Affine(m.w1, Cat(h, f), &m.b1)), &m.b2));
    }
  }
  return h;
}

double PredictOracle(const PredictorParams<double>& p, const V& yu, const V& yv) {
  const double logit = Affine(p.w2, Relu(Affine(p.w1, Cat(yu, yv), &p.b1)), &p.b2)[0];
  const double prob = 1.0 / (1.0 + std::exp(-logit));
  return std::clamp(prob, 1e-7, 1 - 1e-7);
}

double RelErr(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

TEST(FusionNames, RoundTrip) {
  for (auto s : {FusionStrategy::kNone, FusionStrategy::kAttention, FusionStrategy::kBilinear,
                 FusionStrategy::kMlp}) {
    EXPECT_EQ(ParseFusionStrategy(FusionStrategyName(s)), s);
  }
  EXPECT_EQ(ParseGateMode("learnable"), GateMode::kLearnable);
  EXPECT_EQ(ParseGateMode(GateModeName(GateMode::kFixed)), GateMode::kFixed);
  EXPECT_EQ(KindOf([] { ParseFusionStrategy("concat"); }), ErrorKind::kInvalidValue);
}

TEST(ProjectModalities, IdentityAndZeroVideo) {
  LinkModel<double> m(SmallConfig(3, 4, FusionStrategy::kAttention));
  Randomize(m, 1);
  m.fusion.w_u.value.setIdentity();
  const V h_u = {0.5, -2.0, 3.25};
  const V h_v = {1.0, 1.0, 1.0};
  const auto p = ProjectModalities(h_u, h_v, V(4, 0.0), m.fusion);
  EXPECT_EQ(p.h_u, h_u);
  EXPECT_EQ(p.f, V(3, 0.0));
}

TEST(ProjectModalities, HandMatMul) {
  LinkModel<double> m(SmallConfig(2, 3, FusionStrategy::kMlp));
  m.fusion.w_u.value << 1, 2, 3, 4;
  m.fusion.w_v.value << 0, 1, -1, 0;
  m.fusion.w_f.value << 1, 0, 2, -1, 3, 0.5;
  const auto p = ProjectModalities<double>({1, -1}, {2, 5}, {1, 2, 4}, m.fusion);
  EXPECT_EQ(p.h_u, (V{-1, -1}));
  EXPECT_EQ(p.h_v, (V{5, -2}));
  EXPECT_EQ(p.f, (V{9, 7}));
}

TEST(ProjectModalities, ShapeMismatch) {
  LinkModel<double> m(SmallConfig(2, 3, FusionStrategy::kMlp));
  EXPECT_EQ(KindOf([&] { ProjectModalities<double>({1, 2, 3}, {1, 2}, {1, 2, 3}, m.fusion); }),
            ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { ProjectModalities<double>({1, 2}, {1, 2}, {1, 2}, m.fusion); }),
            ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { Fuse<double>({1, 2}, {1}, m.fusion); }), ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { PredictLink<double>({1, 2}, {1}, m.predictor); }),
            ErrorKind::kShapeMismatch);
}

TEST(Fuse, AttentionClosedGateIsIdentity) {
  std::mt19937 gen(5);
  LinkModel<float> m(SmallConfig(8, 6, FusionStrategy::kAttention, 4));
  Randomize(m, 2);
  m.fusion.alpha_fixed = 0.0f;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<float> h, f;
    for (double x : RandomVec(8, gen)) h.push_back(static_cast<float>(x * 10));
    for (double x : RandomVec(8, gen)) f.push_back(static_cast<float>(x * 10));
    EXPECT_EQ(Fuse(h, f, m.fusion), h);
  }
}

TEST(Fuse, AttentionAffineInAlpha) {
  std::mt19937 gen(6);
  LinkModel<float> m(SmallConfig(8, 6, FusionStrategy::kAttention, 2));
  Randomize(m, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> h, f;
    for (double x : RandomVec(8, gen)) h.push_back(static_cast<float>(x));
    for (double x : RandomVec(8, gen)) f.push_back(static_cast<float>(x));
    m.fusion.alpha_fixed = 0.0f;
    const auto y0 = Fuse(h, f, m.fusion);
    m.fusion.alpha_fixed = 1.0f;
    const auto y1 = Fuse(h, f, m.fusion);
    const float alpha = std::uniform_real_distribution<float>(0, 1)(gen);
    m.fusion.alpha_fixed = alpha;
    const auto ya = Fuse(h, f, m.fusion);
    for (size_t i = 0; i < h.size(); ++i) {
      EXPECT_NEAR(ya[i], (1 - alpha) * y0[i] + alpha * y1[i],
                  1e-5f * std::max(1.0f, std::fabs(ya[i])));
    }
  }
}

TEST(Fuse, LearnableGateStartsAtConfiguredAlpha) {
  ModelConfig c = SmallConfig(4, 4, FusionStrategy::kAttention, 2);
  c.gate = GateMode::kLearnable;
  c.alpha = 0.02;
  LinkModel<double> m(c);
  EXPECT_NEAR(m.fusion.AlphaValue(), 0.02, 1e-12);
  EXPECT_NE(m.FindParam("fusion.attn.theta"), nullptr);
  EXPECT_EQ(LinkModel<double>(SmallConfig(4, 4, FusionStrategy::kAttention, 2))
                .FindParam("fusion.attn.theta"),
            nullptr);
}

TEST(Fuse, BilinearScalarCase) {
  LinkModel<double> m(SmallConfig(1, 1, FusionStrategy::kBilinear));
  m.fusion.bilinear.w.value(0, 0) = 1.5;
  m.fusion.bilinear.b.value(0, 0) = -0.25;
  EXPECT_EQ(Fuse<double>({2.0}, {3.0}, m.fusion), V{2.0 * 1.5 * 3.0 - 0.25});
}

TEST(Fuse, BilinearZeroVideoGivesBias) {
  std::mt19937 gen(7);
  LinkModel<float> m(SmallConfig(5, 3, FusionStrategy::kBilinear));
  Randomize(m, 4);
  std::vector<float> bias(m.fusion.bilinear.b.value.data(),
                          m.fusion.bilinear.b.value.data() + 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> h;
    for (double x : RandomVec(5, gen)) h.push_back(static_cast<float>(x));
    EXPECT_EQ(Fuse(h, std::vector<float>(5, 0.0f), m.fusion), bias);
  }
}

TEST(Fuse, MlpZeroWeights) {
  LinkModel<double> m(SmallConfig(3, 3, FusionStrategy::kMlp));
  m.fusion.mlp.w1.value.setZero();
  m.fusion.mlp.w2.value.setZero();
  m.fusion.mlp.b2.value << 0.5, 0.0, 2.0;
  EXPECT_EQ(Fuse<double>({1, 2, 3}, {4, 5, 6}, m.fusion), (V{0.5, 0.0, 2.0}));
  m.fusion.mlp.b2.value << -1.0, 0.0, 2.0;
  EXPECT_EQ(Fuse<double>({1, 2, 3}, {4, 5, 6}, m.fusion), (V{0.0, 0.0, 2.0}));
}

TEST(Fuse, NoneIgnoresVideo) {
  LinkModel<double> m(SmallConfig(3, 3, FusionStrategy::kNone));
  EXPECT_EQ(Fuse<double>({1, 2, 3}, {}, m.fusion), (V{1, 2, 3}));
}

TEST(Fuse, AllStrategiesMatchDoubleOracle) {
  struct Case {
    FusionStrategy s;
    int d;
    int heads;
    GateMode gate;
  };
  const Case cases[] = {
      {FusionStrategy::kAttention, 3, 1, GateMode::kFixed},
      {FusionStrategy::kAttention, 4, 2, GateMode::kLearnable},
      {FusionStrategy::kBilinear, 3, 1, GateMode::kFixed},
      {FusionStrategy::kMlp, 3, 1, GateMode::kFixed},
  };
  for (const Case& c : cases) {
    ModelConfig config = SmallConfig(c.d, 5, c.s, c.heads);
    config.gate = c.gate;
    for (uint32_t trial = 0; trial < 100; ++trial) {
      std::mt19937 gen(trial);
      LinkModel<double> m(config);
      Randomize(m, 1000 + trial);
      const V h_u = RandomVec(c.d, gen), h_v = RandomVec(c.d, gen), f = RandomVec(5, gen);
      const auto p = ProjectModalities(h_u, h_v, f, m.fusion);
      const V want_hu = Affine(m.fusion.w_u, h_u);
      const V want_f = Affine(m.fusion.w_f, f);
      const V y_u = Fuse(p.h_u, p.f, m.fusion);
      const V want_y = FuseOracle(m.fusion, want_hu, want_f);
      for (int i = 0; i < c.d; ++i) {
        ASSERT_LE(RelErr(p.h_u[i], want_hu[i]), 1e-6);
        ASSERT_LE(RelErr(y_u[i], want_y[i]), 1e-6)
            << FusionStrategyName(c.s) << " trial " << trial;
      }
      const V y_v = Fuse(p.h_v, p.f, m.fusion);
      ASSERT_LE(RelErr(PredictLink(y_u, y_v, m.predictor), PredictOracle(m.predictor, y_u, y_v)),
                1e-6);
    }
  }
}

TEST(PredictLink, ZeroDecoderIsHalf) {
  LinkModel<double> m(SmallConfig(3, 3, FusionStrategy::kMlp));
  m.predictor.w2.value.setZero();
  EXPECT_EQ(PredictLink<double>({1, 2, 3}, {4, 5, 6}, m.predictor), 0.5);
}

TEST(PredictLink, ClampsSaturatedLogits) {
  LinkModel<double> m(SmallConfig(3, 3, FusionStrategy::kMlp));
  m.predictor.w2.value.setZero();
  m.predictor.b2.value(0, 0) = 20.0;
  EXPECT_EQ(PredictLink<double>({0, 0, 0}, {0, 0, 0}, m.predictor), 1 - 1e-7);
  m.predictor.b2.value(0, 0) = -20.0;
  EXPECT_EQ(PredictLink<double>({0, 0, 0}, {0, 0, 0}, m.predictor), 1e-7);
  LinkModel<float> mf(SmallConfig(3, 3, FusionStrategy::kMlp));
  mf.predictor.w2.value.setZero();
  mf.predictor.b2.value(0, 0) = 20.0f;
  EXPECT_EQ(PredictLink<float>({0, 0, 0}, {0, 0, 0}, mf.predictor), static_cast<float>(1 - 1e-7));
}

TEST(LinkModel, ScoreMatchesComposedOracle) {
  ModelConfig c = SmallConfig(3, 4, FusionStrategy::kBilinear);
  LinkModel<double> m(c);
  Randomize(m, 77);
  SampleInput s{{0.1f, 0.2f, -0.3f}, {0.5f, 0.0f, 1.0f}, {1.0f, -1.0f, 0.5f, 0.25f}, 1.0f};
  const auto head = [&](const std::vector<float>& x) {
    const V in(x.begin(), x.end());
    return Affine(m.backbone.w2, Relu(Affine(m.backbone.w1, in, &m.backbone.b1)),
                  &m.backbone.b2);
  };
  const V f(s.video.begin(), s.video.end());
  const V ft = Affine(m.fusion.w_f, f);
  const V yu = FuseOracle(m.fusion, Affine(m.fusion.w_u, head(s.node_u)), ft);
  const V yv = FuseOracle(m.fusion, Affine(m.fusion.w_v, head(s.node_v)), ft);
  EXPECT_LE(RelErr(m.Score(s), PredictOracle(m.predictor, yu, yv)), 1e-9);
}

TEST(LinkModel, SharedNamesShareInitialValues) {
  LinkModel<float> a(SmallConfig(4, 4, FusionStrategy::kNone));
  LinkModel<float> b(SmallConfig(4, 4, FusionStrategy::kAttention, 2));
  EXPECT_EQ(a.backbone.w1.value, b.backbone.w1.value);
  EXPECT_EQ(a.fusion.w_u.value, b.fusion.w_u.value);
  EXPECT_EQ(a.predictor.w1.value, b.predictor.w1.value);
  EXPECT_NE(a.fusion.w_u.value, a.fusion.w_v.value);
}

TEST(LinkModel, ClosedGateMatchesNoFusion) {
  ModelConfig none = SmallConfig(4, 4, FusionStrategy::kNone);
  ModelConfig attn = SmallConfig(4, 4, FusionStrategy::kAttention, 2);
  attn.alpha = 0.0;
  LinkModel<float> a(none), b(attn);
  std::mt19937 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    SampleInput s;
    for (double x : RandomVec(4, gen)) s.node_u.push_back(static_cast<float>(x));
    for (double x : RandomVec(4, gen)) s.node_v.push_back(static_cast<float>(x));
    for (double x : RandomVec(4, gen)) s.video.push_back(static_cast<float>(x));
    EXPECT_EQ(a.Score(s), b.Score(s));
  }
}

TEST(LinkModel, VideoBranchNames) {
  LinkModel<float> m(SmallConfig(4, 4, FusionStrategy::kMlp));
  int video = 0, other = 0;
  m.ForEachParam([&](const std::string& name, Param<float>&) {
    (LinkModel<float>::IsVideoBranch(name) ? video : other)++;
  });
  EXPECT_EQ(video, 7);  // W_u, W_v, W_f, mlp W_1 b_1 W_2 b_2
  EXPECT_EQ(other, 8);
}

}  // namespace
}  // namespace g2v
