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

#include "g2v/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "g2v/checkpoint.hpp"
#include "g2v/error.hpp"
#include "g2v/model.hpp"
#include "g2v/pipeline.hpp"
#include "g2v/synthetic.hpp"
#include "test_util.hpp"

namespace g2v {
namespace {

ModelConfig TinyConfig(FusionStrategy s, int input = 6, int d_vid = 5) {
  ModelConfig c;
  c.node_input_dim = input;
  c.backbone_hidden = 7;
  c.node_dim = 4;
  c.d_vid = d_vid;
  c.fusion = s;
  c.fusion_heads = 2;
  c.ffn_hidden = 6;
  c.fusion_mlp_hidden = 6;
  c.predictor_hidden = 5;
  c.alpha = 0.3;
  return c;
}

std::vector<SampleInput> RandomBatch(const ModelConfig& c, size_t n, uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<SampleInput> batch(n);
  for (size_t i = 0; i < n; ++i) {
    for (int k = 0; k < c.node_input_dim; ++k) batch[i].node_u.push_back(u(gen));
    for (int k = 0; k < c.node_input_dim; ++k) batch[i].node_v.push_back(u(gen));
    for (int k = 0; k < c.d_vid; ++k) batch[i].video.push_back(u(gen));
    batch[i].label = static_cast<float>(i % 2);
  }
  return batch;
}

std::vector<std::vector<SampleInput>> RandomBatches(const ModelConfig& c, int count) {
  std::vector<std::vector<SampleInput>> out;
  for (int b = 0; b < count; ++b) out.push_back(RandomBatch(c, 8, 100 + b));
  return out;
}

std::map<std::string, Mat<float>> Snapshot(LinkModel<float>& m) {
  std::map<std::string, Mat<float>> out;
  m.ForEachParam([&](const std::string& name, Param<float>& p) { out[name] = p.value; });
  return out;
}

TEST(Bce, ClosedForms) {
  EXPECT_NEAR(BceLoss(0.5, 1), 0.693147, 1e-6);
  EXPECT_NEAR(BceLoss(0.5, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(BceLoss(1 - 1e-7, 1), 1e-7, 1e-12);
  EXPECT_NEAR(BceLoss(0.2, 0), -std::log(0.8), 1e-15);
}

TEST(Bce, BatchMean) {
  const double p[] = {0.9, 0.3, 0.6};
  const int y[] = {1, 0, 0};
  const double hand = (-std::log(0.9) - std::log(0.7) - std::log(0.4)) / 3.0;
  EXPECT_NEAR(MeanBceLoss(p, y), hand, 1e-15);
}

TEST(Bce, ModelLossIsMeanOfSampleBce) {
  const ModelConfig c = TinyConfig(FusionStrategy::kMlp);
  LinkModel<double> m(c);
  const auto batch = RandomBatch(c, 6, 1);
  double sum = 0.0;
  for (const auto& s : batch) sum += BceLoss(m.Score(s), static_cast<int>(s.label));
  EXPECT_NEAR(m.Loss(batch, false), sum / 6.0, 1e-12);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.lr = 0;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidValue);
  c = TrainConfig{};
  c.video_lr = -1;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidValue);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidValue);
}

TEST(TrainConfig, DefaultsFollowTheProtocol) {
  const TrainConfig c;
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.batch_size, 200);
  EXPECT_EQ(c.patience, 20);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  LinkModel<float> m(TinyConfig(FusionStrategy::kNone));
  m.ZeroGrads();
  m.backbone.b1.grad(0, 0) = 3.0f;
  m.backbone.b1.grad(1, 0) = -0.5f;
  const auto before = m.backbone.b1.value;
  TrainConfig c;
  c.lr = 0.01;
  Adam adam;
  adam.Step(m, c);
  // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
  EXPECT_NEAR(m.backbone.b1.value(0, 0), before(0, 0) - 0.01f, 1e-7);
  EXPECT_NEAR(m.backbone.b1.value(1, 0), before(1, 0) + 0.01f, 1e-7);
  EXPECT_EQ(m.backbone.b1.value(2, 0), before(2, 0));
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, TwoStepsMatchHandComputation) {
  LinkModel<float> m(TinyConfig(FusionStrategy::kNone));
  TrainConfig c;
  c.lr = 0.1;
  Adam adam;
  const float start = m.backbone.b2.value(0, 0);
  const double g[] = {1.0, -2.0};
  double mm = 0, vv = 0, x = start;
  for (int t = 1; t <= 2; ++t) {
    m.ZeroGrads();
    m.backbone.b2.grad(0, 0) = static_cast<float>(g[t - 1]);
    adam.Step(m, c);
    mm = 0.9 * mm + 0.1 * g[t - 1];
    vv = 0.999 * vv + 0.001 * g[t - 1] * g[t - 1];
    x -= 0.1 * (mm / (1 - std::pow(0.9, t))) / (std::sqrt(vv / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(m.backbone.b2.value(0, 0), x, 1e-6);
}

TEST(Adam, GradScaleAndVideoLrTouchOnlyVideoBranch) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kAttention);
  const auto batch = RandomBatch(mc, 8, 3);
  TrainConfig base;
  base.lr = 1e-2;
  TrainConfig scaled = base;
  scaled.grad_scale = 1e-5;
  scaled.video_lr = 1e-7;

  LinkModel<float> a(mc), b(mc);
  Adam adam_a, adam_b;
  for (int step = 0; step < 3; ++step) {
    // Same parameters in, so both optimizers see identical gradients.
    b = a;
    a.Loss(batch, true);
    b.Loss(batch, true);
    adam_b = adam_a;
    adam_a.Step(a, base);
    adam_b.Step(b, scaled);
    const auto sa = Snapshot(a), sb = Snapshot(b);
    bool video_differs = false;
    for (const auto& [name, value] : sa) {
      if (LinkModel<float>::IsVideoBranch(name)) {
        video_differs |= value != sb.at(name);
      } else {
        EXPECT_EQ(value, sb.at(name)) << name;
      }
    }
    EXPECT_TRUE(video_differs);
  }
}

TEST(Fit, ZeroGradScaleFreezesVideoBranch) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kBilinear);
  const auto batches = RandomBatches(mc, 4);
  TrainConfig c;
  c.lr = 1e-2;
  c.video_lr = 0.5;
  c.grad_scale = 0.0;
  c.max_epochs = 3;
  LinkModel<float> model(mc);
  const auto before = Snapshot(model);
  int calls = 0;
  const auto result = Fit(model, batches, [&](LinkModel<float>&) { return ++calls * 0.1; }, c);
  ASSERT_EQ(result.log.size(), 3u);
  LinkModel<float> trained = result.best;
  const auto after = Snapshot(trained);
  bool backbone_moved = false;
  for (const auto& [name, value] : before) {
    if (LinkModel<float>::IsVideoBranch(name)) {
      EXPECT_EQ(value, after.at(name)) << name;
    } else {
      backbone_moved |= value != after.at(name);
    }
  }
  EXPECT_TRUE(backbone_moved);

  // With the branch frozen, video_lr has no influence anywhere.
  TrainConfig other = c;
  other.video_lr = 1e-7;
  int calls2 = 0;
  LinkModel<float> again =
      Fit(model, batches, [&](LinkModel<float>&) { return ++calls2 * 0.1; }, other).best;
  EXPECT_EQ(Snapshot(again), after);
}

TEST(Fit, PatienceStopsOnWorseningValidation) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kMlp);
  TrainConfig c;
  c.patience = 1;
  c.max_epochs = 50;
  double ap = 1.0;
  const auto result =
      Fit(LinkModel<float>(mc), RandomBatches(mc, 2), [&](LinkModel<float>&) { return ap -= 0.1; },
          c);
  EXPECT_EQ(result.log.size(), 2u);
  EXPECT_EQ(result.best_epoch, 1);
  EXPECT_NEAR(result.best_val_ap, 0.9, 1e-12);
}

TEST(Fit, ReturnsBestValidatedModel) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kMlp);
  TrainConfig c;
  c.lr = 1e-2;
  c.patience = 3;
  c.max_epochs = 10;
  const double curve[] = {0.5, 0.7, 0.6, 0.65, 0.69, 0.2, 0.9};
  int epoch = 0;
  std::vector<std::map<std::string, Mat<float>>> states;
  const auto result = Fit(LinkModel<float>(mc), RandomBatches(mc, 2),
                          [&](LinkModel<float>& m) {
                            states.push_back(Snapshot(m));
                            return curve[epoch++];
                          },
                          c);
  EXPECT_EQ(result.log.size(), 5u);
  EXPECT_EQ(result.best_epoch, 2);
  LinkModel<float> best = result.best;
  EXPECT_EQ(Snapshot(best), states[1]);
}

TEST(Fit, NonFiniteLossNamesTheBatch) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kMlp);
  auto batches = RandomBatches(mc, 3);
  batches[2][1].node_u[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig c;
  c.max_epochs = 1;
  const std::string msg = MessageOf(
      [&] { Fit(LinkModel<float>(mc), batches, [](LinkModel<float>&) { return 0.0; }, c); });
  EXPECT_NE(msg.find("batch 2"), std::string::npos) << msg;
  EXPECT_EQ(KindOf([&] {
              Fit(LinkModel<float>(mc), batches, [](LinkModel<float>&) { return 0.0; }, c);
            }),
            ErrorKind::kNonFiniteLoss);
}

TEST(Fit, LogFormat) {
  EXPECT_EQ(EpochLogHeader(), "epoch,train_loss,val_ap,elapsed_ms");
  EXPECT_EQ(FormatEpochLog({3, 0.5, 0.75, 12.26}), "3,0.5,0.75,12.3");
}

struct SeparableFixture {
  TemporalGraph graph;
  SplitSpec split;
  std::unique_ptr<LinkPipeline> pipeline;
  ModelConfig model;

  SeparableFixture(size_t events, FusionStrategy fusion) {
    SeparableLogOptions opt;
    opt.events = events;
    graph = SeparableLog(3, opt);
    split = ChronologicalSplit(graph, SplitRatios{}, 0);
    FrameSpec frame;
    frame.frames = 4;
    frame.neighbors = 4;
    frame.height = 32;
    frame.width = 32;
    EncoderConfig enc;
    enc.d_vid = 8;
    enc.d_model = 16;
    enc.patch = 8;
    enc.mlp_hidden = 16;
    PipelineOptions po;
    po.encoder_spec.time_dim = 100;
    pipeline = std::make_unique<LinkPipeline>(
        graph, split, std::make_shared<RenderedVideoSource>(frame, enc), nullptr, po);
    model.backbone_hidden = 32;
    model.node_dim = 32;
    model.ffn_hidden = 32;
    model.fusion_mlp_hidden = 32;
    model.predictor_hidden = 32;
    model.fusion = fusion;
    pipeline->Configure(model);
  }
};

TEST(Fit, SeparableSetLearns) {
  SeparableFixture fx(500, FusionStrategy::kMlp);
  TrainConfig c;
  c.lr = 5e-4;
  c.video_lr = 5e-4;
  c.batch_size = 10;
  c.max_epochs = 5;
  c.patience = 5;
  const auto result = TrainLinkPredictor(*fx.pipeline, fx.model, c);
  ASSERT_EQ(result.log.size(), 5u);
  for (size_t e = 1; e < 5; ++e) {
    EXPECT_LT(result.log[e].train_loss, result.log[e - 1].train_loss) << "epoch " << e + 1;
  }
  EXPECT_LT(result.log.back().train_loss, 0.3);
  EXPECT_GT(result.best_val_ap, 0.9);
}

TEST(Fit, SameSeedReproducesTheLog) {
  SeparableFixture fx(300, FusionStrategy::kMlp);
  TrainConfig c;
  c.lr = 1e-3;
  c.batch_size = 20;
  c.max_epochs = 3;
  c.seed = 4;
  const auto a = TrainLinkPredictor(*fx.pipeline, fx.model, c);
  const auto b = TrainLinkPredictor(*fx.pipeline, fx.model, c);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_ap, b.log[i].val_ap);
  }
  c.seed = 5;
  const auto other = TrainLinkPredictor(*fx.pipeline, fx.model, c);
  EXPECT_NE(other.log[0].train_loss, a.log[0].train_loss);
}

TEST(GradCheck, RelativeErrorConvention) {
  EXPECT_EQ(RelativeError(0.0, 0.0), 0.0);
  EXPECT_EQ(RelativeError(1e-12, -1e-12), 0.0);
  EXPECT_DOUBLE_EQ(RelativeError(2.0, 1.0), 0.5);
}

class GradCheckAll : public ::testing::TestWithParam<FusionStrategy> {};

TEST_P(GradCheckAll, MatchesFiniteDifferences) {
  ModelConfig mc = TinyConfig(GetParam());
  for (uint64_t seed = 0; seed < 3; ++seed) {
    mc.seed = seed;
    LinkModel<double> model = LinkModel<float>(mc).Cast<double>();
    const auto batch = RandomBatch(mc, 8, 50 + static_cast<uint32_t>(seed));
    GradCheckOptions opt;
    opt.seed = seed;
    const auto r = FiniteDiffCheck(model, batch, opt);
    EXPECT_LE(r.max_rel_error, kGradCheckTolerance) << "seed " << seed << " " << r.worst_param;
    EXPECT_EQ(r.checked, std::min<size_t>(200, model.NumScalars() - r.kinks_skipped));
  }
}

TEST_P(GradCheckAll, CorruptedGradientFails) {
  const ModelConfig mc = TinyConfig(GetParam());
  LinkModel<double> model(mc);
  GradCheckOptions opt;
  opt.corrupt_factor = 2.0;
  const auto r = FiniteDiffCheck(model, RandomBatch(mc, 8, 9), opt);
  EXPECT_GT(r.max_rel_error, kGradCheckTolerance);
  EXPECT_NEAR(r.max_rel_error, 0.5, 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Strategies, GradCheckAll,
                         ::testing::Values(FusionStrategy::kNone, FusionStrategy::kAttention,
                                           FusionStrategy::kBilinear, FusionStrategy::kMlp),
                         [](const auto& info) {
                           return std::string(FusionStrategyName(info.param));
                         });

TEST(GradCheck, LearnableGate) {
  ModelConfig mc = TinyConfig(FusionStrategy::kAttention);
  mc.gate = GateMode::kLearnable;
  LinkModel<double> model(mc);
  const auto r = FiniteDiffCheck(model, RandomBatch(mc, 8, 4));
  EXPECT_LE(r.max_rel_error, kGradCheckTolerance) << r.worst_param;
  EXPECT_NE(model.FindParam("fusion.attn.theta")->grad(0, 0), 0.0);
}

TEST(GradCheck, DeadReluPathCountsAsZero) {
  ModelConfig mc = TinyConfig(FusionStrategy::kNone);
  LinkModel<double> model(mc);
  // Hidden unit 0 is dead for every input: its incoming weights are zero and
  // its bias negative, so W_1 row 0 and b_1[0] get zero gradients.
  model.backbone.w1.value.row(0).setZero();
  model.backbone.b1.value(0, 0) = -1.0;
  GradCheckOptions opt;
  opt.sample_params = model.NumScalars();
  const auto r = FiniteDiffCheck(model, RandomBatch(mc, 4, 2), opt);
  EXPECT_LE(r.max_rel_error, kGradCheckTolerance);
  EXPECT_EQ(model.backbone.w1.grad.row(0).norm(), 0.0);
}

TEST(Checkpoint, RoundTripIsExact) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kAttention);
  LinkModel<float> model(mc);
  model.fusion.w_f.value(1, 2) = 0.123456789f;
  TempDir dir;
  SaveCheckpoint(model, dir.File("m.g2vm"));
  LinkModel<float> back = LoadCheckpoint(dir.File("m.g2vm"), mc);
  EXPECT_EQ(Snapshot(back), Snapshot(model));
  const auto s = RandomBatch(mc, 1, 0)[0];
  EXPECT_EQ(back.Score(s), model.Score(s));
}

TEST(Checkpoint, Errors) {
  const ModelConfig mc = TinyConfig(FusionStrategy::kMlp);
  std::string bytes = EncodeCheckpoint(LinkModel<float>(mc));
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 1;
  EXPECT_EQ(KindOf([&] { DecodeCheckpoint(flipped, mc); }), ErrorKind::kCorruptCacheEntry);
  EXPECT_EQ(KindOf([&] { DecodeCheckpoint(std::string_view(bytes).substr(0, 30), mc); }),
            ErrorKind::kCorruptCacheEntry);
  EXPECT_EQ(KindOf([&] { DecodeCheckpoint(std::string_view(bytes).substr(0, 8), mc); }),
            ErrorKind::kTruncatedFile);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(KindOf([&] { DecodeCheckpoint(magic, mc); }), ErrorKind::kBadMagic);
  EXPECT_EQ(KindOf([&] { DecodeCheckpoint(bytes, TinyConfig(FusionStrategy::kBilinear)); }),
            ErrorKind::kShapeMismatch);
}

}  // namespace
}  // namespace g2v
