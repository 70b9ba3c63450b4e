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

#include "g2v/pipeline.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <memory>
#include <stdexcept>
#include <vector>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"
#include "g2v/synthetic.hpp"
#include "test_util.hpp"

namespace g2v {
namespace {

FrameSpec SmallFrame() {
  FrameSpec f;
  f.frames = 4;
  f.neighbors = 4;
  f.height = 32;
  f.width = 32;
  return f;
}

EncoderConfig SmallEncoder() {
  EncoderConfig e;
  e.d_vid = 8;
  e.d_model = 16;
  e.patch = 8;
  e.mlp_hidden = 16;
  return e;
}

std::shared_ptr<RenderedVideoSource> SmallSource() {
  return std::make_shared<RenderedVideoSource>(SmallFrame(), SmallEncoder());
}

PipelineOptions Options(int threads) {
  PipelineOptions o;
  o.encoder_spec.time_dim = 16;
  o.threads = threads;
  return o;
}

ModelConfig SmallModel(const LinkPipeline& p) {
  ModelConfig m;
  m.backbone_hidden = 16;
  m.node_dim = 16;
  m.ffn_hidden = 16;
  m.fusion_mlp_hidden = 16;
  m.predictor_hidden = 16;
  m.fusion = FusionStrategy::kBilinear;
  p.Configure(m);
  return m;
}

std::vector<Query> SomeQueries(const TemporalGraph& g, size_t n) {
  std::vector<Query> q;
  for (size_t i = 0; i < n; ++i) {
    const Event& e = g.event((i * 37) % g.size());
    q.push_back({e.src, (e.dst + i) % g.num_nodes(), e.t});
  }
  return q;
}

void ExpectSameSamples(const std::vector<SampleInput>& a, const std::vector<SampleInput>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].node_u, b[i].node_u) << i;
    EXPECT_EQ(a[i].node_v, b[i].node_v) << i;
    EXPECT_EQ(a[i].video, b[i].video) << i;
    EXPECT_EQ(a[i].label, b[i].label) << i;
  }
}

TEST(ParallelFor, EachIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  ParallelFor(hits.size(), 8, [&](size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  ParallelFor(0, 4, [](size_t) { FAIL(); });
}

TEST(ParallelFor, Rethrows) {
  EXPECT_THROW(ParallelFor(100, 4,
                           [](size_t i) {
                             if (i == 57) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

TEST(LinkPipeline, ThreadCountDoesNotChangeResults) {
  const TemporalGraph g = RandomLog(11, {.events = 400, .nodes = 40, .time_span = 2000});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  LinkPipeline one(g, split, SmallSource(), nullptr, Options(1));
  LinkPipeline eight(g, split, SmallSource(), nullptr, Options(8));
  const auto queries = SomeQueries(g, 60);
  std::vector<int> labels(queries.size());
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
  for (HistoryView view : {HistoryView::kTrain, HistoryView::kFull}) {
    ExpectSameSamples(one.Prepare(queries, labels, view, true),
                      eight.Prepare(queries, labels, view, true));
  }

  const ModelConfig model = SmallModel(one);
  TrainConfig train;
  train.batch_size = 50;
  train.max_epochs = 2;
  train.seed = 3;
  const auto ba = TrainingBatches(one, model, train);
  const auto bb = TrainingBatches(eight, model, train);
  ASSERT_EQ(ba.size(), bb.size());
  for (size_t i = 0; i < ba.size(); ++i) ExpectSameSamples(ba[i], bb[i]);

  const FitResult fa = TrainLinkPredictor(one, model, train);
  const FitResult fb = TrainLinkPredictor(eight, model, train);
  ASSERT_EQ(fa.log.size(), fb.log.size());
  for (size_t i = 0; i < fa.log.size(); ++i) {
    EXPECT_EQ(fa.log[i].train_loss, fb.log[i].train_loss);
    EXPECT_EQ(fa.log[i].val_ap, fb.log[i].val_ap);
  }
  LinkModel<float> ma = fa.best, mb = fb.best;
  EXPECT_EQ(ScoreQueries(ma, one, queries), ScoreQueries(mb, eight, queries));
}

TEST(LinkPipeline, TrainingBatchesPairPositivesWithNegatives) {
  const TemporalGraph g = RandomLog(5, {.events = 300, .nodes = 30, .time_span = 3000});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  LinkPipeline p(g, split, SmallSource(), nullptr, Options(2));
  const ModelConfig model = SmallModel(p);
  TrainConfig train;
  train.batch_size = 40;
  const auto batches = TrainingBatches(p, model, train);
  size_t samples = 0;
  for (const auto& b : batches) {
    ASSERT_EQ(b.size() % 2, 0u);
    for (size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i].label, i < b.size() / 2 ? 1.0f : 0.0f);
    samples += b.size();
  }
  EXPECT_EQ(samples, 2 * split.RetainedTrainEvents(g).size());
  EXPECT_EQ(batches.front().size(), 80u);
}

TEST(LinkPipeline, ViewsHaveDistinctCacheKeys) {
  const TemporalGraph g = RandomLog(2, {.events = 200, .nodes = 30});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  const auto src = SmallSource();
  LinkPipeline p(g, split, src, nullptr);
  EXPECT_EQ(p.EmbeddingHash(HistoryView::kFull), src->config_hash());
  EXPECT_EQ(p.EmbeddingHash(HistoryView::kTrain),
            MixSeed(src->config_hash(), Fnv1a64("view=train")));
  EXPECT_EQ(src->config_hash(), MixSeed(SmallFrame().ConfigHash(), SmallEncoder().Hash()));

  LinkPipeline imported(g, split, std::make_shared<ImportedSource>(8, 0x1234), nullptr);
  EXPECT_EQ(imported.EmbeddingHash(HistoryView::kTrain), 0x1234u);
  EXPECT_EQ(imported.EmbeddingHash(HistoryView::kFull), 0x1234u);
}

TEST(LinkPipeline, TrainViewIgnoresMaskedEvents) {
  const TemporalGraph g = RandomLog(8, {.events = 400, .nodes = 30, .time_span = 4000});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  ASSERT_FALSE(split.new_node_set.empty());
  std::vector<Event> kept;
  for (size_t i : split.RetainedTrainEvents(g)) kept.push_back(g.event(i));
  const TemporalGraph masked(kept, g.num_nodes());
  const NeighborIndex masked_index(masked);
  const auto src = SmallSource();
  LinkPipeline p(g, split, src, nullptr);
  const NodeId held = split.new_node_set.front();
  const double t = g.event(split.train_end_idx - 1).t + 1.0;
  const Query q{held, (held + 1) % g.num_nodes(), t};
  EXPECT_EQ(p.Embedding(q, HistoryView::kTrain), src->Compute(q.u, q.v, q.t, masked_index));
  EXPECT_EQ(p.Embedding(q, HistoryView::kFull), src->Compute(q.u, q.v, q.t, NeighborIndex(g)));
  EXPECT_EQ(p.cache().size(), 2u);
}

TEST(LinkPipeline, FutureEventsDoNotLeak) {
  const TemporalGraph g = RandomLog(4, {.events = 300, .nodes = 25, .time_span = 1000});
  std::vector<Event> more(g.events().begin(), g.events().end());
  for (int i = 0; i < 100; ++i) {
    more.push_back({static_cast<NodeId>(i % 25), static_cast<NodeId>((i * 7 + 1) % 25),
                    5000.0 + i, {}});
  }
  const TemporalGraph longer(more, g.num_nodes());
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  LinkPipeline a(g, split, SmallSource(), nullptr);
  LinkPipeline b(longer, split, SmallSource(), nullptr);
  const auto queries = SomeQueries(g, 40);
  const std::vector<int> labels(queries.size(), 1);
  for (HistoryView view : {HistoryView::kTrain, HistoryView::kFull}) {
    ExpectSameSamples(a.Prepare(queries, labels, view, true),
                      b.Prepare(queries, labels, view, true));
  }
}

TEST(LinkPipeline, ImportedSourceNeedsRecords) {
  const TemporalGraph g = RandomLog(2, {.events = 200, .nodes = 30});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  EmbeddingCache cache(4);
  LinkPipeline p(g, split, std::make_shared<ImportedSource>(4, 77), &cache);
  const Query q{1, 2, 50.0};
  EXPECT_EQ(KindOf([&] { p.Embedding(q, HistoryView::kFull); }), ErrorKind::kMissingEmbedding);
  cache.Insert({1, 2, 50.0, 77}, {1, 2, 3, 4});
  EXPECT_EQ(p.Embedding(q, HistoryView::kTrain), (std::vector<float>{1, 2, 3, 4}));
  EXPECT_EQ(p.Embedding(q, HistoryView::kFull), (std::vector<float>{1, 2, 3, 4}));

  EmbeddingCache wrong(5);
  EXPECT_EQ(KindOf([&] {
              LinkPipeline bad(g, split, std::make_shared<ImportedSource>(4, 77), &wrong);
            }),
            ErrorKind::kDimMismatch);
}

TEST(LinkPipeline, WithoutVideoLeavesEmbeddingEmpty) {
  const TemporalGraph g = RandomLog(2, {.events = 200, .nodes = 30});
  const SplitSpec split = ChronologicalSplit(g, SplitRatios{}, 0);
  LinkPipeline p(g, split, SmallSource(), nullptr);
  const auto queries = SomeQueries(g, 5);
  const std::vector<int> labels(5, 0);
  const auto s = p.Prepare(queries, labels, HistoryView::kFull, false);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(p.cache().size(), 0u);
  EXPECT_EQ(s[0].node_u.size(), p.backbone().output_dim());
}

}  // namespace
}  // namespace g2v
