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

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"
#include "g2v/metrics.hpp"

namespace g2v {

void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min(n, static_cast<size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

RenderedVideoSource::RenderedVideoSource(FrameSpec frame, const EncoderConfig& encoder)
    : frame_(std::move(frame)), encoder_(encoder) {
  frame_.Validate();
  encoder.CheckCompatible(frame_.frames, frame_.height, frame_.width);
  hash_ = MixSeed(frame_.ConfigHash(), encoder.Hash());
}

std::vector<float> RenderedVideoSource::Compute(NodeId u, NodeId v, double t_star,
                                                const NeighborIndex& index) const {
  return encoder_.Encode(BuildGraphVideo(u, v, t_star, frame_, index));
}

std::vector<float> ImportedSource::Compute(NodeId u, NodeId v, double t_star,
                                           const NeighborIndex&) const {
  throw Error(ErrorKind::kMissingEmbedding, "no imported embedding for u=" + std::to_string(u) +
                                                " v=" + std::to_string(v) +
                                                " t=" + std::to_string(t_star));
}

LinkPipeline::LinkPipeline(const TemporalGraph& graph, const SplitSpec& split,
                           std::shared_ptr<const EmbeddingSource> video, EmbeddingCache* cache,
                           const PipelineOptions& options)
    : graph_(graph),
      split_(split),
      video_(std::move(video)),
      cache_(cache),
      options_(options),
      backbone_(CreateDynamicEncoder(options.backbone, graph, options.encoder_spec)),
      full_index_(graph),
      train_index_(graph, [&](size_t idx) {
        return idx < split.train_end_idx && split.IsRetainedTrainEvent(graph, idx);
      }) {
  if (!video_) throw Error(ErrorKind::kInvalidValue, "pipeline needs an embedding source");
  if (cache_ == nullptr) {
    owned_cache_ = std::make_unique<EmbeddingCache>(video_->d_vid());
    cache_ = owned_cache_.get();
  }
  if (cache_->d_vid() != video_->d_vid()) {
    throw Error(ErrorKind::kDimMismatch, "cache d_vid " + std::to_string(cache_->d_vid()) +
                                             " vs source " + std::to_string(video_->d_vid()));
  }
}

const NeighborIndex& LinkPipeline::index(HistoryView view) const {
  return view == HistoryView::kTrain ? train_index_ : full_index_;
}

uint64_t LinkPipeline::EmbeddingHash(HistoryView view) const {
  if (view == HistoryView::kFull || !video_->view_sensitive()) return video_->config_hash();
  return MixSeed(video_->config_hash(), Fnv1a64("view=train"));
}

std::vector<float> LinkPipeline::Embedding(const Query& q, HistoryView view) {
  const LinkKey key{q.u, q.v, q.t, EmbeddingHash(view)};
  const NeighborIndex& idx = index(view);
  return cache_->GetOrCompute(key, [&] { return video_->Compute(q.u, q.v, q.t, idx); });
}

void LinkPipeline::Configure(ModelConfig& config) const {
  config.node_input_dim = backbone_->output_dim();
  config.trainable_backbone = backbone_->trainable_head();
  if (!config.trainable_backbone) config.node_dim = backbone_->output_dim();
  config.d_vid = static_cast<int>(video_->d_vid());
}

std::vector<SampleInput> LinkPipeline::Prepare(std::span<const Query> queries,
                                               std::span<const int> labels, HistoryView view,
                                               bool with_video) {
  if (queries.size() != labels.size()) {
    throw Error(ErrorKind::kShapeMismatch, "queries and labels differ in length");
  }
  std::vector<SampleInput> out(queries.size());
  const NeighborIndex& idx = index(view);
  ParallelFor(queries.size(), options_.threads, [&](size_t i) {
    const Query& q = queries[i];
    SampleInput& s = out[i];
    s.node_u = backbone_->Features(q.u, q.t, graph_, idx);
    s.node_v = backbone_->Features(q.v, q.t, graph_, idx);
    if (with_video) s.video = Embedding(q, view);
    s.label = static_cast<float>(labels[i]);
  });
  return out;
}

namespace {

std::vector<NodeId> TrainingNodes(const TemporalGraph& graph, std::span<const size_t> events) {
  std::vector<NodeId> nodes;
  nodes.reserve(events.size() * 2);
  for (size_t i : events) {
    nodes.push_back(graph.event(i).src);
    nodes.push_back(graph.event(i).dst);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

bool NeedsVideo(const ModelConfig& model) { return model.fusion != FusionStrategy::kNone; }

}  // namespace

std::vector<std::vector<SampleInput>> TrainingBatches(LinkPipeline& pipeline,
                                                      const ModelConfig& model,
                                                      const TrainConfig& train) {
  const TemporalGraph& graph = pipeline.graph();
  const auto retained = pipeline.split().RetainedTrainEvents(graph);
  const auto nodes = TrainingNodes(graph, retained);
  const auto batch_size = static_cast<size_t>(train.batch_size);
  std::vector<std::vector<SampleInput>> batches;
  for (size_t start = 0, b = 0; start < retained.size(); start += batch_size, ++b) {
    const size_t end = std::min(retained.size(), start + batch_size);
    Rng rng(MixSeed(train.seed, b));
    std::vector<Query> queries;
    std::vector<int> labels;
    for (size_t i = start; i < end; ++i) {
      const Event& e = graph.event(retained[i]);
      queries.push_back({e.src, e.dst, e.t});
      labels.push_back(1);
    }
    for (size_t i = start; i < end; ++i) {
      const Event& e = graph.event(retained[i]);
      queries.push_back({e.src, UniformExcluding(nodes, e.dst, rng), e.t});
      labels.push_back(0);
    }
    batches.push_back(pipeline.Prepare(queries, labels, HistoryView::kTrain, NeedsVideo(model)));
  }
  return batches;
}

std::vector<SampleInput> ValidationSamples(LinkPipeline& pipeline, const ModelConfig& model,
                                           const TrainConfig& train) {
  const TemporalGraph& graph = pipeline.graph();
  const SplitSpec& split = pipeline.split();
  const NegativeSampler sampler(graph, split);
  const auto batch_size = static_cast<size_t>(train.batch_size);
  std::vector<SampleInput> out;
  for (size_t start = split.train_end_idx, b = 0; start < split.val_end_idx;
       start += batch_size, ++b) {
    const size_t end = std::min(split.val_end_idx, start + batch_size);
    std::vector<Query> queries;
    for (size_t i = start; i < end; ++i) {
      const Event& e = graph.event(i);
      queries.push_back({e.src, e.dst, e.t});
    }
    const auto negatives =
        sampler.Sample(queries, NegStrategy::kRandom,
                       MixSeed(MixSeed(train.seed, Fnv1a64("val")), b));
    std::vector<int> labels(queries.size(), 1);
    queries.insert(queries.end(), negatives.negatives.begin(), negatives.negatives.end());
    labels.resize(queries.size(), 0);
    auto samples = pipeline.Prepare(queries, labels, HistoryView::kFull, NeedsVideo(model));
    std::move(samples.begin(), samples.end(), std::back_inserter(out));
  }
  return out;
}

double ScoreAveragePrecision(LinkModel<float>& model, std::span<const SampleInput> samples) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(samples.size());
  for (const auto& s : samples) {
    scores.push_back(model.Score(s));
    labels.push_back(s.label > 0.5f ? 1 : 0);
  }
  return AveragePrecision(scores, labels);
}

FitResult TrainLinkPredictor(LinkPipeline& pipeline, const ModelConfig& model,
                             const TrainConfig& train,
                             const std::function<void(const EpochLog&)>& on_epoch) {
  train.Validate();
  ModelConfig config = model;
  pipeline.Configure(config);
  const auto batches = TrainingBatches(pipeline, config, train);
  const auto val = ValidationSamples(pipeline, config, train);
  if (val.empty()) throw Error(ErrorKind::kEmptyEvalSet, "validation split is empty");
  return Fit(LinkModel<float>(config), batches,
             [&](LinkModel<float>& m) { return ScoreAveragePrecision(m, val); }, train, on_epoch);
}

std::vector<double> ScoreQueries(LinkModel<float>& model, LinkPipeline& pipeline,
                                 std::span<const Query> queries) {
  const std::vector<int> labels(queries.size(), 0);
  const auto samples = pipeline.Prepare(queries, labels, HistoryView::kFull,
                                        NeedsVideo(model.config()));
  std::vector<double> scores(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) scores[i] = model.Score(samples[i]);
  return scores;
}

}  // namespace g2v
