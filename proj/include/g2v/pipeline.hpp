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

#ifndef G2V_PIPELINE_HPP_
#define G2V_PIPELINE_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "g2v/backbone.hpp"
#include "g2v/embedding_cache.hpp"
#include "g2v/graph_video.hpp"
#include "g2v/model.hpp"
#include "g2v/negative_sampling.hpp"
#include "g2v/temporal_graph.hpp"
#include "g2v/trainer.hpp"
#include "g2v/video_encoder.hpp"

namespace g2v {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker, so results written per index do not depend
// on the thread count. Rethrows the first exception.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn);

// kTrain sees only retained training events (new-node events masked);
// kFull sees the whole log.
enum class HistoryView { kTrain, kFull };

class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;
  virtual size_t d_vid() const = 0;
  virtual uint64_t config_hash() const = 0;
  // False for sources that carry a single precomputed view.
  virtual bool view_sensitive() const = 0;
  virtual std::vector<float> Compute(NodeId u, NodeId v, double t_star,
                                     const NeighborIndex& index) const = 0;
};

// Graph video rendered under `frame` and passed through the frozen encoder.
class RenderedVideoSource final : public EmbeddingSource {
 public:
  RenderedVideoSource(FrameSpec frame, const EncoderConfig& encoder);

  size_t d_vid() const override { return static_cast<size_t>(encoder_.config().d_vid); }
  uint64_t config_hash() const override { return hash_; }
  bool view_sensitive() const override { return true; }
  std::vector<float> Compute(NodeId u, NodeId v, double t_star,
                             const NeighborIndex& index) const override;

  const FrameSpec& frame() const { return frame_; }
  const FrozenVideoEncoder& encoder() const { return encoder_; }

 private:
  FrameSpec frame_;
  FrozenVideoEncoder encoder_;
  uint64_t hash_;
};

// Embeddings that exist only as imported records; a lookup miss throws
// Error(kMissingEmbedding).
class ImportedSource final : public EmbeddingSource {
 public:
  ImportedSource(size_t d_vid, uint64_t config_hash) : d_vid_(d_vid), hash_(config_hash) {}

  size_t d_vid() const override { return d_vid_; }
  uint64_t config_hash() const override { return hash_; }
  bool view_sensitive() const override { return false; }
  std::vector<float> Compute(NodeId u, NodeId v, double t_star,
                             const NeighborIndex& index) const override;

 private:
  size_t d_vid_;
  uint64_t hash_;
};

struct PipelineOptions {
  std::string backbone = "mean-mlp";
  EncoderSpec encoder_spec;
  int threads = 1;
};

// Turns (u, v, t) queries into model inputs: backbone features for both
// endpoints and the cached link embedding.
class LinkPipeline {
 public:
  // `cache` may be null, in which case an in-memory cache is used.
  LinkPipeline(const TemporalGraph& graph, const SplitSpec& split,
               std::shared_ptr<const EmbeddingSource> video, EmbeddingCache* cache,
               const PipelineOptions& options = {});

  const TemporalGraph& graph() const { return graph_; }
  const SplitSpec& split() const { return split_; }
  const NeighborIndex& index(HistoryView view) const;
  const DynamicEncoder& backbone() const { return *backbone_; }
  const EmbeddingSource& video() const { return *video_; }
  EmbeddingCache& cache() { return *cache_; }
  int threads() const { return options_.threads; }

  // Cache-key hash for embeddings under `view`.
  uint64_t EmbeddingHash(HistoryView view) const;
  std::vector<float> Embedding(const Query& q, HistoryView view);

  // Fills node_input_dim, trainable_backbone and d_vid (and node_dim when
  // the backbone has no trainable head).
  void Configure(ModelConfig& config) const;

  std::vector<SampleInput> Prepare(std::span<const Query> queries, std::span<const int> labels,
                                   HistoryView view, bool with_video);

 private:
  const TemporalGraph& graph_;
  SplitSpec split_;
  std::shared_ptr<const EmbeddingSource> video_;
  std::unique_ptr<EmbeddingCache> owned_cache_;
  EmbeddingCache* cache_;
  PipelineOptions options_;
  std::unique_ptr<DynamicEncoder> backbone_;
  NeighborIndex full_index_;
  NeighborIndex train_index_;
};

// Training batches: retained training events in chronological order. Each
// batch holds its positives, then one random negative per positive (same u,
// v' uniform over training nodes) drawn from a stream seeded by
// (seed, batch index).
std::vector<std::vector<SampleInput>> TrainingBatches(LinkPipeline& pipeline,
                                                      const ModelConfig& model,
                                                      const TrainConfig& train);

// Validation events, each followed by one rnd negative.
std::vector<SampleInput> ValidationSamples(LinkPipeline& pipeline, const ModelConfig& model,
                                           const TrainConfig& train);

double ScoreAveragePrecision(LinkModel<float>& model, std::span<const SampleInput> samples);

FitResult TrainLinkPredictor(LinkPipeline& pipeline, const ModelConfig& model,
                             const TrainConfig& train,
                             const std::function<void(const EpochLog&)>& on_epoch = {});

// Scores queries under the full history view.
std::vector<double> ScoreQueries(LinkModel<float>& model, LinkPipeline& pipeline,
                                 std::span<const Query> queries);

}  // namespace g2v

#endif  // G2V_PIPELINE_HPP_
