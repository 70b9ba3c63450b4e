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

#include "g2v/backbone.hpp"

#include <cmath>
#include <mutex>

#include "g2v/error.hpp"

namespace g2v {

TimeEncoder::TimeEncoder(int dim) {
  if (dim < 1) throw Error(ErrorKind::kInvalidValue, "time encoding dim must be >= 1");
  omega_.resize(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    omega_[i] = dim == 1 ? 1.0 : std::pow(10.0, -4.0 * i / (dim - 1));
  }
}

void TimeEncoder::EncodeInto(double delta_t, float* out) const {
  if (delta_t < 0 || std::isnan(delta_t)) {
    throw Error(ErrorKind::kNegativeDelta, "time delta " + std::to_string(delta_t));
  }
  for (size_t i = 0; i < omega_.size(); ++i) {
    out[i] = static_cast<float>(std::cos(omega_[i] * delta_t));
  }
}

std::vector<float> TimeEncoder::Encode(double delta_t) const {
  std::vector<float> out(omega_.size());
  EncodeInto(delta_t, out.data());
  return out;
}

std::vector<float> MeanMessage(NodeId x, double t, const TemporalGraph& graph,
                               const NeighborIndex& index, const TimeEncoder& time,
                               int recent_events) {
  const size_t dv = graph.node_feat_dim();
  const size_t de = graph.edge_feat_dim();
  const size_t width = dv + de + static_cast<size_t>(time.dim());
  std::vector<float> mean(width, 0.0f);
  const auto recent = index.RecentEvents(x, t, static_cast<size_t>(recent_events));
  if (recent.empty()) return mean;
  std::vector<float> te(static_cast<size_t>(time.dim()));
  // Accumulate in double, oldest first, so the result does not depend on
  // how the caller ordered anything.
  std::vector<double> sum(width, 0.0);
  for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
    const auto nf = graph.NodeFeature(it->neighbor);
    const auto& ef = graph.event(it->event_idx).edge_feat;
    for (size_t i = 0; i < dv; ++i) sum[i] += nf[i];
    for (size_t i = 0; i < de; ++i) sum[dv + i] += ef[i];
    time.EncodeInto(t - it->t, te.data());
    for (size_t i = 0; i < te.size(); ++i) sum[dv + de + i] += te[i];
  }
  for (size_t i = 0; i < width; ++i) {
    mean[i] = static_cast<float>(sum[i] / static_cast<double>(recent.size()));
  }
  return mean;
}

namespace {

class MeanMlpEncoder final : public DynamicEncoder {
 public:
  MeanMlpEncoder(const TemporalGraph& graph, const EncoderSpec& spec)
      : time_(spec.time_dim),
        recent_(spec.recent_events),
        width_(static_cast<int>(graph.node_feat_dim() + graph.edge_feat_dim()) +
               spec.time_dim) {}

  std::string name() const override { return "mean-mlp"; }
  int output_dim() const override { return width_; }
  bool trainable_head() const override { return true; }
  std::vector<float> Features(NodeId x, double t, const TemporalGraph& graph,
                              const NeighborIndex& index) const override {
    return MeanMessage(x, t, graph, index, time_, recent_);
  }

 private:
  TimeEncoder time_;
  int recent_;
  int width_;
};

class ZeroEncoder final : public DynamicEncoder {
 public:
  explicit ZeroEncoder(int dim) : dim_(dim) {}
  std::string name() const override { return "zero"; }
  int output_dim() const override { return dim_; }
  bool trainable_head() const override { return false; }
  std::vector<float> Features(NodeId, double, const TemporalGraph&,
                              const NeighborIndex&) const override {
    return std::vector<float>(static_cast<size_t>(dim_), 0.0f);
  }

 private:
  int dim_;
};

struct Registry {
  std::mutex mu;
  std::map<std::string, EncoderFactory> factories;

  Registry() {
    factories["mean-mlp"] = [](const TemporalGraph& g, const EncoderSpec& s) {
      return std::make_unique<MeanMlpEncoder>(g, s);
    };
    factories["zero"] = [](const TemporalGraph&, const EncoderSpec& s) {
      return std::make_unique<ZeroEncoder>(s.node_dim);
    };
  }
};

Registry& GetRegistry() {
  static Registry registry;
  return registry;
}

}  // namespace

void RegisterDynamicEncoder(const std::string& name, EncoderFactory factory) {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  r.factories[name] = std::move(factory);
}

std::unique_ptr<DynamicEncoder> CreateDynamicEncoder(const std::string& name,
                                                     const TemporalGraph& graph,
                                                     const EncoderSpec& spec) {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  const auto it = r.factories.find(name);
  if (it == r.factories.end()) {
    throw Error(ErrorKind::kInvalidValue, "unknown backbone '" + name + "'");
  }
  return it->second(graph, spec);
}

std::vector<std::string> RegisteredDynamicEncoders() {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> names;
  for (const auto& [name, factory] : r.factories) names.push_back(name);
  return names;
}

std::vector<float> NodeState(NodeId x, double t, const TemporalGraph& graph,
                             const NeighborIndex& index, const TimeEncoder& time,
                             BackboneParams<float>& params, int recent_events) {
  const auto message = MeanMessage(x, t, graph, index, time, recent_events);
  Tape<float> tape;
  const auto in = tape.Constant(Eigen::Map<const Vec<float>>(
      message.data(), static_cast<Eigen::Index>(message.size())));
  const auto h = params.Forward(tape, in);
  return {tape.value(h).data(), tape.value(h).data() + tape.value(h).size()};
}

}  // namespace g2v
