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

#include <chrono>
#include <cmath>
#include <cstdio>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {

void TrainConfig::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidValue, "train config: " + what);
  };
  if (!(lr > 0)) fail("lr must be positive");
  if (!(video_lr > 0)) fail("video_lr must be positive");
  if (!(grad_scale >= 0) || !std::isfinite(grad_scale)) fail("grad_scale must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (patience < 1) fail("patience must be >= 1");
}

double BceLoss(double p, int label) {
  return -(label * std::log(p) + (1 - label) * std::log(1.0 - p));
}

double MeanBceLoss(std::span<const double> p, std::span<const int> labels) {
  if (p.size() != labels.size()) throw Error(ErrorKind::kShapeMismatch, "loss inputs");
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += BceLoss(p[i], labels[i]);
  return total / static_cast<double>(p.size());
}

void Adam::Step(LinkModel<float>& model, const TrainConfig& config) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, steps_);
  const double c2 = 1.0 - std::pow(beta2_, steps_);
  model.ForEachParam([&](const std::string& name, Param<float>& p) {
    const bool video = LinkModel<float>::IsVideoBranch(name);
    const auto scale = static_cast<float>(video ? config.grad_scale : 1.0);
    const double lr = video ? config.video_lr : config.lr;
    auto [it, inserted] = state_.try_emplace(name);
    Moments& s = it->second;
    if (inserted) {
      s.m.setZero(p.value.rows(), p.value.cols());
      s.v.setZero(p.value.rows(), p.value.cols());
    }
    const auto b1 = static_cast<float>(beta1_);
    const auto b2 = static_cast<float>(beta2_);
    const auto step = static_cast<float>(lr / c1);
    const auto c2_f = static_cast<float>(c2);
    const auto eps = static_cast<float>(eps_);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const float g = p.grad(i) * scale;
      s.m(i) = b1 * s.m(i) + (1.0f - b1) * g;
      s.v(i) = b2 * s.v(i) + (1.0f - b2) * g * g;
      p.value(i) -= step * s.m(i) / (std::sqrt(s.v(i) / c2_f) + eps);
    }
  });
}

std::string EpochLogHeader() { return "epoch,train_loss,val_ap,elapsed_ms"; }

std::string FormatEpochLog(const EpochLog& e) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.1f", e.epoch, e.train_loss, e.val_ap,
                e.elapsed_ms);
  return buf;
}

FitResult Fit(LinkModel<float> model, const std::vector<std::vector<SampleInput>>& batches,
              const Validator& validate, const TrainConfig& config,
              const std::function<void(const EpochLog&)>& on_epoch) {
  config.Validate();
  Adam adam;
  FitResult result{model, {}, 0, -1.0};
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t b = 0; b < batches.size(); ++b) {
      if (batches[b].empty()) continue;
      const double loss = model.Loss(batches[b], /*with_grads=*/true);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::kNonFiniteLoss,
                    "epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + " (" +
                        std::to_string(batches[b].size()) + " samples) loss " +
                        std::to_string(loss));
      }
      adam.Step(model, config);
      loss_sum += loss * static_cast<double>(batches[b].size());
      loss_count += batches[b].size();
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_count == 0 ? 0.0 : loss_sum / static_cast<double>(loss_count);
    entry.val_ap = validate(model);
    entry.elapsed_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (entry.val_ap > result.best_val_ap) {
      result.best_val_ap = entry.val_ap;
      result.best_epoch = epoch;
      result.best = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

double RelativeError(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-10) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult FiniteDiffCheck(LinkModel<double>& model, std::span<const SampleInput> batch,
                                const GradCheckOptions& options) {
  uint64_t base_signature = 0;
  model.Loss(batch, /*with_grads=*/true, &base_signature);
  struct Coord {
    std::string name;
    Param<double>* param;
    Eigen::Index index;
  };
  std::vector<Coord> coords;
  model.ForEachParam([&](const std::string& name, Param<double>& p) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) coords.push_back({name, &p, i});
  });
  Rng rng(options.seed);
  GradCheckResult result;
  for (size_t i = 0; i < coords.size() && result.checked < options.sample_params; ++i) {
    std::swap(coords[i], coords[i + rng.UniformIndex(coords.size() - i)]);
    Coord& c = coords[i];
    const double saved = c.param->value(c.index);
    uint64_t sig_plus = 0, sig_minus = 0;
    c.param->value(c.index) = saved + options.h;
    const double plus = model.Loss(batch, false, &sig_plus);
    c.param->value(c.index) = saved - options.h;
    const double minus = model.Loss(batch, false, &sig_minus);
    c.param->value(c.index) = saved;
    if (sig_plus != base_signature || sig_minus != base_signature) {
      ++result.kinks_skipped;
      continue;
    }
    const double analytic = c.param->grad(c.index) * options.corrupt_factor;
    const double numeric = (plus - minus) / (2.0 * options.h);
    const double err = RelativeError(analytic, numeric);
    if (result.worst_param.empty() || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_param = c.name + "[" + std::to_string(c.index) + "]";
    }
    ++result.checked;
  }
  return result;
}

}  // namespace g2v
