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

#ifndef G2V_TRAINER_HPP_
#define G2V_TRAINER_HPP_

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "g2v/model.hpp"

namespace g2v {

struct TrainConfig {
  double lr = 1e-4;
  // Step size and gradient multiplier for the video branch (W_f and every
  // other "fusion." parameter).
  double video_lr = 1e-4;
  double grad_scale = 1.0;
  int batch_size = 200;
  int max_epochs = 100;
  int patience = 20;
  uint64_t seed = 0;

  void Validate() const;
};

// -[y ln p + (1 - y) ln(1 - p)]
double BceLoss(double p, int label);
double MeanBceLoss(std::span<const double> p, std::span<const int> labels);

// Adam with beta = (0.9, 0.999), eps = 1e-8. Video-branch gradients are
// multiplied by grad_scale before they touch the moment estimates.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(LinkModel<float>& model, const TrainConfig& config);
  int steps() const { return steps_; }

 private:
  struct Moments {
    Mat<float> m;
    Mat<float> v;
  };

  double beta1_, beta2_, eps_;
  int steps_ = 0;
  std::map<std::string, Moments> state_;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_ap = 0.0;
  double elapsed_ms = 0.0;
};

// "epoch,train_loss,val_ap,elapsed_ms"
std::string EpochLogHeader();
std::string FormatEpochLog(const EpochLog& entry);

struct FitResult {
  LinkModel<float> best;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_ap = 0.0;
};

using Validator = std::function<double(LinkModel<float>&)>;

// Epoch loop over pre-assembled chronological batches (positives and their
// negatives). After each epoch `validate` scores the model; training stops
// after `patience` epochs without improvement or at max_epochs and the best
// validated model is returned. Throws Error(kNonFiniteLoss) naming the
// offending batch.
FitResult Fit(LinkModel<float> model, const std::vector<std::vector<SampleInput>>& batches,
              const Validator& validate, const TrainConfig& config,
              const std::function<void(const EpochLog&)>& on_epoch = {});

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckOptions {
  double h = 1e-3;
  size_t sample_params = 200;
  uint64_t seed = 0;
  // Multiplies the analytic gradient before comparison; != 1 is a
  // sensitivity control that must make the check fail.
  double corrupt_factor = 1.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t checked = 0;
  // Coordinates whose +-h stencil switched a ReLU or clamp branch. These
  // are redrawn and not counted in `checked`.
  size_t kinks_skipped = 0;
  std::string worst_param;
};

// Relative error |a - n| / max(|a|, |n|), defined as 0 when both sides are
// below 1e-10 in magnitude.
double RelativeError(double analytic, double numeric);

// Central differences of the mean batch loss against tape gradients on a
// random sample of parameter coordinates.
GradCheckResult FiniteDiffCheck(LinkModel<double>& model, std::span<const SampleInput> batch,
                                const GradCheckOptions& options = {});

}  // namespace g2v

#endif  // G2V_TRAINER_HPP_
