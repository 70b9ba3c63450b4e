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

namespace g2v {

std::string_view FusionStrategyName(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kNone: return "none";
    case FusionStrategy::kAttention: return "attention";
    case FusionStrategy::kBilinear: return "bilinear";
    case FusionStrategy::kMlp: return "mlp";
  }
  return "none";
}

FusionStrategy ParseFusionStrategy(std::string_view name) {
  if (name == "none") return FusionStrategy::kNone;
  if (name == "attention") return FusionStrategy::kAttention;
  if (name == "bilinear") return FusionStrategy::kBilinear;
  if (name == "mlp") return FusionStrategy::kMlp;
  throw Error(ErrorKind::kInvalidValue, "fusion strategy '" + std::string(name) + "'");
}

std::string_view GateModeName(GateMode m) {
  return m == GateMode::kFixed ? "fixed" : "learnable";
}

GateMode ParseGateMode(std::string_view name) {
  if (name == "fixed") return GateMode::kFixed;
  if (name == "learnable") return GateMode::kLearnable;
  throw Error(ErrorKind::kInvalidValue, "gate mode '" + std::string(name) + "'");
}

}  // namespace g2v
