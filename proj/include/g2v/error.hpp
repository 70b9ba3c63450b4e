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

#ifndef G2V_ERROR_HPP_
#define G2V_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace g2v {

enum class ErrorKind {
  kMalformedRow,
  kNonMonotonicTimestamp,
  kInconsistentFeatureWidth,
  kTooFewEvents,
  kShapeMismatch,
  kCorruptCacheEntry,
  kBadMagic,
  kDimMismatch,
  kTruncatedFile,
  kNegativeDelta,
  kNonFiniteLoss,
  kNoPositives,
  kSingleClass,
  kEmptyEvalSet,
  kUnknownKey,
  kInvalidValue,
  kMissingEmbedding,
  kUsage,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// All recoverable failures in the library surface as this exception. The
// kind is stable and machine readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace g2v

#endif  // G2V_ERROR_HPP_
