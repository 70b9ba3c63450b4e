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

#ifndef G2V_METRICS_HPP_
#define G2V_METRICS_HPP_

#include <span>

namespace g2v {

// Mean of precision@k over the ranks of the positives, scores sorted in
// descending order (ties keep input order). Throws NoPositives.
double AveragePrecision(std::span<const double> scores, std::span<const int> labels);

// Mann-Whitney estimate, ties counted as 1/2. Throws SingleClass.
double AucRoc(std::span<const double> scores, std::span<const int> labels);

}  // namespace g2v

#endif  // G2V_METRICS_HPP_
