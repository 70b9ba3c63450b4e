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

#ifndef G2V_CLI_HPP_
#define G2V_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace g2v {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

std::string Synopsis();

// Runs one subcommand. Errors are reported on `err` as a single line
// "error: <Kind>: <message>".
int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int Dispatch(int argc, char** argv);

}  // namespace g2v

#endif  // G2V_CLI_HPP_
