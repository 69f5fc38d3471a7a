// Copyright 2026 The heterospec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HETEROSPEC_CLI_CLI_HPP_
#define HETEROSPEC_CLI_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace heterospec::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // failed gate or module error
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBudget = 3;

// Runs one command line (args[0] is the program name). Reports go to `out`
// unless --out names a file; errors go to `err` as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace heterospec::cli

#endif  // HETEROSPEC_CLI_CLI_HPP_
