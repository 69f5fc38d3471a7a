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

#ifndef HETEROSPEC_DECODER_HPP_
#define HETEROSPEC_DECODER_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heterospec/engine.hpp"
#include "heterospec/lm.hpp"
#include "heterospec/normalizer.hpp"
#include "heterospec/string_level.hpp"

namespace heterospec {

enum class Algorithm { kSd, kUnion, kTli, kSlem, kSlrs };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kSd, Algorithm::kUnion, Algorithm::kTli, Algorithm::kSlem,
    Algorithm::kSlrs};

Algorithm parse_algorithm(std::string_view tag);
std::string_view algorithm_name(Algorithm a);
bool is_string_level(Algorithm a);

struct GenerationConfig {
  Algorithm algorithm = Algorithm::kSd;
  std::size_t lookahead = 4;
  Temperature temperature{};
  std::size_t max_new_tokens = 32;
  RealignmentWindow window{};
  Normalizer drafter_normalizer{};
  LookaheadKind lookahead_kind = LookaheadKind::kEarlyStop;
  std::size_t psi_budget = kDefaultNodeBudget;
  ResidualRule residual = &residual_distribution;
};

// One line of the JSON-lines trace.
struct StepRecord {
  std::size_t step = 0;
  Algorithm algorithm = Algorithm::kSd;
  std::vector<TokenId> drafts;  // drafter space (index space for token level)
  std::vector<std::string> draft_texts;
  std::vector<TokenId> candidates;  // string level only
  std::vector<bool> accept_flags;
  std::optional<std::size_t> rejected_at;
  std::vector<TokenId> emitted;  // target ids
  std::string emitted_text;
  bool empty_intersection = false;
  bool realign_fallback = false;
  std::size_t drafter_cache_reused = 0;
  bool drafter_cache_truncated = false;
  std::size_t psi_nodes = 0;
};

std::string to_json_line(const StepRecord& record);

using TraceSink = std::function<void(const StepRecord&)>;

struct GenerationResult {
  std::string text;  // prompt followed by every emitted token text
  std::vector<TokenId> tokens;
  std::size_t steps = 0;
  std::size_t drafts_proposed = 0;
  std::size_t drafts_accepted = 0;
};

// Runs the chosen algorithm until max_new_tokens target tokens exist. The
// last iteration's surplus is dropped so the output length is exact.
GenerationResult generate(ModelPtr target, ModelPtr drafter,
                          std::string_view prompt,
                          const GenerationConfig& config, RandomSource& rng,
                          const TraceSink& sink = {});

GenerationResult generate_autoregressive(const ConditionalModel& target,
                                         std::string_view prompt,
                                         std::size_t max_new_tokens,
                                         Temperature temp, RandomSource& rng);

}  // namespace heterospec

#endif  // HETEROSPEC_DECODER_HPP_
