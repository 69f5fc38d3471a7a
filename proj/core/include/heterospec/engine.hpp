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

#ifndef HETEROSPEC_ENGINE_HPP_
#define HETEROSPEC_ENGINE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heterospec/lm.hpp"
#include "heterospec/random.hpp"
#include "heterospec/vocab.hpp"

namespace heterospec {

struct DraftBatch {
  std::vector<TokenId> draft_ids;
  std::vector<Distribution> draft_dists;

  std::size_t lookahead() const noexcept { return draft_ids.size(); }
};

struct VerificationOutcome {
  std::vector<TokenId> accepted;
  // 1-based position of the rejected draft; empty when every draft passed.
  std::optional<std::size_t> rejected_at;
  // Residual sample after a rejection, otherwise the extra token sampled
  // from the target after the last accepted draft.
  TokenId residual_token = 0;
  std::vector<bool> accept_flags;

  std::vector<TokenId> emitted() const;
};

// p' / q' construction from a drafter over D into an index space shared with
// the target over T. Ids are matched by token text, never by numeric id.
//
//  * kUnion: index space T ∪ D. Ids 0..|T|-1 are the target ids, then the
//    tokens of D \ T in drafter order. q' is q carried over unchanged.
//  * kIntersection: index space T. q'(x) = q(x) / Σ_{y∈T∩D} q(y) on T ∩ D and
//    zero elsewhere; throws Error(kEmptyIntersectionMass) if that sum is 0.
enum class ProjectionMode { kUnion, kIntersection };

class ProjectedDrafter {
 public:
  ProjectedDrafter(ModelPtr base, VocabularyPtr target_vocab,
                   ProjectionMode mode);

  ProjectionMode mode() const noexcept { return mode_; }
  const ConditionalModel& base() const noexcept { return *base_; }
  const Vocabulary& target_vocab() const noexcept { return *target_; }
  std::size_t index_size() const noexcept { return index_texts_.size(); }
  const std::string& text(TokenId index_id) const;
  // True when T and D hold the same texts under the same ids.
  bool is_identity() const noexcept { return identity_; }

  // Drafter distribution in index space for an index-space context.
  Distribution distribution(std::span<const TokenId> context,
                            Temperature temp) const;
  // Projects a distribution over D into index space.
  Distribution project(std::span<const double> q) const;
  // Zero-pads a distribution over T into index space.
  Distribution lift_target(std::span<const double> p) const;

  // Index-space context rewritten for the drafter: a token whose text is in
  // D maps to that id, otherwise its text is encoded with D, and it is
  // skipped when D cannot express it.
  std::vector<TokenId> drafter_context(std::span<const TokenId> context) const;

 private:
  ModelPtr base_;
  VocabularyPtr target_;
  ProjectionMode mode_;
  bool identity_ = false;
  std::vector<std::string> index_texts_;
  std::vector<TokenId> drafter_to_index_;  // -1 when dropped
  std::vector<std::vector<TokenId>> index_to_drafter_;
};

ProjectedDrafter project_union(ModelPtr q, VocabularyPtr target);
ProjectedDrafter project_intersection(ModelPtr q, VocabularyPtr target);

// min(1, p[draft] / q[draft]); throws Error(kInvalidDraft) if q[draft] == 0.
double acceptance_probability(std::span<const double> p,
                              std::span<const double> q, TokenId draft);

// Accepts iff u <= min(1, p[draft] / q[draft]).
bool verify_token(std::span<const double> p, std::span<const double> q,
                  TokenId draft, double u);

// (p - min(p, q)) / (1 - Σ min(p, q)). Throws Error(kDegenerateResidual)
// when the denominator is below 1e-12.
Distribution residual_distribution(std::span<const double> p,
                                   std::span<const double> q);

TokenId residual_sample(std::span<const double> p, std::span<const double> q,
                        RandomSource& rng);

// Hook for the residual formula so verification suites can run a
// deliberately broken variant as a negative control.
using ResidualRule = Distribution (*)(std::span<const double>,
                                      std::span<const double>);

struct StepConfig {
  std::size_t lookahead = 1;
  Temperature temperature{};
  ResidualRule residual = &residual_distribution;
};

struct SdStep {
  VerificationOutcome outcome;
  DraftBatch drafts;
  // Set when drafting stopped early because the projected drafter had no
  // mass on T ∩ D.
  bool empty_intersection = false;
};

// One iteration of standard speculative decoding in the drafter's index
// space. Random choices are made in this order: the drafts, one acceptance
// test per draft until the first rejection, then one residual (or extra)
// sample. Emits between 1 and lookahead + 1 tokens, all target ids.
SdStep sd_step(const ConditionalModel& target, const ProjectedDrafter& drafter,
               std::span<const TokenId> context, const StepConfig& config,
               RandomSource& rng);

// Homogeneous convenience overload; throws Error(kInvalidArgument) unless both
// models share the same vocabulary.
SdStep sd_step(const ConditionalModel& target, ModelPtr drafter,
               std::span<const TokenId> context, const StepConfig& config,
               RandomSource& rng);

}  // namespace heterospec

#endif  // HETEROSPEC_ENGINE_HPP_
