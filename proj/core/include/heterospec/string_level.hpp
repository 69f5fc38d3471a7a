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

#ifndef HETEROSPEC_STRING_LEVEL_HPP_
#define HETEROSPEC_STRING_LEVEL_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "heterospec/engine.hpp"
#include "heterospec/lm.hpp"
#include "heterospec/normalizer.hpp"
#include "heterospec/random.hpp"
#include "heterospec/vocab.hpp"

namespace heterospec {

inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

struct RealignmentWindow {
  std::size_t lookbehind = 5;
};

// Keep old[0..keep_old) and append new[new_from..).
struct Splice {
  std::size_t keep_old = 0;
  std::size_t new_from = 0;
  std::size_t overlap = 0;
};

// Finds the longest run of equal tokens between the last `lookbehind` ids of
// `old_ids` and anywhere in `new_ids`. Ties prefer the run ending latest in
// old, then earliest in new. An empty `old_ids` splices at (0, 0). Throws
// Error(kRealignmentFailure) when no token matches inside the window.
Splice realign(std::span<const TokenId> old_ids,
               std::span<const TokenId> new_ids, RealignmentWindow window);

// Model-side context cache. Invariant: ids() is always a prefix of the most
// recent true context; a divergent update truncates to the longest common
// prefix before extending.
class PrefixCache {
 public:
  // Returns how many cached ids were reused.
  std::size_t sync(std::span<const TokenId> true_context);

  const std::vector<TokenId>& ids() const noexcept { return ids_; }
  std::size_t truncations() const noexcept { return truncations_; }
  std::size_t reused() const noexcept { return reused_; }
  std::size_t recomputed() const noexcept { return recomputed_; }

 private:
  std::vector<TokenId> ids_;
  std::size_t truncations_ = 0;
  std::size_t reused_ = 0;
  std::size_t recomputed_ = 0;
};

// Decides whether T(s)_1 can still change when the drafter extends s. It
// cannot once s is non-empty and no target token s ⊕ y exists for which some
// concatenation of drafter tokens starts with y.
class FirstTokenIndex {
 public:
  FirstTokenIndex(const Vocabulary& target, const Vocabulary& drafter);

  bool determined(std::string_view concat) const;

 private:
  std::unordered_set<std::string> open_prefixes_;
};

enum class LookaheadKind { kFixedN, kNMax, kEarlyStop };

LookaheadKind parse_lookahead_kind(std::string_view tag);
std::string_view lookahead_kind_name(LookaheadKind kind);

// Stopping rule for drafting. fixed_n and n_max stop after exactly n drafts
// (n_max carries the precomputed maximum); early_stop stops after n drafts or
// as soon as the first target token is determined.
struct LookaheadPolicy {
  LookaheadKind kind = LookaheadKind::kFixedN;
  std::size_t n = 1;

  static LookaheadPolicy fixed_n(std::size_t n) {
    return {LookaheadKind::kFixedN, n};
  }
  static LookaheadPolicy n_max(std::size_t n) {
    return {LookaheadKind::kNMax, n};
  }
  static LookaheadPolicy early_stop(std::size_t n) {
    return {LookaheadKind::kEarlyStop, n};
  }

  bool halts(std::size_t drafts, std::string_view concat,
             const FirstTokenIndex& index) const;
};

struct PsiEntry {
  double psi = 0.0;
  // Explored draft sequences whose concatenation is exactly this token.
  std::size_t decomposition_count = 0;
  // Halting draft sequences whose first target token is this token.
  std::size_t sequence_count = 0;
};

struct PsiTable {
  std::vector<TokenId> context;
  std::map<TokenId, PsiEntry> entries;  // keyed by target id
  std::size_t nodes_expanded = 0;

  double psi(TokenId t) const;
  double total() const;
  Distribution as_vector(std::size_t target_size) const;
};

// [{"token_text", "psi", "count"}, ...] in target id order.
std::string psi_table_to_json(const PsiTable& table, const Vocabulary& target);

// ψ(t) = Σ Π q(d_j) over the drafter sequences that halt under `policy` with
// T(d_1 ⊕ … ⊕ d_i)_1 = t. Depth-first over the draft tree; every node counts
// toward the budget and Error(kPsiBudgetExceeded) is thrown past it.
PsiTable compute_psi(const ConditionalModel& drafter,
                     std::span<const TokenId> drafter_context,
                     const Vocabulary& target, const LookaheadPolicy& policy,
                     std::size_t node_budget = kDefaultNodeBudget,
                     Temperature temp = {});

// Largest number of drafts ever needed before T(d_1 ⊕ …)_1 is determined.
// Throws Error(kSearchBudgetExceeded) past `state_budget` distinct states.
std::size_t compute_n_max(const Vocabulary& drafter, const Vocabulary& target,
                          std::size_t state_budget = kDefaultNodeBudget);

// min(1, p(t1) / ψ(t1)); 1 when p(t1) >= ψ(t1).
double slrs_acceptance_probability(std::span<const double> p,
                                   std::span<const double> psi, TokenId t1);

// Accepts t1 if p(t1) >= ψ(t1) or u <= p(t1) / ψ(t1); otherwise returns a
// sample of (p - min(p, ψ)) / (1 - Σ min(p, ψ)).
TokenId slrs_verify(std::span<const double> p, const PsiTable& psi,
                    TokenId drafted_first_token, double u, RandomSource& rng,
                    ResidualRule residual = &residual_distribution);

struct StringLevelConfig {
  std::size_t lookahead = 1;  // exact-match drafts per iteration
  LookaheadPolicy policy{};   // rejection-sampling stopping rule
  Temperature temperature{};
  RealignmentWindow window{};
  Normalizer drafter_normalizer{};
  std::size_t psi_budget = kDefaultNodeBudget;
  ResidualRule residual = &residual_distribution;
};

struct SlemStep {
  VerificationOutcome outcome;  // target ids
  std::vector<TokenId> drafts;  // drafter ids
  std::vector<TokenId> candidates;
  bool realign_fallback = false;
  std::size_t drafter_cache_reused = 0;
  bool drafter_cache_truncated = false;
};

struct SlrsStep {
  std::vector<TokenId> drafts;
  TokenId drafted_first_token = 0;
  bool accepted = false;
  TokenId emitted = 0;
  double psi_first = 0.0;
  std::size_t psi_nodes = 0;
  std::size_t drafter_cache_reused = 0;
  bool drafter_cache_truncated = false;
};

// Per-run state for the string-level decoders: the shared text, the target
// ids that produced it, and the drafter's view of the text kept through a
// prefix cache. Emitted text is only ever appended to.
class StringLevelSession {
 public:
  // Requires T ↠ D* and D ↠ T* (greedy); throws Error(kInvalidArgument).
  StringLevelSession(ModelPtr target, ModelPtr drafter,
                     StringLevelConfig config);

  // Throws TokenizationFailure if the prompt is not expressible in T.
  void reset(std::string_view prompt);

  const std::string& text() const noexcept { return text_; }
  const std::string& prompt() const noexcept { return prompt_; }
  const std::vector<TokenId>& target_context() const noexcept {
    return target_ctx_;
  }
  const std::vector<TokenId>& drafter_context() const noexcept {
    return drafter_cache_.ids();
  }
  const StringLevelConfig& config() const noexcept { return config_; }
  const FirstTokenIndex& first_token_index() const noexcept { return index_; }

  // One exact-match iteration; emits 1..m+1 target tokens.
  SlemStep slem_step(RandomSource& rng);

  // One rejection-sampling iteration; emits exactly one target token. A
  // precomputed table must belong to the current drafter context.
  SlrsStep slrs_step(RandomSource& rng, const PsiTable* precomputed = nullptr);

  // ψ for the current drafter context under config().policy.
  PsiTable current_psi() const;

 private:
  struct DrafterSync {
    std::size_t reused = 0;
    bool truncated = false;
  };
  DrafterSync sync_drafter();
  void append(std::span<const TokenId> emitted);

  ModelPtr target_;
  ModelPtr drafter_;
  StringLevelConfig config_;
  FirstTokenIndex index_;
  std::string prompt_;
  std::string text_;
  std::vector<TokenId> target_ctx_;
  PrefixCache drafter_cache_;
};

}  // namespace heterospec

#endif  // HETEROSPEC_STRING_LEVEL_HPP_
