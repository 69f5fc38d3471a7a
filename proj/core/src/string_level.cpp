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

#include "heterospec/string_level.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "heterospec/errors.hpp"

namespace heterospec {

Splice realign(std::span<const TokenId> old_ids,
               std::span<const TokenId> new_ids, RealignmentWindow window) {
  if (old_ids.empty()) return {};
  const std::size_t start =
      old_ids.size() - std::min(window.lookbehind, old_ids.size());
  Splice best;
  // run[j] is the matched run length ending at (i, j) for the current i.
  std::vector<std::size_t> run(new_ids.size() + 1, 0), prev(new_ids.size() + 1, 0);
  for (std::size_t i = start; i < old_ids.size(); ++i) {
    for (std::size_t j = 0; j < new_ids.size(); ++j) {
      run[j + 1] = old_ids[i] == new_ids[j] ? prev[j] + 1 : 0;
      const std::size_t len = run[j + 1];
      if (len == 0) continue;
      // Later i always wins ties since i only grows; earlier j wins within i.
      if (len > best.overlap ||
          (len == best.overlap && i + 1 > best.keep_old)) {
        best = {i + 1, j + 1, len};
      }
    }
    std::swap(run, prev);
  }
  if (best.overlap == 0) {
    throw Error(ErrorCode::kRealignmentFailure,
                "no overlapping token inside the realignment window");
  }
  return best;
}

std::size_t PrefixCache::sync(std::span<const TokenId> true_context) {
  std::size_t lcp = 0;
  while (lcp < ids_.size() && lcp < true_context.size() &&
         ids_[lcp] == true_context[lcp]) {
    ++lcp;
  }
  if (lcp < ids_.size()) {
    ++truncations_;
    ids_.resize(lcp);
  }
  reused_ += lcp;
  recomputed_ += true_context.size() - lcp;
  ids_.insert(ids_.end(), true_context.begin() + lcp, true_context.end());
  return lcp;
}

namespace {

// True when some concatenation of drafter tokens starts with y.
bool drafter_can_begin_with(const Vocabulary& drafter, std::string_view y) {
  std::vector<bool> reached(y.size() + 1, false);
  reached[0] = true;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!reached[i]) continue;
    const std::string_view rest = y.substr(i);
    for (const auto& d : drafter.texts()) {
      if (d.size() >= rest.size()) {
        if (d.compare(0, rest.size(), rest) == 0) return true;
      } else if (rest.compare(0, d.size(), d) == 0) {
        reached[i + d.size()] = true;
      }
    }
  }
  return reached[y.size()];
}

}  // namespace

FirstTokenIndex::FirstTokenIndex(const Vocabulary& target,
                                 const Vocabulary& drafter) {
  for (const auto& t : target.texts()) {
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (drafter_can_begin_with(drafter, std::string_view(t).substr(k))) {
        open_prefixes_.insert(t.substr(0, k));
      }
    }
  }
}

bool FirstTokenIndex::determined(std::string_view concat) const {
  return !concat.empty() && !open_prefixes_.count(std::string(concat));
}

LookaheadKind parse_lookahead_kind(std::string_view tag) {
  if (tag == "fixed_n") return LookaheadKind::kFixedN;
  if (tag == "n_max") return LookaheadKind::kNMax;
  if (tag == "early_stop") return LookaheadKind::kEarlyStop;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown lookahead policy '" + std::string(tag) + "'");
}

std::string_view lookahead_kind_name(LookaheadKind kind) {
  switch (kind) {
    case LookaheadKind::kFixedN:
      return "fixed_n";
    case LookaheadKind::kNMax:
      return "n_max";
    case LookaheadKind::kEarlyStop:
      return "early_stop";
  }
  return "?";
}

bool LookaheadPolicy::halts(std::size_t drafts, std::string_view concat,
                            const FirstTokenIndex& index) const {
  if (drafts >= std::max<std::size_t>(n, 1)) return true;
  return kind == LookaheadKind::kEarlyStop && drafts > 0 &&
         index.determined(concat);
}

double PsiTable::psi(TokenId t) const {
  auto it = entries.find(t);
  return it == entries.end() ? 0.0 : it->second.psi;
}

double PsiTable::total() const {
  double s = 0.0;
  for (const auto& [t, e] : entries) s += e.psi;
  return s;
}

Distribution PsiTable::as_vector(std::size_t target_size) const {
  Distribution out(target_size, 0.0);
  for (const auto& [t, e] : entries) out.at(static_cast<std::size_t>(t)) = e.psi;
  return out;
}

std::string psi_table_to_json(const PsiTable& table, const Vocabulary& target) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& [t, e] : table.entries) {
    if (e.sequence_count == 0) continue;
    rows.push_back({{"token_text", target.text(t)},
                    {"psi", e.psi},
                    {"count", e.decomposition_count}});
  }
  return rows.dump();
}

namespace {

const ConditionalModel& checked(const ModelPtr& m) {
  if (!m) throw Error(ErrorCode::kInvalidArgument, "string-level decoding needs two models");
  return *m;
}

TokenId first_target_token(const Vocabulary& target, std::string_view concat) {
  const std::size_t len = target.longest_prefix(concat);
  if (len == 0) throw TokenizationFailure(std::string(concat), 0);
  return *target.find(concat.substr(0, len));
}

class PsiSearch {
 public:
  PsiSearch(const ConditionalModel& drafter, const Vocabulary& target,
            const LookaheadPolicy& policy, std::size_t budget, Temperature temp,
            PsiTable& table)
      : drafter_(drafter),
        target_(target),
        policy_(policy),
        index_(target, drafter.vocab()),
        budget_(budget),
        temp_(temp),
        table_(table),
        ctx_(table.context) {}

  void visit(std::size_t depth, double weight) {
    if (depth > 0) {
      if (auto exact = target_.find(concat_)) {
        ++table_.entries[*exact].decomposition_count;
      }
      if (policy_.halts(depth, concat_, index_)) {
        PsiEntry& e = table_.entries[first_target_token(target_, concat_)];
        e.psi += weight;
        ++e.sequence_count;
        return;
      }
    }
    const Distribution q = distribution(drafter_, ctx_, temp_);
    for (std::size_t d = 0; d < q.size(); ++d) {
      if (!(q[d] > 0.0)) continue;
      if (++table_.nodes_expanded > budget_) {
        throw BudgetExceeded(ErrorCode::kPsiBudgetExceeded,
                             "psi search exceeded its node budget", budget_);
      }
      const std::string& text = drafter_.vocab().texts()[d];
      ctx_.push_back(static_cast<TokenId>(d));
      concat_ += text;
      visit(depth + 1, weight * q[d]);
      concat_.resize(concat_.size() - text.size());
      ctx_.pop_back();
    }
  }

 private:
  const ConditionalModel& drafter_;
  const Vocabulary& target_;
  const LookaheadPolicy& policy_;
  FirstTokenIndex index_;
  std::size_t budget_;
  Temperature temp_;
  PsiTable& table_;
  std::vector<TokenId> ctx_;
  std::string concat_;
};

}  // namespace

PsiTable compute_psi(const ConditionalModel& drafter,
                     std::span<const TokenId> drafter_context,
                     const Vocabulary& target, const LookaheadPolicy& policy,
                     std::size_t node_budget, Temperature temp) {
  PsiTable table;
  table.context.assign(drafter_context.begin(), drafter_context.end());
  PsiSearch search(drafter, target, policy, node_budget, temp, table);
  search.visit(0, 1.0);
  return table;
}

std::size_t compute_n_max(const Vocabulary& drafter, const Vocabulary& target,
                          std::size_t state_budget) {
  const FirstTokenIndex index(target, drafter);
  std::unordered_map<std::string, std::size_t> memo;
  std::size_t expanded = 0;
  // Every undetermined string is a proper prefix of a target token, so the
  // recursion depth is bounded by the longest target token.
  auto solve = [&](auto&& self, const std::string& s) -> std::size_t {
    if (index.determined(s)) return 0;
    if (auto it = memo.find(s); it != memo.end()) return it->second;
    if (++expanded > state_budget) {
      throw BudgetExceeded(ErrorCode::kSearchBudgetExceeded,
                           "n_max search exceeded its state budget",
                           state_budget);
    }
    std::size_t worst = 0;
    for (const auto& d : drafter.texts()) worst = std::max(worst, self(self, s + d));
    memo[s] = worst + 1;
    return worst + 1;
  };
  return solve(solve, std::string());
}

double slrs_acceptance_probability(std::span<const double> p,
                                   std::span<const double> psi, TokenId t1) {
  if (t1 < 0 || static_cast<std::size_t>(t1) >= p.size() ||
      static_cast<std::size_t>(t1) >= psi.size() || !(psi[t1] > 0.0)) {
    throw Error(ErrorCode::kInvalidDraft,
                "drafted first token has no psi mass");
  }
  return p[t1] >= psi[t1] ? 1.0 : p[t1] / psi[t1];
}

TokenId slrs_verify(std::span<const double> p, const PsiTable& psi,
                    TokenId drafted_first_token, double u, RandomSource& rng,
                    ResidualRule residual) {
  const Distribution psi_vec = psi.as_vector(p.size());
  if (u <= slrs_acceptance_probability(p, psi_vec, drafted_first_token)) {
    return drafted_first_token;
  }
  const Distribution r = residual(p, psi_vec);
  return static_cast<TokenId>(rng.categorical(r));
}

StringLevelSession::StringLevelSession(ModelPtr target, ModelPtr drafter,
                                       StringLevelConfig config)
    : target_(std::move(target)),
      drafter_(std::move(drafter)),
      config_(std::move(config)),
      index_(checked(target_).vocab(), checked(drafter_).vocab()) {
  if (!is_expressible(target_->vocab(), drafter_->vocab()) ||
      !is_expressible(drafter_->vocab(), target_->vocab())) {
    throw Error(ErrorCode::kInvalidArgument,
                "string-level decoding needs each vocabulary to express the other");
  }
  if (config_.policy.n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "lookahead policy needs n >= 1");
  }
}

void StringLevelSession::reset(std::string_view prompt) {
  target_ctx_ = target_->vocab().encode(prompt);
  prompt_ = std::string(prompt);
  text_ = prompt_;
  drafter_cache_ = PrefixCache();
}

StringLevelSession::DrafterSync StringLevelSession::sync_drafter() {
  const std::vector<TokenId> truth =
      drafter_->vocab().encode(config_.drafter_normalizer.apply(text_));
  const std::size_t before = drafter_cache_.truncations();
  DrafterSync out;
  out.reused = drafter_cache_.sync(truth);
  out.truncated = drafter_cache_.truncations() != before;
  return out;
}

void StringLevelSession::append(std::span<const TokenId> emitted) {
  for (TokenId id : emitted) {
    text_ += target_->vocab().text(id);
    target_ctx_.push_back(id);
  }
}

SlemStep StringLevelSession::slem_step(RandomSource& rng) {
  const Vocabulary& tv = target_->vocab();
  const Vocabulary& dv = drafter_->vocab();
  SlemStep step;
  const DrafterSync sync = sync_drafter();
  step.drafter_cache_reused = sync.reused;
  step.drafter_cache_truncated = sync.truncated;

  std::vector<TokenId> dctx = drafter_cache_.ids();
  std::string draft_text;
  for (std::size_t j = 0; j < config_.lookahead; ++j) {
    const Distribution q = distribution(*drafter_, dctx, config_.temperature);
    const auto d = static_cast<TokenId>(rng.categorical(q));
    step.drafts.push_back(d);
    dctx.push_back(d);
    draft_text += dv.text(d);
  }

  // Re-tokenize the drafted text together with a short tail of the shared
  // text, then keep only what follows the point where it realigns with the
  // target ids already emitted.
  const std::size_t k = std::min(config_.window.lookbehind, target_ctx_.size());
  bool spliced = false;
  if (k > 0 && !draft_text.empty()) {
    const std::span<const TokenId> old_ids(target_ctx_.data() + target_ctx_.size() - k, k);
    try {
      const std::string tail = config_.drafter_normalizer.apply(tv.decode(old_ids));
      const std::vector<TokenId> new_ids = tv.encode(tail + draft_text);
      const Splice s = realign(old_ids, new_ids, config_.window);
      if (s.keep_old == old_ids.size() && s.new_from < new_ids.size()) {
        step.candidates.assign(new_ids.begin() + s.new_from, new_ids.end());
        spliced = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRealignmentFailure &&
          e.code() != ErrorCode::kTokenizationFailure) {
        throw;
      }
    }
    step.realign_fallback = !spliced;
  }
  if (!spliced) step.candidates = tv.encode(draft_text);

  // One target sample per position, drawn up to the first mismatch.
  VerificationOutcome& out = step.outcome;
  std::vector<TokenId> ctx = target_ctx_;
  for (std::size_t j = 0;; ++j) {
    const Distribution p = distribution(*target_, ctx, config_.temperature);
    const auto sampled = static_cast<TokenId>(rng.categorical(p));
    if (j < step.candidates.size() && sampled == step.candidates[j]) {
      out.accept_flags.push_back(true);
      out.accepted.push_back(sampled);
      ctx.push_back(sampled);
      continue;
    }
    if (j < step.candidates.size()) {
      out.accept_flags.push_back(false);
      out.rejected_at = j + 1;
    }
    out.residual_token = sampled;
    break;
  }
  append(out.emitted());
  return step;
}

PsiTable StringLevelSession::current_psi() const {
  const std::vector<TokenId> ctx =
      drafter_->vocab().encode(config_.drafter_normalizer.apply(text_));
  return compute_psi(*drafter_, ctx, target_->vocab(), config_.policy,
                     config_.psi_budget, config_.temperature);
}

SlrsStep StringLevelSession::slrs_step(RandomSource& rng,
                                       const PsiTable* precomputed) {
  const Vocabulary& tv = target_->vocab();
  SlrsStep step;
  const DrafterSync sync = sync_drafter();
  step.drafter_cache_reused = sync.reused;
  step.drafter_cache_truncated = sync.truncated;

  std::vector<TokenId> dctx = drafter_cache_.ids();
  std::string concat;
  while (!config_.policy.halts(step.drafts.size(), concat, index_)) {
    const Distribution q = distribution(*drafter_, dctx, config_.temperature);
    const auto d = static_cast<TokenId>(rng.categorical(q));
    step.drafts.push_back(d);
    dctx.push_back(d);
    concat += drafter_->vocab().text(d);
  }
  step.drafted_first_token = first_target_token(tv, concat);

  PsiTable local;
  if (precomputed) {
    if (precomputed->context != drafter_cache_.ids()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "precomputed psi belongs to another drafter context");
    }
  } else {
    local = compute_psi(*drafter_, drafter_cache_.ids(), tv, config_.policy,
                        config_.psi_budget, config_.temperature);
  }
  const PsiTable& psi = precomputed ? *precomputed : local;
  step.psi_nodes = psi.nodes_expanded;
  step.psi_first = psi.psi(step.drafted_first_token);

  const Distribution p = distribution(*target_, target_ctx_, config_.temperature);
  const Distribution psi_vec = psi.as_vector(tv.size());
  step.accepted = rng.bernoulli(
      slrs_acceptance_probability(p, psi_vec, step.drafted_first_token));
  if (step.accepted) {
    step.emitted = step.drafted_first_token;
  } else {
    const Distribution r = config_.residual(p, psi_vec);
    step.emitted = static_cast<TokenId>(rng.categorical(r));
  }
  const TokenId emitted[] = {step.emitted};
  append(emitted);
  return step;
}

}  // namespace heterospec
