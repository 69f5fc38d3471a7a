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

#include "heterospec/decoder.hpp"

#include <algorithm>

#include "heterospec/errors.hpp"
#include "json.hpp"

namespace heterospec {

Algorithm parse_algorithm(std::string_view tag) {
  if (tag == "sd") return Algorithm::kSd;
  if (tag == "union") return Algorithm::kUnion;
  if (tag == "tli") return Algorithm::kTli;
  if (tag == "slem") return Algorithm::kSlem;
  if (tag == "slrs") return Algorithm::kSlrs;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown algorithm '" + std::string(tag) + "'");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kSd:
      return "sd";
    case Algorithm::kUnion:
      return "union";
    case Algorithm::kTli:
      return "tli";
    case Algorithm::kSlem:
      return "slem";
    case Algorithm::kSlrs:
      return "slrs";
  }
  return "?";
}

bool is_string_level(Algorithm a) {
  return a == Algorithm::kSlem || a == Algorithm::kSlrs;
}

std::string to_json_line(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["algorithm"] = algorithm_name(r.algorithm);
  j["drafts"] = r.drafts;
  j["draft_texts"] = r.draft_texts;
  if (is_string_level(r.algorithm)) j["candidates"] = r.candidates;
  j["accept_flags"] = r.accept_flags;
  j["rejected_at"] = r.rejected_at ? nlohmann::ordered_json(*r.rejected_at)
                                   : nlohmann::ordered_json(nullptr);
  j["emitted"] = r.emitted;
  j["emitted_text"] = r.emitted_text;
  if (r.empty_intersection) j["empty_intersection"] = true;
  if (is_string_level(r.algorithm)) {
    j["drafter_cache_reused"] = r.drafter_cache_reused;
    j["drafter_cache_truncated"] = r.drafter_cache_truncated;
  }
  if (r.algorithm == Algorithm::kSlem) j["realign_fallback"] = r.realign_fallback;
  if (r.algorithm == Algorithm::kSlrs) j["psi_nodes"] = r.psi_nodes;
  return j.dump();
}

namespace {

// Appends at most `room` of `emitted` and returns how many were kept.
std::size_t take(std::vector<TokenId>& out, const std::vector<TokenId>& emitted,
                 std::size_t room) {
  const std::size_t n = std::min(room, emitted.size());
  out.insert(out.end(), emitted.begin(), emitted.begin() + n);
  return n;
}

void finish_record(StepRecord& rec, const Vocabulary& tv,
                   const std::vector<TokenId>& kept) {
  rec.emitted = kept;
  rec.emitted_text = tv.decode(kept);
}

GenerationResult run_token_level(ModelPtr target, ModelPtr drafter,
                                 std::string_view prompt,
                                 const GenerationConfig& cfg, RandomSource& rng,
                                 const TraceSink& sink) {
  const Vocabulary& tv = target->vocab();
  const ProjectionMode mode = cfg.algorithm == Algorithm::kTli
                                  ? ProjectionMode::kIntersection
                                  : ProjectionMode::kUnion;
  ProjectedDrafter pd(drafter, target->vocab_ptr(), mode);
  if (cfg.algorithm == Algorithm::kSd && !pd.is_identity()) {
    throw Error(ErrorCode::kInvalidArgument,
                "standard speculative decoding needs identical vocabularies; "
                "use union or tli");
  }
  const StepConfig step_cfg{cfg.lookahead, cfg.temperature, cfg.residual};

  GenerationResult res;
  std::vector<TokenId> ctx = tv.encode(prompt);
  while (res.tokens.size() < cfg.max_new_tokens) {
    SdStep s = sd_step(*target, pd, ctx, step_cfg, rng);
    StepRecord rec;
    rec.step = res.steps++;
    rec.algorithm = cfg.algorithm;
    rec.drafts = s.drafts.draft_ids;
    for (TokenId d : rec.drafts) rec.draft_texts.push_back(pd.text(d));
    rec.accept_flags = s.outcome.accept_flags;
    rec.rejected_at = s.outcome.rejected_at;
    rec.empty_intersection = s.empty_intersection;
    res.drafts_proposed += s.drafts.lookahead();
    res.drafts_accepted += s.outcome.accepted.size();

    std::vector<TokenId> kept;
    take(kept, s.outcome.emitted(), cfg.max_new_tokens - res.tokens.size());
    res.tokens.insert(res.tokens.end(), kept.begin(), kept.end());
    ctx.insert(ctx.end(), kept.begin(), kept.end());
    finish_record(rec, tv, kept);
    if (sink) sink(rec);
  }
  res.text = std::string(prompt) + tv.decode(res.tokens);
  return res;
}

GenerationResult run_string_level(ModelPtr target, ModelPtr drafter,
                                  std::string_view prompt,
                                  const GenerationConfig& cfg,
                                  RandomSource& rng, const TraceSink& sink) {
  const Vocabulary& tv = target->vocab();
  const Vocabulary& dv = drafter->vocab();
  StringLevelConfig sl;
  sl.lookahead = cfg.lookahead;
  sl.temperature = cfg.temperature;
  sl.window = cfg.window;
  sl.drafter_normalizer = cfg.drafter_normalizer;
  sl.psi_budget = cfg.psi_budget;
  sl.residual = cfg.residual;
  switch (cfg.lookahead_kind) {
    case LookaheadKind::kFixedN:
      sl.policy = LookaheadPolicy::fixed_n(cfg.lookahead);
      break;
    case LookaheadKind::kNMax:
      sl.policy = LookaheadPolicy::n_max(compute_n_max(dv, tv, cfg.psi_budget));
      break;
    case LookaheadKind::kEarlyStop:
      sl.policy = LookaheadPolicy::early_stop(cfg.lookahead);
      break;
  }
  StringLevelSession session(target, drafter, sl);
  session.reset(prompt);

  GenerationResult res;
  while (res.tokens.size() < cfg.max_new_tokens) {
    StepRecord rec;
    rec.step = res.steps++;
    rec.algorithm = cfg.algorithm;
    std::vector<TokenId> emitted;
    if (cfg.algorithm == Algorithm::kSlem) {
      SlemStep s = session.slem_step(rng);
      rec.drafts = s.drafts;
      rec.candidates = s.candidates;
      rec.accept_flags = s.outcome.accept_flags;
      rec.rejected_at = s.outcome.rejected_at;
      rec.realign_fallback = s.realign_fallback;
      rec.drafter_cache_reused = s.drafter_cache_reused;
      rec.drafter_cache_truncated = s.drafter_cache_truncated;
      res.drafts_proposed += s.candidates.size();
      res.drafts_accepted += s.outcome.accepted.size();
      emitted = s.outcome.emitted();
    } else {
      SlrsStep s = session.slrs_step(rng);
      rec.drafts = s.drafts;
      rec.candidates = {s.drafted_first_token};
      rec.accept_flags = {s.accepted};
      if (!s.accepted) rec.rejected_at = 1;
      rec.drafter_cache_reused = s.drafter_cache_reused;
      rec.drafter_cache_truncated = s.drafter_cache_truncated;
      rec.psi_nodes = s.psi_nodes;
      res.drafts_proposed += 1;
      res.drafts_accepted += s.accepted ? 1 : 0;
      emitted = {s.emitted};
    }
    for (TokenId d : rec.drafts) rec.draft_texts.push_back(dv.text(d));
    std::vector<TokenId> kept;
    take(kept, emitted, cfg.max_new_tokens - res.tokens.size());
    res.tokens.insert(res.tokens.end(), kept.begin(), kept.end());
    finish_record(rec, tv, kept);
    if (sink) sink(rec);
  }
  res.text = std::string(prompt) + tv.decode(res.tokens);
  return res;
}

}  // namespace

GenerationResult generate(ModelPtr target, ModelPtr drafter,
                          std::string_view prompt,
                          const GenerationConfig& config, RandomSource& rng,
                          const TraceSink& sink) {
  if (!target || !drafter) {
    throw Error(ErrorCode::kInvalidArgument, "generation needs two models");
  }
  if (is_string_level(config.algorithm)) {
    return run_string_level(std::move(target), std::move(drafter), prompt,
                            config, rng, sink);
  }
  return run_token_level(std::move(target), std::move(drafter), prompt, config,
                         rng, sink);
}

GenerationResult generate_autoregressive(const ConditionalModel& target,
                                         std::string_view prompt,
                                         std::size_t max_new_tokens,
                                         Temperature temp, RandomSource& rng) {
  const Vocabulary& tv = target.vocab();
  GenerationResult res;
  std::vector<TokenId> ctx = tv.encode(prompt);
  while (res.tokens.size() < max_new_tokens) {
    const TokenId t = sample(target, ctx, temp, rng);
    ctx.push_back(t);
    res.tokens.push_back(t);
    ++res.steps;
  }
  res.text = std::string(prompt) + tv.decode(res.tokens);
  return res;
}

}  // namespace heterospec
