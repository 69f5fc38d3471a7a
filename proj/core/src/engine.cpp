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

#include "heterospec/engine.hpp"

#include <algorithm>

#include "heterospec/errors.hpp"

namespace heterospec {

std::vector<TokenId> VerificationOutcome::emitted() const {
  std::vector<TokenId> out = accepted;
  out.push_back(residual_token);
  return out;
}

ProjectedDrafter::ProjectedDrafter(ModelPtr base, VocabularyPtr target_vocab,
                                   ProjectionMode mode)
    : base_(std::move(base)), target_(std::move(target_vocab)), mode_(mode) {
  if (!base_ || !target_) {
    throw Error(ErrorCode::kInvalidArgument, "projection needs a model and a vocabulary");
  }
  const Vocabulary& d = base_->vocab();
  const Vocabulary& t = *target_;
  identity_ = d == t;
  index_texts_ = t.texts();
  drafter_to_index_.assign(d.size(), -1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::string& text = d.texts()[i];
    if (auto id = t.find(text)) {
      drafter_to_index_[i] = *id;
    } else if (mode_ == ProjectionMode::kUnion) {
      drafter_to_index_[i] = static_cast<TokenId>(index_texts_.size());
      index_texts_.push_back(text);
    }
  }
  index_to_drafter_.resize(index_texts_.size());
  for (std::size_t x = 0; x < index_texts_.size(); ++x) {
    if (auto id = d.find(index_texts_[x])) {
      index_to_drafter_[x] = {*id};
      continue;
    }
    try {
      index_to_drafter_[x] = d.encode(index_texts_[x]);
    } catch (const TokenizationFailure&) {
      index_to_drafter_[x].clear();
    }
  }
}

const std::string& ProjectedDrafter::text(TokenId index_id) const {
  if (index_id < 0 || static_cast<std::size_t>(index_id) >= index_texts_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "index id out of range");
  }
  return index_texts_[index_id];
}

std::vector<TokenId> ProjectedDrafter::drafter_context(
    std::span<const TokenId> context) const {
  if (identity_) return {context.begin(), context.end()};
  std::vector<TokenId> out;
  out.reserve(context.size());
  for (TokenId x : context) {
    const auto& ids = index_to_drafter_.at(static_cast<std::size_t>(x));
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

Distribution ProjectedDrafter::project(std::span<const double> q) const {
  Distribution out(index_texts_.size(), 0.0);
  if (mode_ == ProjectionMode::kUnion) {
    for (std::size_t i = 0; i < q.size(); ++i) out[drafter_to_index_[i]] += q[i];
    return out;
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (drafter_to_index_[i] >= 0) mass += q[i];
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::kEmptyIntersectionMass,
                "drafter puts no mass on the shared vocabulary");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (drafter_to_index_[i] >= 0) out[drafter_to_index_[i]] = q[i] / mass;
  }
  return out;
}

Distribution ProjectedDrafter::lift_target(std::span<const double> p) const {
  Distribution out(index_texts_.size(), 0.0);
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

Distribution ProjectedDrafter::distribution(std::span<const TokenId> context,
                                            Temperature temp) const {
  return project(heterospec::distribution(*base_, drafter_context(context), temp));
}

ProjectedDrafter project_union(ModelPtr q, VocabularyPtr target) {
  return ProjectedDrafter(std::move(q), std::move(target), ProjectionMode::kUnion);
}

ProjectedDrafter project_intersection(ModelPtr q, VocabularyPtr target) {
  return ProjectedDrafter(std::move(q), std::move(target),
                          ProjectionMode::kIntersection);
}

double acceptance_probability(std::span<const double> p,
                              std::span<const double> q, TokenId draft) {
  if (draft < 0 || static_cast<std::size_t>(draft) >= q.size() ||
      static_cast<std::size_t>(draft) >= p.size()) {
    throw Error(ErrorCode::kInvalidDraft, "draft id out of range");
  }
  if (!(q[draft] > 0.0)) {
    throw Error(ErrorCode::kInvalidDraft, "draft has zero drafter probability");
  }
  return std::min(1.0, p[draft] / q[draft]);
}

bool verify_token(std::span<const double> p, std::span<const double> q,
                  TokenId draft, double u) {
  return u <= acceptance_probability(p, q, draft);
}

Distribution residual_distribution(std::span<const double> p,
                                   std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kInvalidArgument, "residual of mismatched sizes");
  }
  Distribution out(p.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] - std::min(p[i], q[i]);
    mass += out[i];
  }
  if (mass < 1e-12) {
    throw Error(ErrorCode::kDegenerateResidual,
                "residual mass vanishes (p and q coincide)");
  }
  for (double& x : out) x /= mass;
  return out;
}

TokenId residual_sample(std::span<const double> p, std::span<const double> q,
                        RandomSource& rng) {
  Distribution r = residual_distribution(p, q);
  return static_cast<TokenId>(rng.categorical(r));
}

SdStep sd_step(const ConditionalModel& target, const ProjectedDrafter& drafter,
               std::span<const TokenId> context, const StepConfig& config,
               RandomSource& rng) {
  if (!(target.vocab() == drafter.target_vocab())) {
    throw Error(ErrorCode::kInvalidArgument,
                "projection was built for a different target vocabulary");
  }
  SdStep step;
  std::vector<TokenId> ctx(context.begin(), context.end());
  for (std::size_t j = 0; j < config.lookahead; ++j) {
    Distribution q;
    try {
      q = drafter.distribution(ctx, config.temperature);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyIntersectionMass) throw;
      step.empty_intersection = true;
      break;
    }
    const auto d = static_cast<TokenId>(rng.categorical(q));
    step.drafts.draft_ids.push_back(d);
    step.drafts.draft_dists.push_back(std::move(q));
    ctx.push_back(d);
  }

  // Target distributions are only needed up to the first rejection, and
  // every context they condition on holds accepted (hence target) ids.
  VerificationOutcome& out = step.outcome;
  ctx.assign(context.begin(), context.end());
  for (std::size_t j = 0; j < step.drafts.lookahead(); ++j) {
    const TokenId d = step.drafts.draft_ids[j];
    const Distribution& q = step.drafts.draft_dists[j];
    Distribution p =
        drafter.lift_target(distribution(target, ctx, config.temperature));
    if (rng.bernoulli(acceptance_probability(p, q, d))) {
      out.accept_flags.push_back(true);
      out.accepted.push_back(d);
      ctx.push_back(d);
      continue;
    }
    out.accept_flags.push_back(false);
    out.rejected_at = j + 1;
    Distribution r = config.residual(p, q);
    out.residual_token = static_cast<TokenId>(rng.categorical(r));
    return step;
  }
  Distribution p = distribution(target, ctx, config.temperature);
  out.residual_token = static_cast<TokenId>(rng.categorical(p));
  return step;
}

SdStep sd_step(const ConditionalModel& target, ModelPtr drafter,
               std::span<const TokenId> context, const StepConfig& config,
               RandomSource& rng) {
  if (!drafter || !(drafter->vocab() == target.vocab())) {
    throw Error(ErrorCode::kInvalidArgument,
                "standard speculative decoding needs identical vocabularies; "
                "use a union or intersection projection");
  }
  ProjectedDrafter identity = project_union(std::move(drafter), target.vocab_ptr());
  return sd_step(target, identity, context, config, rng);
}

}  // namespace heterospec
