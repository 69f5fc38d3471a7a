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

#include <gtest/gtest.h>

#include <functional>

#include "heterospec/analysis.hpp"
#include "heterospec/errors.hpp"

namespace heterospec {
namespace {

VocabularyPtr vocab(std::vector<std::string> t) {
  return std::make_shared<const Vocabulary>(std::move(t));
}

// Longest target token that prefixes s, found by scanning every token.
std::string brute_first(const Vocabulary& t, const std::string& s) {
  std::string best;
  for (const auto& tok : t.texts()) {
    if (tok.size() > best.size() && s.compare(0, tok.size(), tok) == 0) best = tok;
  }
  return best;
}

// Calls f(concat, probability) for every drafter sequence of exactly n tokens.
void for_each_sequence(const Vocabulary& d, const Distribution& q, std::size_t n,
                       const std::function<void(const std::string&, double)>& f,
                       const std::string& prefix = "", double w = 1.0) {
  if (n == 0) {
    f(prefix, w);
    return;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (q[i] > 0.0) for_each_sequence(d, q, n - 1, f, prefix + d.text(i), w * q[i]);
  }
}

TEST(RealignTest, IdenticalSequencesSpliceAtTheEnds) {
  const std::vector<TokenId> ids = {1, 2, 3};
  const Splice s = realign(ids, ids, {});
  EXPECT_EQ(s.keep_old, 3u);
  EXPECT_EQ(s.new_from, 3u);
  EXPECT_EQ(s.overlap, 3u);
}

TEST(RealignTest, CollapsedSpaceStillOverlaps) {
  // a=0, space=1, b=2: old "a  b" against the re-encoded "a b".
  const std::vector<TokenId> old_ids = {0, 1, 1, 2};
  const std::vector<TokenId> new_ids = {0, 1, 2};
  const Splice s = realign(old_ids, new_ids, {});
  EXPECT_EQ(s.overlap, 2u);
  EXPECT_EQ(s.keep_old, 4u);
  EXPECT_EQ(s.new_from, 3u);
}

TEST(RealignTest, ContinuationFollowsTheOverlap) {
  const std::vector<TokenId> old_ids = {5, 6, 7};
  const std::vector<TokenId> new_ids = {6, 7, 8, 9};
  const Splice s = realign(old_ids, new_ids, {});
  EXPECT_EQ(s.keep_old, 3u);
  EXPECT_EQ(s.new_from, 2u);
}

TEST(RealignTest, DisjointWithinWindowFails) {
  const std::vector<TokenId> old_ids = {1, 2, 3};
  const std::vector<TokenId> new_ids = {4, 5};
  try {
    realign(old_ids, new_ids, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRealignmentFailure);
  }
  // A match outside the lookbehind window does not count.
  const std::vector<TokenId> far = {4, 1, 2, 3};
  EXPECT_THROW(realign(far, new_ids, RealignmentWindow{3}), Error);
}

TEST(RealignTest, EmptyOldSplicesAtStart) {
  const std::vector<TokenId> new_ids = {1};
  const Splice s = realign({}, new_ids, {});
  EXPECT_EQ(s.keep_old, 0u);
  EXPECT_EQ(s.new_from, 0u);
}

TEST(PrefixCacheTest, TruncatesToLongestCommonPrefix) {
  PrefixCache c;
  const std::vector<TokenId> first = {1, 2, 3};
  EXPECT_EQ(c.sync(first), 0u);
  const std::vector<TokenId> extended = {1, 2, 3, 4};
  EXPECT_EQ(c.sync(extended), 3u);
  EXPECT_EQ(c.truncations(), 0u);
  const std::vector<TokenId> diverged = {1, 2, 5, 4};
  EXPECT_EQ(c.sync(diverged), 2u);
  EXPECT_EQ(c.truncations(), 1u);
  EXPECT_EQ(c.ids(), diverged);
  EXPECT_EQ(c.recomputed(), 3u + 1u + 2u);
}

TEST(FirstTokenIndexTest, OpenOnlyWhenTheDrafterCanExtend) {
  const Vocabulary t({"a", "b", "ab"});
  const FirstTokenIndex open(t, Vocabulary({"a", "b"}));
  EXPECT_FALSE(open.determined(""));
  EXPECT_FALSE(open.determined("a"));
  EXPECT_TRUE(open.determined("b"));
  EXPECT_TRUE(open.determined("ab"));
  EXPECT_TRUE(open.determined("aa"));
  // A drafter that can never emit "b" after "a" cannot change T("a...")_1.
  const FirstTokenIndex closed(Vocabulary({"a", "ab"}), Vocabulary({"a", "ab"}));
  EXPECT_TRUE(closed.determined("a"));
}

TEST(LookaheadPolicyTest, HaltingRules) {
  const Vocabulary t({"a", "b", "ab"});
  const Vocabulary d({"a", "b"});
  const FirstTokenIndex index(t, d);
  const auto fixed = LookaheadPolicy::fixed_n(2);
  EXPECT_FALSE(fixed.halts(1, "b", index));
  EXPECT_TRUE(fixed.halts(2, "ab", index));
  const auto early = LookaheadPolicy::early_stop(3);
  EXPECT_FALSE(early.halts(0, "", index));
  EXPECT_TRUE(early.halts(1, "b", index));
  EXPECT_FALSE(early.halts(1, "a", index));
  EXPECT_TRUE(early.halts(3, "aaa", index));
  EXPECT_EQ(parse_lookahead_kind("n_max"), LookaheadKind::kNMax);
  EXPECT_THROW(parse_lookahead_kind("forever"), Error);
}

TEST(NMaxTest, SingletonIsOne) {
  const Vocabulary a({"a"});
  EXPECT_EQ(compute_n_max(a, a), 1u);
}

TEST(NMaxTest, HelloWorldNeedsThreeDrafts) {
  const Vocabulary d({"hello_", "world", "wo", "rld"});
  const Vocabulary t({"hello_", "world", "wo", "rld", "hello_world"});
  EXPECT_EQ(compute_n_max(d, t), 3u);
  const FirstTokenIndex index(t, d);
  const auto early = LookaheadPolicy::early_stop(3);
  EXPECT_FALSE(early.halts(1, "hello_", index));
  EXPECT_TRUE(early.halts(2, "hello_world", index));
}

TEST(NMaxTest, BudgetIsReported) {
  const Vocabulary d({"a", "b"});
  const Vocabulary t({"a", "b", "ab", "aab", "aaab"});
  try {
    compute_n_max(d, t, 1);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSearchBudgetExceeded);
    EXPECT_EQ(e.budget(), 1u);
  }
}

// n_max by brute force: follow every drafter sequence up to `depth` drafts and
// stop at the first prefix whose first target token no continuation of the
// remaining depth can change.
std::size_t brute_n_max(const Vocabulary& d, const Vocabulary& t, std::size_t depth) {
  std::function<bool(const std::string&, const std::string&, std::size_t)> stable =
      [&](const std::string& s, const std::string& first, std::size_t left) {
        if (brute_first(t, s) != first) return false;
        if (left == 0) return true;
        for (const auto& tok : d.texts()) {
          if (!stable(s + tok, first, left - 1)) return false;
        }
        return true;
      };
  std::function<std::size_t(const std::string&, std::size_t)> g =
      [&](const std::string& s, std::size_t used) -> std::size_t {
    if (used > 0 && (used == depth || stable(s, brute_first(t, s), depth - used))) {
      return 0;
    }
    std::size_t worst = 0;
    for (const auto& tok : d.texts()) worst = std::max(worst, g(s + tok, used + 1));
    return worst + 1;
  };
  return g("", 0);
}

TEST(NMaxTest, MatchesExhaustiveSearchToDepthSix) {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs = {
      {{"a", "b"}, {"a", "b", "ab"}},
      {{"a", "b", "ab"}, {"a", "b", "ab", "abb"}},
      {{"a", "ab"}, {"a", "ab"}},
      {{"a", "b", "ba"}, {"a", "b", "ab", "bab"}},
      {{"a", "aa"}, {"a", "aa", "aaa"}},
      {{"a", "b", "bb"}, {"a", "b", "aba", "ba"}},
  };
  for (const auto& [dt, tt] : pairs) {
    const Vocabulary d(dt), t(tt);
    EXPECT_EQ(compute_n_max(d, t), brute_n_max(d, t, 6)) << tt.back();
  }
}

TEST(PsiTest, MatchesBruteForceUnderFixedN) {
  const Vocabulary t({"a", "b", "ab", "ba"});
  const auto d = vocab({"a", "b", "aa"});
  const Distribution q = {0.5, 0.3, 0.2};
  const auto drafter = TableModel::context_free(d, q);
  for (std::size_t n = 1; n <= 3; ++n) {
    std::map<std::string, double> expected;
    for_each_sequence(*d, q, n, [&](const std::string& s, double w) {
      expected[brute_first(t, s)] += w;
    });
    const PsiTable psi =
        compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(n));
    for (const auto& [text, w] : expected) {
      EXPECT_NEAR(psi.psi(*t.find(text)), w, 1e-15) << text;
    }
    EXPECT_NEAR(psi.total(), 1.0, 1e-12);
  }
}

TEST(PsiTest, DecompositionCountsFollowPowersOfTwo) {
  const Vocabulary complete = complete_vocabulary("ab", 3);
  const auto drafter = TableModel::context_free(
      std::make_shared<const Vocabulary>(complete), Distribution(14, 1.0 / 14));
  const PsiTable psi =
      compute_psi(*drafter, {}, complete, LookaheadPolicy::early_stop(3));
  EXPECT_EQ(psi.entries.at(*complete.find("a")).decomposition_count, 1u);
  EXPECT_EQ(psi.entries.at(*complete.find("ab")).decomposition_count, 2u);
  EXPECT_EQ(psi.entries.at(*complete.find("aba")).decomposition_count, 4u);
  EXPECT_NEAR(psi.total(), 1.0, 1e-12);
}

TEST(PsiTest, HelloHasFourteenDecompositions) {
  const Vocabulary hello({"H", "e", "l", "o", "He", "el", "ll", "lo", "Hel", "ell",
                          "Hell", "ello", "Hello"});
  const auto drafter = TableModel::context_free(
      std::make_shared<const Vocabulary>(hello), Distribution(13, 1.0 / 13));
  const PsiTable psi =
      compute_psi(*drafter, {}, hello, LookaheadPolicy::early_stop(5));
  EXPECT_EQ(psi.entries.at(*hello.find("Hello")).decomposition_count, 14u);
}

TEST(PsiTest, NodesGrowWithFixedN) {
  const Vocabulary t({"a", "b", "ab"});
  const auto drafter = TableModel::context_free(vocab({"a", "b"}), {0.5, 0.5});
  std::size_t prev = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    const PsiTable psi = compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(n));
    EXPECT_GE(psi.nodes_expanded, prev);
    prev = psi.nodes_expanded;
  }
}

TEST(PsiTest, BudgetExceededIsReported) {
  const Vocabulary t({"a", "b"});
  const auto drafter = TableModel::context_free(vocab({"a", "b"}), {0.5, 0.5});
  try {
    compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(10), 100);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPsiBudgetExceeded);
    EXPECT_EQ(e.budget(), 100u);
  }
}

TEST(PsiTest, ExportsJson) {
  const Vocabulary t({"a", "b"});
  const auto drafter = TableModel::context_free(vocab({"a", "b"}), {0.25, 0.75});
  const PsiTable psi = compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(1));
  EXPECT_EQ(psi_table_to_json(psi, t),
            "[{\"token_text\":\"a\",\"psi\":0.25,\"count\":1},"
            "{\"token_text\":\"b\",\"psi\":0.75,\"count\":1}]");
}

TEST(SlrsVerifyTest, AcceptsWhenPsiEqualsP) {
  const Vocabulary t({"a", "b"});
  const auto drafter = TableModel::context_free(vocab({"a", "b"}), {0.3, 0.7});
  const PsiTable psi = compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(1));
  const Distribution p = {0.3, 0.7};
  SeededSampler rng(2);
  EXPECT_EQ(slrs_verify(p, psi, 0, 1.0, rng), 0);
  EXPECT_EQ(slrs_verify(p, psi, 1, 1.0, rng), 1);
}

TEST(SlrsVerifyTest, RejectsIntoResidual) {
  const Vocabulary t({"a", "b"});
  const auto drafter = TableModel::context_free(vocab({"a", "b"}), {0.8, 0.2});
  const PsiTable psi = compute_psi(*drafter, {}, t, LookaheadPolicy::fixed_n(1));
  const Distribution p = {0.4, 0.6};
  SeededSampler rng(2);
  EXPECT_DOUBLE_EQ(slrs_acceptance_probability(p, psi.as_vector(2), 0), 0.5);
  EXPECT_EQ(slrs_verify(p, psi, 0, 0.5, rng), 0);
  EXPECT_EQ(slrs_verify(p, psi, 0, 0.51, rng), 1);
}

TEST(SessionTest, RequiresMutualExpressibility) {
  const auto t = TableModel::context_free(vocab({"a", "b"}), {0.5, 0.5});
  const auto d = TableModel::context_free(vocab({"a", "c"}), {0.5, 0.5});
  EXPECT_THROW(StringLevelSession(t, d, {}), Error);
}

TEST(SessionTest, DraftIsRetokenizedIntoTarget) {
  const auto t = TableModel::context_free(vocab({"a"}), {1.0});
  const auto d = TableModel::context_free(vocab({"a", "aa"}), {0.0, 1.0});
  StringLevelConfig cfg;
  cfg.lookahead = 1;
  StringLevelSession session(t, d, cfg);
  session.reset("");
  SeededSampler rng(1);
  const SlemStep s = session.slem_step(rng);
  EXPECT_EQ(s.drafts, (std::vector<TokenId>{1}));
  EXPECT_EQ(s.candidates, (std::vector<TokenId>{0, 0}));
  EXPECT_EQ(s.outcome.accepted.size(), 2u);
  EXPECT_EQ(session.text(), "aaa");
}

TEST(SessionTest, OneHotChainsAgreeEverywhere) {
  const auto v = vocab({"a", "b"});
  const auto m = TableModel::context_free(v, {0.0, 1.0});
  StringLevelConfig cfg;
  cfg.lookahead = 3;
  StringLevelSession session(m, m, cfg);
  session.reset("a");
  SeededSampler rng(1);
  const SlemStep s = session.slem_step(rng);
  EXPECT_EQ(s.outcome.accepted.size(), 3u);
  EXPECT_EQ(s.outcome.emitted().size(), 4u);
  EXPECT_EQ(session.text(), "abbbb");
}

TEST(SessionTest, ExactMatchFirstTokenAcceptanceIsSumOfPTimesPsi) {
  const Distribution p = {0.3, 0.2, 0.5};
  const Distribution q = {0.6, 0.1, 0.3};
  const auto tv = vocab({"a", "b", "ab"});
  const auto dv = vocab({"a", "b", "ba"});
  const auto t = TableModel::context_free(tv, p);
  const auto d = TableModel::context_free(dv, q);
  for (std::size_t n = 1; n <= 2; ++n) {
    // Draft sequences and the independent target sample, enumerated here.
    double expected = 0.0;
    for_each_sequence(*dv, q, n, [&](const std::string& s, double w) {
      expected += w * p[*tv->find(brute_first(*tv, s))];
    });
    StringLevelConfig cfg;
    cfg.lookahead = n;
    const BranchDistribution b = enumerate_branches([&](RandomSource& rng) {
      StringLevelSession session(t, d, cfg);
      session.reset("");
      const SlemStep s = session.slem_step(rng);
      const bool hit = !s.outcome.accept_flags.empty() && s.outcome.accept_flags[0];
      return std::vector<TokenId>{hit ? 1 : 0};
    });
    EXPECT_NEAR(b.outcomes.at({1}), expected, 1e-15);
  }
}

TEST(SessionTest, CollapsedDrafterViewKeepsEmittedTextIntact) {
  const auto tv = vocab({"a", "b", " ", "ab"});
  const auto dv = vocab({"a", "b", " ", "a "});
  const auto t = TableModel::context_free(tv, {0.3, 0.2, 0.3, 0.2});
  const auto d = TableModel::context_free(dv, {0.25, 0.25, 0.25, 0.25});
  StringLevelConfig cfg;
  cfg.lookahead = 3;
  cfg.drafter_normalizer = Normalizer::parse("collapse_spaces");
  StringLevelSession session(t, d, cfg);
  session.reset("a  b");
  SeededSampler rng(9);
  std::string expected = "a  b";
  for (int i = 0; i < 200; ++i) {
    const SlemStep s = session.slem_step(rng);
    for (TokenId id : s.outcome.emitted()) expected += tv->text(id);
    ASSERT_EQ(session.text(), expected);
    EXPECT_EQ(session.drafter_context(),
              dv->encode(cfg.drafter_normalizer.apply(session.text().substr(
                  0, session.text().size() -
                         tv->decode(s.outcome.emitted()).size()))));
  }
}

}  // namespace
}  // namespace heterospec
