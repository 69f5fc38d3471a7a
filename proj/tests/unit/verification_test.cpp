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

#include "heterospec/verification.hpp"

#include <gtest/gtest.h>

#include "heterospec/errors.hpp"

namespace heterospec {
namespace {

VerifyOptions quick() {
  VerifyOptions o;
  o.trials = 10'000;
  o.rate_instances = 5;
  o.dominance_instances = 100;
  return o;
}

TEST(SuiteTest, EveryAlgorithmHasTwentySmallInstances) {
  const std::vector<Instance> suite = small_instance_suite();
  for (Algorithm a : kAllAlgorithms) {
    std::size_t n = 0;
    for (const Instance& inst : suite) n += applicable(a, inst);
    EXPECT_GE(n, 20u) << algorithm_name(a);
  }
  for (const Instance& inst : suite) {
    EXPECT_LE(inst.target_tokens.size(), 4u) << inst.name;
    EXPECT_LE(inst.drafter_tokens.size(), 4u) << inst.name;
    EXPECT_LE(inst.lookahead, 2u) << inst.name;
    EXPECT_NO_THROW(make_models(inst)) << inst.name;
  }
}

TEST(SuiteTest, RandomInstancesAreSeededAndApplicable) {
  const auto a = random_instances(Algorithm::kSlrs, 10, 3);
  const auto b = random_instances(Algorithm::kSlrs, 10, 3);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].target_tokens, b[i].target_tokens);
    EXPECT_EQ(a[i].p, b[i].p);
    EXPECT_TRUE(applicable(Algorithm::kSlrs, a[i]));
  }
}

TEST(GateTest, LosslessnessHolds) {
  const GateResult g = gate_losslessness(quick());
  EXPECT_TRUE(g.passed) << (g.details.empty() ? "" : g.details.front());
  EXPECT_GT(g.checks, 100u);
}

TEST(GateTest, NegativeControlBreaksLosslessness) {
  VerifyOptions o = quick();
  o.residual = &corrupted_residual;
  const GateResult g = gate_losslessness(o);
  EXPECT_FALSE(g.passed);
  EXPECT_GT(g.failures, 0u);
}

TEST(GateTest, StructuralGatesPass) {
  for (const char* name : {"dominance", "decomposition_law", "psi_normalization", "n_max"}) {
    const GateResult g = run_gate(name, quick());
    EXPECT_EQ(g.name, name);
    EXPECT_TRUE(g.passed) << name << ": " << (g.details.empty() ? "" : g.details.front());
  }
}

TEST(GateTest, ExactMatchPenaltyPasses) {
  const GateResult g = gate_exact_match_penalty(quick());
  EXPECT_TRUE(g.passed) << (g.details.empty() ? "" : g.details.front());
}

TEST(GateTest, OracleAgreementAtFullTrials) {
  VerifyOptions o;
  const GateResult g = gate_oracle_agreement(o);
  EXPECT_TRUE(g.passed) << (g.details.empty() ? "" : g.details.front());
}

TEST(GateTest, UnknownGateIsRejected) {
  EXPECT_THROW(run_gate("speed", quick()), Error);
}

TEST(CorruptedResidualTest, IgnoresDrafter) {
  const Distribution p = {0.2, 0.8};
  const Distribution q = {0.9, 0.1};
  EXPECT_EQ(corrupted_residual(p, q), p);
}

}  // namespace
}  // namespace heterospec
