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

#ifndef HETEROSPEC_ANALYSIS_HPP_
#define HETEROSPEC_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heterospec/decoder.hpp"
#include "heterospec/engine.hpp"
#include "heterospec/lm.hpp"
#include "heterospec/string_level.hpp"
#include "heterospec/vocab.hpp"

namespace heterospec {

// A context-free target/drafter pair: p over T, q over D.
struct Instance {
  std::string name;
  std::vector<std::string> target_tokens;
  std::vector<std::string> drafter_tokens;
  Distribution p;
  Distribution q;
  std::size_t lookahead = 1;
  LookaheadPolicy policy = LookaheadPolicy::fixed_n(1);  // rejection sampling
};

struct InstanceModels {
  VocabularyPtr target_vocab;
  VocabularyPtr drafter_vocab;
  ModelPtr target;
  ModelPtr drafter;
};

// Validates sizes and distributions; throws Error(kInvalidArgument).
InstanceModels make_models(const Instance& instance);

// sd needs T = D, the string-level algorithms need T ↠ D* and D ↠ T*.
bool applicable(Algorithm a, const Instance& instance);

// ψ under the policy the algorithm drafts with: fixed_n(lookahead) for exact
// match, instance.policy for rejection sampling.
PsiTable instance_psi(Algorithm a, const Instance& instance,
                      std::size_t node_budget = kDefaultNodeBudget);

// Expected acceptance probability of the first verified token:
//   sd     Σ_T min(p, q)
//   union  Σ_{T∩D} min(p, q)
//   tli    Σ_{T∩D} min(p, q / Σ_{T∩D} q)    (0 when that mass is 0)
//   slem   Σ_T p ψ
//   slrs   Σ_T min(p, ψ)
// Throws Error(kMissingPsi) for the string-level rows without a table.
double closed_form_alpha(Algorithm a, const Instance& instance,
                         const PsiTable* psi = nullptr);

// Exhaustively runs `run` against every branch of its random choices.
// Outcomes are keyed by the returned id sequence. Throws
// Error(kInstanceTooLarge) past `max_paths` branches.
struct BranchDistribution {
  std::map<std::vector<TokenId>, double> outcomes;
  double total = 0.0;
  std::size_t paths = 0;
};

BranchDistribution enumerate_branches(
    const std::function<std::vector<TokenId>(RandomSource&)>& run,
    std::size_t max_paths = 5'000'000);

struct EnumerationOracle {
  std::size_t max_vocab = 4;
  std::size_t max_lookahead = 2;
};

struct ExactOutput {
  BranchDistribution branches;
  Distribution first_token;  // marginal over T
};

// Exact distribution of the first `horizon` emitted target tokens of a fresh
// run, enumerating the decoder's own code path. Throws
// Error(kInstanceTooLarge) outside the oracle bounds.
ExactOutput exact_output_distribution(
    Algorithm a, const Instance& instance, std::size_t horizon = 1,
    ResidualRule residual = &residual_distribution,
    EnumerationOracle bounds = {});

struct RateReport {
  Algorithm algorithm = Algorithm::kSd;
  std::string instance;
  double closed_form_alpha = 0.0;
  double empirical_alpha = 0.0;
  std::size_t trials = 0;
  std::size_t accepted = 0;
  double sigma = 0.0;         // binomial, from the closed form
  double ci_halfwidth = 0.0;  // 3 sigma
  bool within_ci = false;
  std::vector<std::size_t> histogram;  // first emitted token over T
};

struct MonteCarloOptions {
  std::size_t replicas = 4;
  ResidualRule residual = &residual_distribution;
};

// Fresh single iteration per trial; counts acceptance of the first verified
// token. Replica r uses stream r of master_seed and replicas run concurrently;
// the report depends only on (seed, trials, replicas).
RateReport run_monte_carlo(Algorithm a, const Instance& instance,
                           std::size_t trials, std::uint64_t master_seed,
                           const MonteCarloOptions& options = {});

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double critical_value = 0.0;
  bool passed = false;
};

// Goodness of fit of `observed` counts to `expected` probabilities. Bins of
// zero expected probability must be empty.
ChiSquareResult chi_square_test(std::span<const std::size_t> observed,
                                std::span<const double> expected,
                                double significance = 0.001);

// Ways to write `text` as a concatenation of tokens of D, by walking the
// decomposition forest. Drafter forwards needed for ψ = internal nodes + 1.
struct DecompositionCount {
  std::size_t count = 0;
  std::size_t internal_nodes = 0;
  std::size_t nodes_expanded = 0;
};

DecompositionCount count_decompositions(const Vocabulary& drafter,
                                        std::string_view text,
                                        std::size_t budget = kDefaultNodeBudget);

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;
  double skewness = 0.0;
};

// Sample statistics; percentiles interpolate linearly between order stats.
SummaryStats summarize(std::span<const double> values);

struct CensusRow {
  std::string text;
  std::size_t length = 0;  // bytes
  std::size_t count = 0;
  std::size_t drafter_forwards = 0;
  bool budget_exceeded = false;
};

struct CensusReport {
  std::vector<CensusRow> rows;
  SummaryStats length_stats;
  SummaryStats count_stats;  // over rows within budget
  std::size_t budget_failures = 0;
};

CensusReport decomposition_census(const Vocabulary& drafter,
                                  const std::vector<std::string>& tokens,
                                  std::size_t budget = kDefaultNodeBudget);

struct CostModel {
  double c_draft = 0.05;
  double c_target = 1.0;
  std::size_t lookahead = 4;
};

struct ThroughputReport {
  double expected_tokens_per_iteration = 0.0;
  double cost_per_iteration = 0.0;
  double tokens_per_cost = 0.0;
  double simulated_tokens_per_iteration = 0.0;
  double simulated_tokens_per_cost = 0.0;
  std::size_t simulated_iterations = 0;
  std::size_t simulated_tokens = 0;
};

// First-order cost model assuming i.i.d. acceptance with probability alpha:
// E[tokens / iteration] = (1 - alpha^(i+1)) / (1 - alpha), cost per
// iteration = i c_draft + c_target. The simulated figures come from
// generating n_tokens under the same assumption with a seeded sampler.
ThroughputReport simulate_throughput(const CostModel& cost, double alpha,
                                     std::size_t n_tokens,
                                     std::uint64_t seed = 0);

inline constexpr const char* kThroughputAssumption =
    "i.i.d. per-draft acceptance with probability alpha; abstract costs, not "
    "wall-clock";

}  // namespace heterospec

#endif  // HETEROSPEC_ANALYSIS_HPP_
