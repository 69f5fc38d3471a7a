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

#ifndef HETEROSPEC_VERIFICATION_HPP_
#define HETEROSPEC_VERIFICATION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heterospec/analysis.hpp"
#include "heterospec/decoder.hpp"

namespace heterospec {

// Hand-picked plus seeded instances with at most 4 tokens per vocabulary and
// lookahead at most 2. Every algorithm applies to at least 20 of them.
std::vector<Instance> small_instance_suite();

struct InstanceGenOptions {
  std::string alphabet = "ab";
  std::size_t max_vocab = 4;
  std::size_t max_token_len = 3;
  std::size_t max_lookahead = 2;
  // Mutually expressible vocabularies (every alphabet symbol is a token).
  bool expressible = true;
  // Drafter vocabulary equal to the target vocabulary.
  bool homogeneous = false;
  // Probability of zeroing an individual probability before renormalizing.
  double sparsity = 0.2;
};

Instance random_instance(RandomSource& rng, const InstanceGenOptions& options,
                         std::string name);

// `count` random instances the algorithm applies to.
std::vector<Instance> random_instances(Algorithm a, std::size_t count,
                                       std::uint64_t seed);

struct GateResult {
  std::string name;  // invariant name, e.g. "losslessness"
  bool passed = true;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> details;  // failing checks, then notes
};

struct VerifyOptions {
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms),
                                    std::end(kAllAlgorithms)};
  std::size_t trials = 100'000;
  std::size_t rate_instances = 50;
  std::size_t dominance_instances = 1000;
  std::uint64_t seed = 42;
  std::size_t node_budget = kDefaultNodeBudget;
  ResidualRule residual = &residual_distribution;
};

GateResult gate_losslessness(const VerifyOptions& options);
GateResult gate_acceptance_rates(const VerifyOptions& options);
GateResult gate_dominance(const VerifyOptions& options);
GateResult gate_exact_match_penalty(const VerifyOptions& options);
GateResult gate_decomposition_law(const VerifyOptions& options);
GateResult gate_psi_normalization(const VerifyOptions& options);
GateResult gate_n_max(const VerifyOptions& options);
GateResult gate_oracle_agreement(const VerifyOptions& options);

// Negative control: renormalized p, ignoring q. Breaks losslessness whenever
// a rejection can happen.
Distribution corrupted_residual(std::span<const double> p,
                                std::span<const double> q);

inline constexpr const char* kGateNames[] = {
    "losslessness", "acceptance_rates", "dominance", "exact_match_penalty",
    "decomposition_law", "psi_normalization", "n_max", "oracle_agreement"};

GateResult run_gate(std::string_view name, const VerifyOptions& options);

}  // namespace heterospec

#endif  // HETEROSPEC_VERIFICATION_HPP_
