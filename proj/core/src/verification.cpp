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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "heterospec/errors.hpp"

namespace heterospec {

namespace {

std::size_t uniform_index(RandomSource& rng, std::size_t lo, std::size_t hi) {
  const std::vector<double> ones(hi - lo + 1, 1.0);
  return lo + rng.categorical(ones);
}

Distribution random_distribution(RandomSource& rng, std::size_t n,
                                  double sparsity) {
  Distribution w(n);
  for (double& x : w) {
    x = static_cast<double>(uniform_index(rng, 1, 1000)) / 1000.0;
    if (rng.bernoulli(sparsity)) x = 0.0;
  }
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
    w[uniform_index(rng, 0, n - 1)] = 1.0;
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

std::vector<std::string> random_vocab(RandomSource& rng,
                                      const std::string& alphabet,
                                      bool with_symbols, std::size_t size,
                                      std::size_t max_len) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  if (with_symbols) {
    for (char c : alphabet) {
      if (seen.insert(std::string(1, c)).second) out.emplace_back(1, c);
    }
  }
  for (int attempt = 0; out.size() < size && attempt < 200; ++attempt) {
    std::string s;
    const std::size_t len = uniform_index(rng, 1, max_len);
    for (std::size_t k = 0; k < len; ++k) {
      s += alphabet[uniform_index(rng, 0, alphabet.size() - 1)];
    }
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

Instance make_instance(std::string name, std::vector<std::string> t,
                       std::vector<std::string> d, Distribution p,
                       Distribution q, std::size_t lookahead,
                       LookaheadPolicy policy) {
  Instance inst;
  inst.name = std::move(name);
  inst.target_tokens = std::move(t);
  inst.drafter_tokens = std::move(d);
  inst.p = std::move(p);
  inst.q = std::move(q);
  inst.lookahead = lookahead;
  inst.policy = policy;
  return inst;
}

GateResult new_gate(std::string name) {
  GateResult g;
  g.name = std::move(name);
  return g;
}

void check(GateResult& g, bool ok, const std::string& detail) {
  ++g.checks;
  if (ok) return;
  ++g.failures;
  g.passed = false;
  g.details.push_back(detail);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

std::string label(Algorithm a, const Instance& inst) {
  return std::string(algorithm_name(a)) + "/" + inst.name;
}

std::uint64_t derive_seed(std::uint64_t seed, Algorithm a, std::size_t index) {
  return splitmix64_mix(seed ^ splitmix64_mix(
                                   (static_cast<std::uint64_t>(a) << 32) + index));
}

}  // namespace

Instance random_instance(RandomSource& rng, const InstanceGenOptions& options,
                         std::string name) {
  const std::size_t min_size =
      options.expressible ? std::max<std::size_t>(options.alphabet.size(), 2) : 2;
  const std::size_t max_size = std::max(options.max_vocab, min_size);
  const std::string drafter_alphabet =
      options.expressible ? options.alphabet : options.alphabet + "c";

  Instance inst;
  inst.name = std::move(name);
  inst.target_tokens =
      random_vocab(rng, options.alphabet, options.expressible,
                   uniform_index(rng, min_size, max_size), options.max_token_len);
  inst.drafter_tokens =
      options.homogeneous
          ? inst.target_tokens
          : random_vocab(rng, drafter_alphabet, options.expressible,
                         uniform_index(rng, min_size, max_size),
                         options.max_token_len);
  inst.p = random_distribution(rng, inst.target_tokens.size(), options.sparsity);
  inst.q = random_distribution(rng, inst.drafter_tokens.size(), options.sparsity);
  inst.lookahead = uniform_index(rng, 1, std::max<std::size_t>(options.max_lookahead, 1));
  switch (uniform_index(rng, 0, 2)) {
    case 0:
      inst.policy = LookaheadPolicy::fixed_n(inst.lookahead);
      break;
    case 1:
      inst.policy = LookaheadPolicy::early_stop(inst.lookahead);
      break;
    default: {
      const Vocabulary t(inst.target_tokens);
      const Vocabulary d(inst.drafter_tokens);
      std::size_t n = 0;
      if (is_expressible(t, d) && is_expressible(d, t)) n = compute_n_max(d, t);
      inst.policy = n >= 1 && n <= options.max_lookahead
                        ? LookaheadPolicy::n_max(n)
                        : LookaheadPolicy::early_stop(inst.lookahead);
    }
  }
  return inst;
}

std::vector<Instance> random_instances(Algorithm a, std::size_t count,
                                       std::uint64_t seed) {
  SeededSampler rng(seed, static_cast<std::uint64_t>(a));
  InstanceGenOptions opts;
  opts.homogeneous = a == Algorithm::kSd;
  std::vector<Instance> out;
  for (std::size_t k = 0; out.size() < count; ++k) {
    if (a == Algorithm::kUnion || a == Algorithm::kTli) opts.expressible = k % 2 == 0;
    Instance inst = random_instance(rng, opts, "random-" + std::to_string(k));
    if (applicable(a, inst)) out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> small_instance_suite() {
  using P = LookaheadPolicy;
  std::vector<Instance> s;
  s.push_back(make_instance("uniform-ab", {"a", "b"}, {"a", "b"}, {0.5, 0.5},
                            {0.5, 0.5}, 1, P::fixed_n(1)));
  s.push_back(make_instance("skew-ab", {"a", "b"}, {"a", "b"}, {0.7, 0.3},
                            {0.2, 0.8}, 2, P::early_stop(2)));
  s.push_back(make_instance("abc", {"a", "b", "c"}, {"a", "b", "c"},
                            {0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}, 2, P::fixed_n(2)));
  s.push_back(make_instance("merge", {"a", "b", "ab"}, {"a", "b", "ab"},
                            {0.3, 0.3, 0.4}, {0.5, 0.25, 0.25}, 2,
                            P::early_stop(2)));
  s.push_back(make_instance("sparse", {"a", "b", "c", "d"}, {"a", "b", "c", "d"},
                            {0.4, 0.0, 0.6, 0.0}, {0.25, 0.25, 0.25, 0.25}, 1,
                            P::fixed_n(1)));
  s.push_back(make_instance("onehot", {"a", "b"}, {"a", "b"}, {1.0, 0.0},
                            {0.3, 0.7}, 2, P::fixed_n(2)));
  s.push_back(make_instance("hetero-merge", {"a", "b"}, {"a", "b", "ab"},
                            {0.6, 0.4}, {0.3, 0.3, 0.4}, 2, P::early_stop(2)));
  s.push_back(make_instance("hetero-split", {"a", "b", "ab"}, {"a", "b"},
                            {0.2, 0.3, 0.5}, {0.6, 0.4}, 2, P::fixed_n(2)));
  s.push_back(make_instance("hetero-cross", {"a", "b", "ab"}, {"a", "b", "ba"},
                            {0.3, 0.3, 0.4}, {0.2, 0.3, 0.5}, 2,
                            P::early_stop(2)));
  s.push_back(make_instance("hetero-aa", {"a", "aa"}, {"a"}, {0.4, 0.6}, {1.0},
                            2, P::fixed_n(2)));
  s.push_back(make_instance("hetero-n-max", {"a", "b", "ab"}, {"a", "b"},
                            {0.5, 0.1, 0.4}, {0.7, 0.3}, 2, P::n_max(2)));
  s.push_back(make_instance("tli-example", {"a", "b"}, {"a", "b", "c"},
                            {0.6, 0.4}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1,
                            P::fixed_n(1)));
  s.push_back(make_instance("disjoint", {"a", "b"}, {"c", "d"}, {0.7, 0.3},
                            {0.5, 0.5}, 2, P::fixed_n(2)));
  s.push_back(make_instance("subset", {"a", "b", "c"}, {"a", "b"},
                            {0.2, 0.3, 0.5}, {0.9, 0.1}, 2, P::fixed_n(2)));
  s.push_back(make_instance("partial", {"a", "b", "c"}, {"b", "c", "d"},
                            {0.3, 0.3, 0.4}, {0.2, 0.2, 0.6}, 2, P::fixed_n(2)));

  SeededSampler rng(20240607);
  InstanceGenOptions homogeneous;
  homogeneous.homogeneous = true;
  for (int k = 0; k < 16; ++k) {
    s.push_back(random_instance(rng, homogeneous, "homogeneous-" + std::to_string(k)));
  }
  InstanceGenOptions expressible;
  for (int k = 0; k < 24; ++k) {
    s.push_back(random_instance(rng, expressible, "expressible-" + std::to_string(k)));
  }
  InstanceGenOptions loose;
  loose.expressible = false;
  for (int k = 0; k < 8; ++k) {
    s.push_back(random_instance(rng, loose, "loose-" + std::to_string(k)));
  }
  return s;
}

Distribution corrupted_residual(std::span<const double> p,
                                std::span<const double> /*q*/) {
  Distribution out(p.begin(), p.end());
  double total = 0.0;
  for (double x : out) total += x;
  for (double& x : out) x /= total;
  return out;
}

GateResult gate_losslessness(const VerifyOptions& options) {
  GateResult g = new_gate("losslessness");
  const std::vector<Instance> suite = small_instance_suite();
  for (Algorithm a : options.algorithms) {
    for (const Instance& inst : suite) {
      if (!applicable(a, inst)) continue;
      const ExactOutput first = exact_output_distribution(a, inst, 1, options.residual);
      double err = std::abs(first.branches.total - 1.0);
      for (std::size_t t = 0; t < inst.p.size(); ++t) {
        err = std::max(err, std::abs(first.first_token[t] - inst.p[t]));
      }
      check(g, err <= 1e-12,
            label(a, inst) + ": first token deviates from p by " + fmt(err));

      // Two tokens exercise the second iteration's context handling.
      const ExactOutput pair = exact_output_distribution(a, inst, 2, options.residual);
      double pair_err = 0.0;
      for (std::size_t i = 0; i < inst.p.size(); ++i) {
        for (std::size_t j = 0; j < inst.p.size(); ++j) {
          const std::vector<TokenId> key{static_cast<TokenId>(i), static_cast<TokenId>(j)};
          auto it = pair.branches.outcomes.find(key);
          const double got = it == pair.branches.outcomes.end() ? 0.0 : it->second;
          pair_err = std::max(pair_err, std::abs(got - inst.p[i] * inst.p[j]));
        }
      }
      check(g, pair_err <= 1e-12,
            label(a, inst) + ": token pair deviates from p x p by " + fmt(pair_err));
    }
  }
  return g;
}

GateResult gate_acceptance_rates(const VerifyOptions& options) {
  GateResult g = new_gate("acceptance_rates");
  for (Algorithm a : options.algorithms) {
    const auto instances = random_instances(a, options.rate_instances, options.seed);
    for (std::size_t k = 0; k < instances.size(); ++k) {
      MonteCarloOptions mc;
      mc.residual = options.residual;
      const RateReport r = run_monte_carlo(a, instances[k], options.trials,
                                           derive_seed(options.seed, a, k), mc);
      check(g, r.within_ci,
            label(a, instances[k]) + ": empirical " + fmt(r.empirical_alpha) +
                " vs closed form " + fmt(r.closed_form_alpha) + " (3 sigma " +
                fmt(r.ci_halfwidth) + ")");
    }
  }
  return g;
}

GateResult gate_dominance(const VerifyOptions& options) {
  GateResult g = new_gate("dominance");
  SeededSampler rng(options.seed, 0xd0);
  std::size_t strict = 0;
  for (std::size_t k = 0; k < options.dominance_instances; ++k) {
    InstanceGenOptions opts;
    opts.expressible = k % 2 == 0;
    const Instance inst = random_instance(rng, opts, "dominance-" + std::to_string(k));
    const double u = closed_form_alpha(Algorithm::kUnion, inst);
    const double t = closed_form_alpha(Algorithm::kTli, inst);
    if (t > u + 1e-12) ++strict;
    check(g, u <= t + 1e-12,
          inst.name + ": union " + fmt(u) + " exceeds tli " + fmt(t));
  }
  g.details.push_back("strictly better tli on " + std::to_string(strict) + " of " +
                      std::to_string(options.dominance_instances) + " instances");
  return g;
}

GateResult gate_exact_match_penalty(const VerifyOptions& options) {
  GateResult g = new_gate("exact_match_penalty");
  const std::vector<Distribution> cases = {
      {0.5, 0.5}, {0.7, 0.3}, {0.2, 0.3, 0.5}, {0.6, 0.3, 0.1}};
  const std::vector<std::string> letters = {"a", "b", "c"};
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Distribution& p = cases[k];
    std::vector<std::string> tokens(letters.begin(), letters.begin() + p.size());
    const Instance inst = make_instance("q-equals-p-" + std::to_string(k), tokens,
                                        tokens, p, p, 1, LookaheadPolicy::fixed_n(1));
    double sum_sq = 0.0;
    for (double x : p) sum_sq += x * x;
    const PsiTable psi = instance_psi(Algorithm::kSlem, inst, options.node_budget);
    const double closed = closed_form_alpha(Algorithm::kSlem, inst, &psi);
    check(g, std::abs(closed - sum_sq) <= 1e-12,
          inst.name + ": closed form " + fmt(closed) + " != sum p^2 " + fmt(sum_sq));
    check(g, closed < 1.0, inst.name + ": exact match shows no penalty");

    MonteCarloOptions mc;
    mc.residual = options.residual;
    const RateReport em = run_monte_carlo(Algorithm::kSlem, inst, options.trials,
                                          derive_seed(options.seed, Algorithm::kSlem, 900 + k), mc);
    const RateReport sd = run_monte_carlo(Algorithm::kSd, inst, options.trials,
                                          derive_seed(options.seed, Algorithm::kSd, 900 + k), mc);
    check(g, em.within_ci,
          inst.name + ": empirical exact match " + fmt(em.empirical_alpha) +
              " outside 3 sigma of " + fmt(sum_sq));
    check(g, sd.empirical_alpha == 1.0,
          inst.name + ": sd with q = p accepted " + fmt(sd.empirical_alpha));
    check(g, em.empirical_alpha < sd.empirical_alpha,
          inst.name + ": exact match not below sd");
  }
  return g;
}

GateResult gate_decomposition_law(const VerifyOptions& options) {
  GateResult g = new_gate("decomposition_law");
  const Vocabulary complete = complete_vocabulary("ab", 6);
  const auto uniform = TableModel::context_free(
      std::make_shared<const Vocabulary>(complete),
      Distribution(complete.size(), 1.0 / static_cast<double>(complete.size())));
  const PsiTable psi = compute_psi(*uniform, {}, complete,
                                   LookaheadPolicy::early_stop(6), options.node_budget);
  for (std::size_t m = 1; m <= 6; ++m) {
    std::string text;
    for (std::size_t k = 0; k < m; ++k) text += k % 2 ? 'b' : 'a';
    const std::size_t expected = std::size_t{1} << (m - 1);
    const DecompositionCount c = count_decompositions(complete, text, options.node_budget);
    check(g, c.count == expected,
          "census '" + text + "': " + std::to_string(c.count) + " != " +
              std::to_string(expected));
    const std::size_t from_psi =
        psi.entries.count(*complete.find(text))
            ? psi.entries.at(*complete.find(text)).decomposition_count
            : 0;
    check(g, from_psi == expected,
          "psi forest '" + text + "': " + std::to_string(from_psi) + " != " +
              std::to_string(expected));
  }

  const Vocabulary hello({"H", "e", "l", "o", "He", "el", "ll", "lo", "Hel",
                          "ell", "Hell", "ello", "Hello"});
  const DecompositionCount c = count_decompositions(hello, "Hello", options.node_budget);
  check(g, c.count == 14, "census 'Hello': " + std::to_string(c.count) + " != 14");
  const auto hello_model = TableModel::context_free(
      std::make_shared<const Vocabulary>(hello), Distribution(13, 1.0 / 13.0));
  const PsiTable hp = compute_psi(*hello_model, {}, hello,
                                  LookaheadPolicy::early_stop(5), options.node_budget);
  const TokenId hello_id = *hello.find("Hello");
  const std::size_t from_psi =
      hp.entries.count(hello_id) ? hp.entries.at(hello_id).decomposition_count : 0;
  check(g, from_psi == 14, "psi forest 'Hello': " + std::to_string(from_psi) + " != 14");
  return g;
}

GateResult gate_psi_normalization(const VerifyOptions& options) {
  GateResult g = new_gate("psi_normalization");
  SeededSampler rng(options.seed, 0x5e);
  InstanceGenOptions opts;
  opts.max_vocab = 6;
  std::size_t found = 0;
  for (std::size_t k = 0; found < 20; ++k) {
    const Instance inst = random_instance(rng, opts, "psi-" + std::to_string(k));
    if (!applicable(Algorithm::kSlrs, inst)) continue;
    ++found;
    const InstanceModels m = make_models(inst);
    const std::size_t n = compute_n_max(*m.drafter_vocab, *m.target_vocab);
    const PsiTable psi = compute_psi(*m.drafter, {}, *m.target_vocab,
                                     LookaheadPolicy::early_stop(n), options.node_budget);
    const double err = std::abs(psi.total() - 1.0);
    check(g, err <= 1e-9, inst.name + ": psi sums to 1 + " + fmt(psi.total() - 1.0));
  }
  return g;
}

GateResult gate_n_max(const VerifyOptions& options) {
  GateResult g = new_gate("n_max");
  const Vocabulary d({"hello_", "world", "wo", "rld"});
  const Vocabulary t({"hello_", "world", "wo", "rld", "hello_world"});
  const std::size_t n = compute_n_max(d, t, options.node_budget);
  check(g, n == 3, "hello_world example: n_max " + std::to_string(n) + " != 3");
  const FirstTokenIndex index(t, d);
  const LookaheadPolicy early = LookaheadPolicy::early_stop(n);
  check(g, !early.halts(1, "hello_", index), "early_stop halted after 'hello_'");
  check(g, early.halts(2, "hello_world", index),
        "early_stop kept drafting after 'hello_' 'world'");
  check(g, !early.halts(2, "hello_wo", index), "early_stop halted after 'hello_' 'wo'");
  const Vocabulary single({"a"});
  check(g, compute_n_max(single, single, options.node_budget) == 1,
        "singleton vocabulary: n_max != 1");
  return g;
}

GateResult gate_oracle_agreement(const VerifyOptions& options) {
  GateResult g = new_gate("oracle_agreement");
  const std::vector<Instance> suite = small_instance_suite();
  for (Algorithm a : options.algorithms) {
    for (std::size_t k = 0; k < suite.size(); ++k) {
      const Instance& inst = suite[k];
      if (!applicable(a, inst)) continue;
      const ExactOutput exact = exact_output_distribution(a, inst, 1, options.residual);
      MonteCarloOptions mc;
      mc.residual = options.residual;
      const RateReport r = run_monte_carlo(a, inst, options.trials,
                                           derive_seed(options.seed ^ 0xa9, a, k), mc);
      const ChiSquareResult chi = chi_square_test(r.histogram, exact.first_token);
      check(g, chi.passed,
            label(a, inst) + ": chi-square " + fmt(chi.statistic) + " > " +
                fmt(chi.critical_value));
    }
  }
  return g;
}

GateResult run_gate(std::string_view name, const VerifyOptions& options) {
  if (name == "losslessness") return gate_losslessness(options);
  if (name == "acceptance_rates") return gate_acceptance_rates(options);
  if (name == "dominance") return gate_dominance(options);
  if (name == "exact_match_penalty") return gate_exact_match_penalty(options);
  if (name == "decomposition_law") return gate_decomposition_law(options);
  if (name == "psi_normalization") return gate_psi_normalization(options);
  if (name == "n_max") return gate_n_max(options);
  if (name == "oracle_agreement") return gate_oracle_agreement(options);
  throw Error(ErrorCode::kInvalidArgument, "unknown gate '" + std::string(name) + "'");
}

}  // namespace heterospec
