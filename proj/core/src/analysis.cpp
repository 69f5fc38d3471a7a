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

#include "heterospec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "heterospec/errors.hpp"

namespace heterospec {

InstanceModels make_models(const Instance& instance) {
  InstanceModels m;
  m.target_vocab = std::make_shared<const Vocabulary>(instance.target_tokens);
  m.drafter_vocab = std::make_shared<const Vocabulary>(instance.drafter_tokens);
  if (instance.p.size() != m.target_vocab->size() ||
      instance.q.size() != m.drafter_vocab->size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "instance '" + instance.name + "' has mismatched sizes");
  }
  m.target = TableModel::context_free(m.target_vocab, instance.p);
  m.drafter = TableModel::context_free(m.drafter_vocab, instance.q);
  return m;
}

bool applicable(Algorithm a, const Instance& instance) {
  switch (a) {
    case Algorithm::kSd:
      return instance.target_tokens == instance.drafter_tokens;
    case Algorithm::kUnion:
    case Algorithm::kTli:
      return true;
    case Algorithm::kSlem:
    case Algorithm::kSlrs: {
      const Vocabulary t(instance.target_tokens);
      const Vocabulary d(instance.drafter_tokens);
      return is_expressible(t, d) && is_expressible(d, t);
    }
  }
  return false;
}

PsiTable instance_psi(Algorithm a, const Instance& instance,
                      std::size_t node_budget) {
  const InstanceModels m = make_models(instance);
  const LookaheadPolicy policy = a == Algorithm::kSlrs
                                     ? instance.policy
                                     : LookaheadPolicy::fixed_n(instance.lookahead);
  return compute_psi(*m.drafter, {}, *m.target_vocab, policy, node_budget);
}

double closed_form_alpha(Algorithm a, const Instance& instance,
                         const PsiTable* psi) {
  const Vocabulary t(instance.target_tokens);
  const Vocabulary d(instance.drafter_tokens);
  const Distribution& p = instance.p;
  const Distribution& q = instance.q;
  double alpha = 0.0;
  switch (a) {
    case Algorithm::kSd:
      for (std::size_t i = 0; i < p.size(); ++i) alpha += std::min(p[i], q.at(i));
      return alpha;
    case Algorithm::kUnion:
    case Algorithm::kTli: {
      double mass = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (t.contains(d.texts()[j])) mass += q[j];
      }
      if (a == Algorithm::kTli && !(mass > 0.0)) return 0.0;
      const double scale = a == Algorithm::kTli ? 1.0 / mass : 1.0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (auto id = t.find(d.texts()[j])) alpha += std::min(p[*id], q[j] * scale);
      }
      return alpha;
    }
    case Algorithm::kSlem:
    case Algorithm::kSlrs:
      if (!psi) {
        throw Error(ErrorCode::kMissingPsi,
                    "string-level acceptance needs a psi table");
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = psi->psi(static_cast<TokenId>(i));
        alpha += a == Algorithm::kSlem ? p[i] * s : std::min(p[i], s);
      }
      return alpha;
  }
  return alpha;
}

namespace {

// Follows a scripted prefix of choices, then always takes the first option,
// recording the options available at each unscripted choice.
class ScriptedSource final : public RandomSource {
 public:
  explicit ScriptedSource(std::vector<std::size_t> script)
      : script_(std::move(script)) {}

  std::size_t categorical(std::span<const double> weights) override {
    double total = 0.0;
    std::vector<std::size_t> options;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) {
        total += weights[i];
        options.push_back(i);
      }
    }
    if (options.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "categorical over zero weights");
    }
    const std::size_t pick = choose(options);
    probability_ *= weights[pick] / total;
    return pick;
  }

  bool bernoulli(double p) override {
    p = std::clamp(p, 0.0, 1.0);
    std::vector<std::size_t> options;
    if (p > 0.0) options.push_back(1);
    if (p < 1.0) options.push_back(0);
    const bool yes = choose(options) == 1;
    probability_ *= yes ? p : 1.0 - p;
    return yes;
  }

  const std::vector<std::size_t>& taken() const { return taken_; }
  const std::vector<std::vector<std::size_t>>& options() const { return options_; }
  std::size_t scripted() const { return script_.size(); }
  double probability() const { return probability_; }

 private:
  std::size_t choose(const std::vector<std::size_t>& options) {
    const std::size_t k = taken_.size();
    const std::size_t pick = k < script_.size() ? script_[k] : options.front();
    if (std::find(options.begin(), options.end(), pick) == options.end()) {
      throw Error(ErrorCode::kInvalidArgument, "replay diverged from its script");
    }
    taken_.push_back(pick);
    options_.push_back(options);
    return pick;
  }

  std::vector<std::size_t> script_;
  std::vector<std::size_t> taken_;
  std::vector<std::vector<std::size_t>> options_;
  double probability_ = 1.0;
};

}  // namespace

BranchDistribution enumerate_branches(
    const std::function<std::vector<TokenId>(RandomSource&)>& run,
    std::size_t max_paths) {
  BranchDistribution out;
  std::vector<std::vector<std::size_t>> pending{{}};
  while (!pending.empty()) {
    std::vector<std::size_t> script = std::move(pending.back());
    pending.pop_back();
    if (++out.paths > max_paths) {
      throw Error(ErrorCode::kInstanceTooLarge,
                  "branch enumeration exceeded its path limit");
    }
    ScriptedSource src(std::move(script));
    const std::vector<TokenId> result = run(src);
    out.outcomes[result] += src.probability();
    out.total += src.probability();
    const auto& taken = src.taken();
    const auto& options = src.options();
    for (std::size_t k = src.scripted(); k < taken.size(); ++k) {
      for (std::size_t o : options[k]) {
        if (o == options[k].front()) continue;
        std::vector<std::size_t> next(taken.begin(), taken.begin() + k);
        next.push_back(o);
        pending.push_back(std::move(next));
      }
    }
  }
  return out;
}

namespace {

GenerationConfig instance_config(Algorithm a, const Instance& instance,
                                 std::size_t horizon, ResidualRule residual) {
  GenerationConfig cfg;
  cfg.algorithm = a;
  cfg.max_new_tokens = horizon;
  cfg.residual = residual;
  cfg.lookahead = instance.lookahead;
  if (a == Algorithm::kSlrs) {
    cfg.lookahead = instance.policy.n;
    cfg.lookahead_kind = instance.policy.kind;
  }
  return cfg;
}

}  // namespace

ExactOutput exact_output_distribution(Algorithm a, const Instance& instance,
                                      std::size_t horizon, ResidualRule residual,
                                      EnumerationOracle bounds) {
  const std::size_t depth =
      a == Algorithm::kSlrs ? instance.policy.n : instance.lookahead;
  if (instance.target_tokens.size() > bounds.max_vocab ||
      instance.drafter_tokens.size() > bounds.max_vocab ||
      depth > bounds.max_lookahead) {
    throw Error(ErrorCode::kInstanceTooLarge,
                "instance '" + instance.name + "' exceeds the enumeration bounds");
  }
  const InstanceModels m = make_models(instance);
  const GenerationConfig cfg = instance_config(a, instance, horizon, residual);
  ExactOutput out;
  out.branches = enumerate_branches([&](RandomSource& rng) {
    return generate(m.target, m.drafter, "", cfg, rng).tokens;
  });
  out.first_token.assign(m.target_vocab->size(), 0.0);
  for (const auto& [seq, prob] : out.branches.outcomes) {
    if (!seq.empty()) out.first_token[seq.front()] += prob;
  }
  return out;
}

namespace {

struct TrialCounts {
  std::size_t accepted = 0;
  std::vector<std::size_t> histogram;
};

TrialCounts run_replica(Algorithm a, const Instance& instance,
                        const InstanceModels& m, const PsiTable* psi,
                        std::size_t trials, SeededSampler rng,
                        ResidualRule residual) {
  TrialCounts c;
  c.histogram.assign(m.target_vocab->size(), 0);
  auto record = [&](bool accepted, TokenId first) {
    c.accepted += accepted ? 1 : 0;
    ++c.histogram.at(static_cast<std::size_t>(first));
  };
  if (!is_string_level(a)) {
    const ProjectedDrafter pd(m.drafter, m.target_vocab,
                              a == Algorithm::kTli ? ProjectionMode::kIntersection
                                                   : ProjectionMode::kUnion);
    const StepConfig cfg{instance.lookahead, {}, residual};
    for (std::size_t n = 0; n < trials; ++n) {
      const SdStep s = sd_step(*m.target, pd, {}, cfg, rng);
      const auto& flags = s.outcome.accept_flags;
      record(!flags.empty() && flags.front(), s.outcome.emitted().front());
    }
    return c;
  }
  StringLevelConfig cfg;
  cfg.lookahead = instance.lookahead;
  cfg.policy = instance.policy;
  cfg.residual = residual;
  StringLevelSession session(m.target, m.drafter, cfg);
  for (std::size_t n = 0; n < trials; ++n) {
    session.reset("");
    if (a == Algorithm::kSlem) {
      const SlemStep s = session.slem_step(rng);
      const auto& flags = s.outcome.accept_flags;
      record(!flags.empty() && flags.front(), s.outcome.emitted().front());
    } else {
      const SlrsStep s = session.slrs_step(rng, psi);
      record(s.accepted, s.emitted);
    }
  }
  return c;
}

}  // namespace

RateReport run_monte_carlo(Algorithm a, const Instance& instance,
                           std::size_t trials, std::uint64_t master_seed,
                           const MonteCarloOptions& options) {
  if (!applicable(a, instance)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(algorithm_name(a)) + " does not apply to instance '" +
                    instance.name + "'");
  }
  const InstanceModels m = make_models(instance);
  RateReport r;
  r.algorithm = a;
  r.instance = instance.name;
  r.trials = trials;
  PsiTable psi;
  if (is_string_level(a)) {
    psi = instance_psi(a, instance);
    r.closed_form_alpha = closed_form_alpha(a, instance, &psi);
  } else {
    r.closed_form_alpha = closed_form_alpha(a, instance);
  }
  const PsiTable* psi_ptr = a == Algorithm::kSlrs ? &psi : nullptr;

  const std::size_t replicas = std::max<std::size_t>(options.replicas, 1);
  std::vector<std::future<TrialCounts>> jobs;
  for (std::size_t k = 0; k < replicas; ++k) {
    const std::size_t share = trials / replicas + (k < trials % replicas ? 1 : 0);
    jobs.push_back(std::async(std::launch::async, run_replica, a,
                              std::cref(instance), std::cref(m), psi_ptr, share,
                              SeededSampler(master_seed, k), options.residual));
  }
  r.histogram.assign(m.target_vocab->size(), 0);
  for (auto& job : jobs) {
    const TrialCounts c = job.get();
    r.accepted += c.accepted;
    for (std::size_t i = 0; i < c.histogram.size(); ++i) r.histogram[i] += c.histogram[i];
  }
  const double n = static_cast<double>(trials);
  r.empirical_alpha = trials ? static_cast<double>(r.accepted) / n : 0.0;
  const double a0 = r.closed_form_alpha;
  r.sigma = trials ? std::sqrt(std::max(0.0, a0 * (1.0 - a0)) / n) : 0.0;
  r.ci_halfwidth = 3.0 * r.sigma;
  r.within_ci = std::abs(r.empirical_alpha - a0) <= r.ci_halfwidth + 1e-12;
  return r;
}

ChiSquareResult chi_square_test(std::span<const std::size_t> observed,
                                std::span<const double> expected,
                                double significance) {
  if (observed.size() != expected.size()) {
    throw Error(ErrorCode::kInvalidArgument, "chi-square bins differ in number");
  }
  ChiSquareResult r;
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::size_t bins = 0;
  bool impossible = false;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) {
      impossible = impossible || observed[i] > 0;
      continue;
    }
    ++bins;
    const double e = n * expected[i];
    const double diff = static_cast<double>(observed[i]) - e;
    r.statistic += diff * diff / e;
  }
  r.degrees_of_freedom = bins > 0 ? bins - 1 : 0;
  if (impossible) {
    r.statistic = std::numeric_limits<double>::infinity();
    return r;
  }
  if (r.degrees_of_freedom == 0) {
    r.passed = true;
    return r;
  }
  const boost::math::chi_squared dist(static_cast<double>(r.degrees_of_freedom));
  r.critical_value = boost::math::quantile(dist, 1.0 - significance);
  r.passed = r.statistic <= r.critical_value;
  return r;
}

DecompositionCount count_decompositions(const Vocabulary& drafter,
                                        std::string_view text,
                                        std::size_t budget) {
  DecompositionCount out;
  auto walk = [&](auto&& self, std::size_t pos) -> void {
    if (pos == text.size()) {
      ++out.count;
      return;
    }
    for (const auto& d : drafter.texts()) {
      if (pos + d.size() > text.size() || text.compare(pos, d.size(), d) != 0) continue;
      if (++out.nodes_expanded > budget) {
        throw BudgetExceeded(ErrorCode::kPsiBudgetExceeded,
                             "decomposition search exceeded its node budget",
                             budget);
      }
      if (pos + d.size() < text.size()) ++out.internal_nodes;
      self(self, pos + d.size());
    }
  };
  if (!text.empty()) walk(walk, 0);
  return out;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  s.sd = std::sqrt(m2);
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.min = v.front();
  s.p25 = quantile(0.25);
  s.median = quantile(0.5);
  s.p75 = quantile(0.75);
  s.max = v.back();
  return s;
}

CensusReport decomposition_census(const Vocabulary& drafter,
                                  const std::vector<std::string>& tokens,
                                  std::size_t budget) {
  CensusReport r;
  std::vector<double> lengths, counts;
  for (const auto& t : tokens) {
    CensusRow row;
    row.text = t;
    row.length = t.size();
    try {
      const DecompositionCount c = count_decompositions(drafter, t, budget);
      row.count = c.count;
      row.drafter_forwards = c.internal_nodes + 1;
      counts.push_back(static_cast<double>(c.count));
    } catch (const BudgetExceeded&) {
      row.budget_exceeded = true;
      ++r.budget_failures;
    }
    lengths.push_back(static_cast<double>(row.length));
    r.rows.push_back(std::move(row));
  }
  r.length_stats = summarize(lengths);
  r.count_stats = summarize(counts);
  return r;
}

ThroughputReport simulate_throughput(const CostModel& cost, double alpha,
                                     std::size_t n_tokens, std::uint64_t seed) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  ThroughputReport r;
  const auto i = static_cast<double>(cost.lookahead);
  r.expected_tokens_per_iteration =
      alpha >= 1.0 ? i + 1.0 : (1.0 - std::pow(alpha, i + 1.0)) / (1.0 - alpha);
  r.cost_per_iteration = i * cost.c_draft + cost.c_target;
  r.tokens_per_cost = r.expected_tokens_per_iteration / r.cost_per_iteration;

  SeededSampler rng(seed);
  while (r.simulated_tokens < n_tokens) {
    std::size_t accepted = 0;
    while (accepted < cost.lookahead && rng.bernoulli(alpha)) ++accepted;
    r.simulated_tokens += accepted + 1;
    ++r.simulated_iterations;
  }
  if (r.simulated_iterations > 0) {
    r.simulated_tokens_per_iteration =
        static_cast<double>(r.simulated_tokens) /
        static_cast<double>(r.simulated_iterations);
    r.simulated_tokens_per_cost =
        r.simulated_tokens_per_iteration / r.cost_per_iteration;
  }
  return r;
}

}  // namespace heterospec
