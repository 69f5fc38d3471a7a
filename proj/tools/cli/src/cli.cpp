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

#include "heterospec_cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "heterospec/analysis.hpp"
#include "heterospec/decoder.hpp"
#include "heterospec/errors.hpp"
#include "heterospec/normalizer.hpp"
#include "heterospec/random.hpp"
#include "heterospec/verification.hpp"
#include "heterospec/vocab.hpp"
#include "report.hpp"

namespace heterospec::cli {

namespace {

constexpr const char* kBudgetEnv = "HETEROSPEC_BUDGET";

struct Output {
  std::string format = "json";
  std::string out;
  std::optional<std::size_t> budget;
};

void add_output_flags(CLI::App* sub, Output& o, bool with_budget) {
  sub->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "md"}))
      ->capture_default_str();
  sub->add_option("--out", o.out, "Write the report to this file instead of stdout");
  if (with_budget) {
    sub->add_option("--budget", o.budget,
                    "Node budget for psi and decomposition searches (default: $" +
                        std::string(kBudgetEnv) + " or 1000000)");
  }
}

std::size_t resolve_budget(const Output& o) {
  if (o.budget) return *o.budget;
  if (const char* env = std::getenv(kBudgetEnv); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::kInvalidArgument,
                std::string(kBudgetEnv) + " must be a non-negative integer");
  }
  return kDefaultNodeBudget;
}

void emit(const Report& report, const Output& o, std::ostream& out) {
  const std::string text = render(report, parse_format(o.format));
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  if (!file || !(file << text)) {
    throw Error(ErrorCode::kIo, "cannot write " + o.out);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Accepts a vocabulary file or a model file, whose vocabulary is used.
Vocabulary load_vocab_any(const std::string& path) {
  const std::string text = read_text(path);
  const Json doc = Json::parse(text, nullptr, false);
  if (doc.is_object() && doc.contains("vocab")) return load_model(path)->vocab();
  return parse_vocabulary_json(text);
}

Json ids_json(const std::vector<TokenId>& ids) { return Json(ids); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto k = s.find(sep);
    if (k) out.emplace_back(s.substr(0, k));
    if (k == std::string_view::npos) break;
    s.remove_prefix(k + 1);
  }
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  Output output;
  std::string target;
  std::string drafter;
  std::string algo = "sd";
  std::size_t lookahead = 4;
  double temp = 1.0;
  std::uint64_t seed = 0;
  std::size_t tokens = 32;
  std::string prompt;
  std::string normalizer = "identity";
  std::size_t window = 5;
  std::string policy = "early_stop";
  std::string trace;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GenerationConfig cfg;
  const bool autoregressive = a.algo == "ar";
  if (!autoregressive) cfg.algorithm = parse_algorithm(a.algo);
  cfg.lookahead = a.lookahead;
  cfg.temperature = Temperature{a.temp};
  cfg.max_new_tokens = a.tokens;
  cfg.window = RealignmentWindow{a.window};
  cfg.drafter_normalizer = Normalizer::parse(a.normalizer);
  cfg.lookahead_kind = parse_lookahead_kind(a.policy);
  cfg.psi_budget = resolve_budget(a.output);
  if (a.temp < 0.0) throw Error(ErrorCode::kInvalidArgument, "--temp must be >= 0");
  if (!autoregressive && a.drafter.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--drafter is required for " + a.algo);
  }

  Report r;
  r.command = "generate";
  r.config["target"] = a.target;
  r.config["drafter"] = a.drafter;
  r.config["algo"] = a.algo;
  r.config["lookahead"] = a.lookahead;
  r.config["temp"] = a.temp;
  r.config["seed"] = a.seed;
  r.config["tokens"] = a.tokens;
  r.config["prompt"] = a.prompt;
  r.config["normalizer"] = cfg.drafter_normalizer.describe();
  r.config["window"] = a.window;
  r.config["policy"] = a.policy;
  r.config["budget"] = cfg.psi_budget;
  r.config["trace"] = a.trace;

  const ModelPtr target = load_model(a.target);
  std::ofstream trace;
  if (!a.trace.empty()) {
    trace.open(a.trace, std::ios::binary | std::ios::trunc);
    if (!trace) throw Error(ErrorCode::kIo, "cannot write " + a.trace);
  }
  SeededSampler rng(a.seed);
  GenerationResult res;
  if (autoregressive) {
    res = generate_autoregressive(*target, a.prompt, a.tokens, cfg.temperature, rng);
  } else {
    TraceSink sink;
    if (trace.is_open()) {
      sink = [&trace](const StepRecord& rec) { trace << to_json_line(rec) << "\n"; };
    }
    res = generate(target, load_model(a.drafter), a.prompt, cfg, rng, sink);
  }
  if (trace.is_open() && !trace.flush()) {
    throw Error(ErrorCode::kIo, "cannot write " + a.trace);
  }

  r.summary["text"] = res.text;
  r.summary["new_tokens"] = res.tokens.size();
  r.summary["token_ids"] = ids_json(res.tokens);
  r.summary["steps"] = res.steps;
  r.summary["drafts_proposed"] = res.drafts_proposed;
  r.summary["drafts_accepted"] = res.drafts_accepted;
  r.summary["acceptance_rate"] =
      res.drafts_proposed
          ? static_cast<double>(res.drafts_accepted) /
                static_cast<double>(res.drafts_proposed)
          : 0.0;
  emit(r, a.output, out);
  return kExitOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  Output output;
  std::vector<std::string> gates;
  std::string algos = "sd,union,tli,slem,slrs";
  std::size_t trials = 100'000;
  std::size_t instances = 50;
  std::size_t dominance = 1000;
  std::uint64_t seed = 42;
  bool negative_control = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  VerifyOptions opts;
  opts.algorithms.clear();
  for (const auto& tag : split(a.algos, ',')) opts.algorithms.push_back(parse_algorithm(tag));
  opts.trials = a.trials;
  opts.rate_instances = a.instances;
  opts.dominance_instances = a.dominance;
  opts.seed = a.seed;
  opts.node_budget = resolve_budget(a.output);
  if (a.negative_control) opts.residual = &corrupted_residual;
  std::vector<std::string> gates = a.gates;
  if (gates.empty()) gates.assign(std::begin(kGateNames), std::end(kGateNames));

  Report r;
  r.command = "verify";
  r.config["gates"] = join(gates, ",");
  r.config["algos"] = a.algos;
  r.config["trials"] = a.trials;
  r.config["instances"] = a.instances;
  r.config["dominance"] = a.dominance;
  r.config["seed"] = a.seed;
  r.config["budget"] = opts.node_budget;
  r.config["negative_control"] = a.negative_control;

  std::vector<std::string> failed;
  for (const auto& name : gates) {
    const GateResult g = run_gate(name, opts);
    if (!g.passed) failed.push_back(g.name);
    std::vector<std::string> shown(
        g.details.begin(),
        g.details.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(g.details.size(), 5)));
    Json row;
    row["gate"] = g.name;
    row["passed"] = g.passed;
    row["checks"] = g.checks;
    row["failures"] = g.failures;
    row["details"] = join(shown, "; ");
    r.rows.push_back(row);
  }
  r.summary["passed"] = failed.empty();
  r.summary["failed_gates"] = join(failed, ",");
  emit(r, a.output, out);
  return failed.empty() ? kExitOk : kExitFailure;
}

// ------------------------------------------------------------------ census

struct CensusArgs {
  Output output;
  std::string drafter;
  std::string complete;
  std::string target;
  std::vector<std::string> texts;
};

int cmd_census(const CensusArgs& a, std::ostream& out) {
  const std::size_t budget = resolve_budget(a.output);
  std::optional<Vocabulary> drafter;
  if (!a.complete.empty()) {
    const auto colon = a.complete.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw Error(ErrorCode::kInvalidArgument, "--complete expects ALPHABET:N");
    }
    std::size_t n = 0;
    try {
      n = std::stoul(a.complete.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--complete expects ALPHABET:N");
    }
    drafter = complete_vocabulary(a.complete.substr(0, colon), n);
  } else if (!a.drafter.empty()) {
    drafter = load_vocab_any(a.drafter);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "census needs --drafter or --complete");
  }
  std::vector<std::string> tokens = a.texts;
  if (tokens.empty()) {
    tokens = a.target.empty() ? drafter->texts() : load_vocab_any(a.target).texts();
  }

  const CensusReport c = decomposition_census(*drafter, tokens, budget);
  Report r;
  r.command = "census";
  r.config["drafter"] = a.drafter;
  r.config["complete"] = a.complete;
  r.config["target"] = a.target;
  r.config["texts"] = join(a.texts, ",");
  r.config["budget"] = budget;
  r.summary["tokens"] = c.rows.size();
  r.summary["budget_failures"] = c.budget_failures;
  auto stats = [&r](const std::string& prefix, const SummaryStats& s) {
    r.summary[prefix + "_mean"] = s.mean;
    r.summary[prefix + "_sd"] = s.sd;
    r.summary[prefix + "_min"] = s.min;
    r.summary[prefix + "_median"] = s.median;
    r.summary[prefix + "_p75"] = s.p75;
    r.summary[prefix + "_max"] = s.max;
    r.summary[prefix + "_skewness"] = s.skewness;
  };
  stats("length", c.length_stats);
  stats("count", c.count_stats);
  for (const auto& row : c.rows) {
    Json j;
    j["text"] = row.text;
    j["length"] = row.length;
    j["count"] = row.count;
    j["drafter_forwards"] = row.drafter_forwards;
    j["budget_exceeded"] = row.budget_exceeded;
    r.rows.push_back(j);
  }
  emit(r, a.output, out);
  return kExitOk;
}

// ------------------------------------------------------------- injectivity

struct InjectivityArgs {
  Output output;
  std::string vocab;
  std::string normalizer = "identity";
  std::string corpus;
  std::size_t prefix_len = 256;
};

int cmd_injectivity(const InjectivityArgs& a, std::ostream& out) {
  const Vocabulary v = load_vocab_any(a.vocab);
  const Normalizer n = Normalizer::parse(a.normalizer);
  const InjectivityReport rep =
      check_injectivity(v, n, load_corpus(a.corpus), a.prefix_len);
  Report r;
  r.command = "injectivity";
  r.config["vocab"] = a.vocab;
  r.config["normalizer"] = n.describe();
  r.config["corpus"] = a.corpus;
  r.config["prefix_len"] = a.prefix_len;
  std::size_t failures = 0;
  for (const auto& res : rep.results) {
    failures += res.passed ? 0 : 1;
    Json j;
    j["input"] = res.input;
    j["passed"] = res.passed;
    j["reason"] = res.reason;
    r.rows.push_back(j);
  }
  r.summary["injective"] = rep.injective;
  r.summary["strings"] = rep.results.size();
  r.summary["failures"] = failures;
  emit(r, a.output, out);
  return kExitOk;
}

// ----------------------------------------------------------------- overlap

struct OverlapArgs {
  Output output;
  std::string target;
  std::string drafter;
};

int cmd_overlap(const OverlapArgs& a, std::ostream& out) {
  const Vocabulary t = load_vocab_any(a.target);
  const Vocabulary d = load_vocab_any(a.drafter);
  const Intersection x = intersect(t, d);
  const double shared = static_cast<double>(x.shared.size());
  Report r;
  r.command = "overlap";
  r.config["target"] = a.target;
  r.config["drafter"] = a.drafter;
  r.summary["target_size"] = t.size();
  r.summary["drafter_size"] = d.size();
  r.summary["shared"] = x.shared.size();
  r.summary["target_ratio"] = x.ratio;
  r.summary["drafter_ratio"] = shared / static_cast<double>(d.size());
  r.summary["jaccard"] =
      shared / (static_cast<double>(t.size() + d.size()) - shared);
  for (const auto& s : x.shared) r.rows.push_back(Json{{"token", s}});
  emit(r, a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Output output;
  double alpha = 0.8;
  std::size_t lookahead = 4;
  double c_draft = 0.05;
  double c_target = 1.0;
  std::size_t tokens = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t sweep = 8;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (!(a.c_draft > 0.0) || !(a.c_target > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "costs must be positive");
  }
  const CostModel cost{a.c_draft, a.c_target, a.lookahead};
  const ThroughputReport t = simulate_throughput(cost, a.alpha, a.tokens, a.seed);
  Report r;
  r.command = "simulate";
  r.config["alpha"] = a.alpha;
  r.config["lookahead"] = a.lookahead;
  r.config["c_draft"] = a.c_draft;
  r.config["c_target"] = a.c_target;
  r.config["tokens"] = a.tokens;
  r.config["seed"] = a.seed;
  r.config["sweep"] = a.sweep;
  r.summary["assumption"] = kThroughputAssumption;
  r.summary["expected_tokens_per_iteration"] = t.expected_tokens_per_iteration;
  r.summary["cost_per_iteration"] = t.cost_per_iteration;
  r.summary["tokens_per_cost"] = t.tokens_per_cost;
  r.summary["simulated_tokens_per_iteration"] = t.simulated_tokens_per_iteration;
  r.summary["simulated_tokens_per_cost"] = t.simulated_tokens_per_cost;
  r.summary["simulated_iterations"] = t.simulated_iterations;
  r.summary["relative_error"] =
      std::abs(t.simulated_tokens_per_cost - t.tokens_per_cost) / t.tokens_per_cost;
  for (std::size_t i = 1; i <= a.sweep; ++i) {
    const ThroughputReport s =
        simulate_throughput(CostModel{a.c_draft, a.c_target, i}, a.alpha, 0);
    Json j;
    j["lookahead"] = i;
    j["expected_tokens_per_iteration"] = s.expected_tokens_per_iteration;
    j["cost_per_iteration"] = s.cost_per_iteration;
    j["tokens_per_cost"] = s.tokens_per_cost;
    r.rows.push_back(j);
  }
  emit(r, a.output, out);
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIo:
      return kExitUsage;
    case ErrorCode::kPsiBudgetExceeded:
    case ErrorCode::kSearchBudgetExceeded:
      return kExitBudget;
    default:
      return kExitFailure;
  }
}

int report_error(std::ostream& err, std::string_view name,
                 const std::string& message, int code,
                 std::optional<std::size_t> budget = std::nullopt) {
  Json j;
  j["error"] = name;
  j["message"] = message;
  j["exit_code"] = code;
  if (budget) j["budget"] = *budget;
  err << j.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Speculative decoding across heterogeneous vocabularies", "heterospec"};
  app.require_subcommand(1);
  std::uint64_t unused_seed = 0;

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "Generate tokens with a decoder");
  g->add_option("--target", gen.target, "Target model JSON")->required();
  g->add_option("--drafter", gen.drafter, "Drafter model JSON");
  g->add_option("--algo", gen.algo, "Decoder")
      ->check(CLI::IsMember({"sd", "union", "tli", "slem", "slrs", "ar"}))
      ->capture_default_str();
  g->add_option("--lookahead", gen.lookahead, "Drafts per iteration")->capture_default_str();
  g->add_option("--temp", gen.temp, "Sampling temperature")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  g->add_option("--tokens", gen.tokens, "New target tokens")->capture_default_str();
  g->add_option("--prompt", gen.prompt, "Prompt text");
  g->add_option("--normalizer", gen.normalizer,
                "Drafter normalizer rules, comma separated")
      ->capture_default_str();
  g->add_option("--window", gen.window, "Realignment lookbehind")->capture_default_str();
  g->add_option("--policy", gen.policy, "Lookahead policy for slrs")
      ->check(CLI::IsMember({"fixed_n", "n_max", "early_stop"}))
      ->capture_default_str();
  g->add_option("--trace", gen.trace, "JSON-lines trace file");
  add_output_flags(g, gen.output, true);

  VerifyArgs ver;
  CLI::App* v = app.add_subcommand("verify", "Run the verification gates");
  v->add_option("--gate", ver.gates, "Gate to run (repeatable; default all)")
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kGateNames),
                                                     std::end(kGateNames))));
  v->add_option("--algo", ver.algos, "Comma-separated decoders")->capture_default_str();
  v->add_option("--trials", ver.trials, "Monte Carlo trials per instance")
      ->capture_default_str();
  v->add_option("--instances", ver.instances, "Random instances per decoder")
      ->capture_default_str();
  v->add_option("--dominance", ver.dominance, "Instances for the dominance sweep")
      ->capture_default_str();
  v->add_option("--seed", ver.seed, "Master seed")->capture_default_str();
  v->add_flag("--negative-control", ver.negative_control,
              "Use a deliberately broken residual; gates must fail");
  add_output_flags(v, ver.output, true);

  CensusArgs cen;
  CLI::App* c = app.add_subcommand("census", "Count decompositions of target tokens");
  c->add_option("--drafter", cen.drafter, "Drafter vocabulary or model JSON");
  c->add_option("--complete", cen.complete,
                "Use the complete vocabulary ALPHABET:N as the drafter");
  c->add_option("--target", cen.target, "Vocabulary whose tokens are counted");
  c->add_option("--text", cen.texts, "String to count (repeatable)");
  c->add_option("--seed", unused_seed, "Accepted for uniformity; unused");
  add_output_flags(c, cen.output, true);

  InjectivityArgs inj;
  CLI::App* i = app.add_subcommand("injectivity", "Round-trip a corpus through a tokenizer");
  i->add_option("--vocab", inj.vocab, "Vocabulary or model JSON")->required();
  i->add_option("--normalizer", inj.normalizer, "Normalizer rules, comma separated")
      ->capture_default_str();
  i->add_option("--corpus", inj.corpus, "One string per line")->required();
  i->add_option("--prefix-len", inj.prefix_len, "Bytes kept per string")
      ->capture_default_str();
  i->add_option("--seed", unused_seed, "Accepted for uniformity; unused");
  add_output_flags(i, inj.output, false);

  OverlapArgs ov;
  CLI::App* o = app.add_subcommand("overlap", "Vocabulary overlap metrics");
  o->add_option("--target", ov.target, "Target vocabulary or model JSON")->required();
  o->add_option("--drafter", ov.drafter, "Drafter vocabulary or model JSON")->required();
  o->add_option("--seed", unused_seed, "Accepted for uniformity; unused");
  add_output_flags(o, ov.output, false);

  SimulateArgs sim;
  CLI::App* s = app.add_subcommand("simulate", "Throughput cost model");
  s->add_option("--alpha", sim.alpha, "Per-draft acceptance probability")
      ->capture_default_str();
  s->add_option("--lookahead", sim.lookahead, "Drafts per iteration")->capture_default_str();
  s->add_option("--c-draft", sim.c_draft, "Drafter forward cost")->capture_default_str();
  s->add_option("--c-target", sim.c_target, "Target forward cost")->capture_default_str();
  s->add_option("--tokens", sim.tokens, "Simulated tokens")->capture_default_str();
  s->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  s->add_option("--sweep", sim.sweep, "Largest lookahead in the sweep table")
      ->capture_default_str();
  add_output_flags(s, sim.output, false);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return report_error(err, "UsageError", e.what(), kExitUsage);
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*v) return cmd_verify(ver, out);
    if (*c) return cmd_census(cen, out);
    if (*i) return cmd_injectivity(inj, out);
    if (*o) return cmd_overlap(ov, out);
    if (*s) return cmd_simulate(sim, out);
  } catch (const BudgetExceeded& e) {
    return report_error(err, error_code_name(e.code()), e.what(),
                        exit_code_for(e.code()), e.budget());
  } catch (const Error& e) {
    return report_error(err, error_code_name(e.code()), e.what(),
                        exit_code_for(e.code()));
  } catch (const std::exception& e) {
    return report_error(err, "InternalError", e.what(), kExitFailure);
  }
  return kExitUsage;
}

}  // namespace heterospec::cli
