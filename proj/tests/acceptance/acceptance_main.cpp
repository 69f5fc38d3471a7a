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

// Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "heterospec/analysis.hpp"
#include "heterospec/decoder.hpp"
#include "heterospec/normalizer.hpp"
#include "heterospec/verification.hpp"
#include "heterospec_cli/cli.hpp"

namespace hs = heterospec;
namespace fs = std::filesystem;

namespace {

constexpr double kLosslessSeconds = 10.0;
constexpr double kRateSeconds = 120.0;
constexpr double kPsiTolerance = 1e-9;
constexpr double kSigmas = 3.0;

std::string data(const std::string& rel) {
  return std::string(HETEROSPEC_DATA_DIR) + "/" + rel;
}

struct Line {
  bool passed = true;
  std::string note;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      passed = false;
      if (!note.empty()) note += "; ";
      note += why;
    }
  }
};

std::string gate_note(const hs::GateResult& g) {
  std::string s = g.name + " " + std::to_string(g.checks - g.failures) + "/" +
                  std::to_string(g.checks);
  if (g.failures > 0) {
    s += " first failure: " + g.details.front();
  } else if (!g.details.empty()) {
    s += " (" + g.details.front() + ")";
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double x, int digits = 2) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << x;
  return os.str();
}

Line losslessness() {
  Line l;
  const auto suite = hs::small_instance_suite();
  for (hs::Algorithm a : hs::kAllAlgorithms) {
    std::size_t n = 0;
    for (const auto& inst : suite) n += hs::applicable(a, inst);
    l.require(n >= 20, std::string(hs::algorithm_name(a)) + " has " +
                           std::to_string(n) + " instances");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const hs::GateResult g = hs::gate_losslessness(hs::VerifyOptions{});
  const double secs = seconds_since(t0);
  l.require(g.passed, gate_note(g));
  l.require(secs < kLosslessSeconds, "took " + fixed(secs) + " s");
  l.note = (l.note.empty() ? gate_note(g) : l.note) + " in " + fixed(secs) + " s";
  return l;
}

Line acceptance_rates() {
  Line l;
  hs::VerifyOptions o;
  o.trials = 100'000;
  o.rate_instances = 50;
  const auto t0 = std::chrono::steady_clock::now();
  const hs::GateResult g = hs::gate_acceptance_rates(o);
  const double secs = seconds_since(t0);
  l.require(g.passed, gate_note(g));
  l.require(secs < kRateSeconds, "took " + fixed(secs) + " s");
  l.note = (l.note.empty() ? gate_note(g) : l.note) + " in " + fixed(secs) + " s";
  return l;
}

Line dominance() {
  Line l;
  hs::VerifyOptions o;
  o.dominance_instances = 1000;
  const hs::GateResult g = hs::gate_dominance(o);
  l.require(g.passed, gate_note(g));
  if (l.note.empty()) l.note = gate_note(g);
  return l;
}

Line exact_match_penalty() {
  Line l;
  hs::Instance inst;
  inst.name = "half";
  inst.target_tokens = {"a", "b"};
  inst.drafter_tokens = {"a", "b"};
  inst.p = {0.5, 0.5};
  inst.q = inst.p;
  const hs::PsiTable psi = hs::instance_psi(hs::Algorithm::kSlem, inst);
  const double closed = hs::closed_form_alpha(hs::Algorithm::kSlem, inst, &psi);
  const hs::RateReport r = hs::run_monte_carlo(hs::Algorithm::kSlem, inst, 100'000, 42);
  const hs::RateReport sd = hs::run_monte_carlo(hs::Algorithm::kSd, inst, 100'000, 42);
  const double sigma = std::sqrt(0.25 / 100'000);
  l.require(std::abs(closed - 0.5) < 1e-12, "closed form " + fixed(closed, 6));
  l.require(std::abs(r.empirical_alpha - 0.5) <= kSigmas * sigma,
            "empirical " + fixed(r.empirical_alpha, 5));
  l.require(r.empirical_alpha < sd.empirical_alpha && sd.empirical_alpha == 1.0,
            "sd " + fixed(sd.empirical_alpha, 5));
  const hs::GateResult g = hs::gate_exact_match_penalty(hs::VerifyOptions{});
  l.require(g.passed, gate_note(g));
  if (l.note.empty()) {
    l.note = "p=(0.5,0.5): closed " + fixed(closed, 4) + ", empirical " +
             fixed(r.empirical_alpha, 4) + ", sd " + fixed(sd.empirical_alpha, 4) + "; " +
             gate_note(g);
  }
  return l;
}

Line decomposition_law() {
  Line l;
  const hs::Vocabulary complete = hs::complete_vocabulary("ab", 6);
  std::vector<std::string> texts;
  std::string s;
  for (std::size_t m = 1; m <= 6; ++m) {
    s += (m % 2) ? 'a' : 'b';
    texts.push_back(s);
  }
  const hs::CensusReport c = hs::decomposition_census(complete, texts);
  for (std::size_t m = 1; m <= 6; ++m) {
    const std::size_t want = std::size_t{1} << (m - 1);
    l.require(c.rows[m - 1].count == want,
              texts[m - 1] + " has " + std::to_string(c.rows[m - 1].count));
  }
  const hs::Vocabulary hello = hs::load_vocabulary(data("vocabs/hello13.json"));
  const std::size_t h = hs::count_decompositions(hello, "Hello").count;
  l.require(hello.size() == 13 && h == 14, "Hello has " + std::to_string(h));
  const hs::GateResult g = hs::gate_decomposition_law(hs::VerifyOptions{});
  l.require(g.passed, gate_note(g));
  if (l.note.empty()) l.note = "2^(m-1) for m=1..6, Hello 14; " + gate_note(g);
  return l;
}

Line n_max() {
  Line l;
  const hs::Vocabulary d = hs::load_vocabulary(data("vocabs/hello_world_drafter.json"));
  const auto tv = std::make_shared<const hs::Vocabulary>(
      hs::load_vocabulary(data("vocabs/hello_world_target.json")));
  const auto dv = std::make_shared<const hs::Vocabulary>(d);
  const std::size_t n = hs::compute_n_max(d, *tv);
  l.require(n == 3, "n_max " + std::to_string(n));

  // A drafter that always proposes hello_ then world; a third draft would
  // show up in the trace.
  hs::TableModel::Table dt;
  hs::Distribution first(d.size(), 0.0), second(d.size(), 0.0);
  first[*d.find("hello_")] = 1.0;
  second[*d.find("world")] = 1.0;
  dt[{}] = first;
  dt[{static_cast<hs::TokenId>(*d.find("hello_"))}] = second;
  const auto drafter = std::make_shared<hs::TableModel>(dv, 1, dt);
  hs::TableModel::Table tt;
  tt[{}] = hs::Distribution(tv->size(), 1.0 / static_cast<double>(tv->size()));
  const auto target = std::make_shared<hs::TableModel>(tv, 0, tt);

  hs::GenerationConfig cfg;
  cfg.algorithm = hs::Algorithm::kSlrs;
  cfg.lookahead = n;
  cfg.max_new_tokens = 1;
  cfg.lookahead_kind = hs::LookaheadKind::kEarlyStop;
  hs::SeededSampler rng(1);
  std::vector<std::string> drafted;
  hs::generate(target, drafter, "", cfg, rng,
               [&](const hs::StepRecord& r) {
                 if (r.step == 0) drafted = r.draft_texts;
               });
  l.require(drafted == std::vector<std::string>{"hello_", "world"},
            "first step drafted " + std::to_string(drafted.size()) + " tokens");
  const hs::GateResult g = hs::gate_n_max(hs::VerifyOptions{});
  l.require(g.passed, gate_note(g));
  if (l.note.empty()) l.note = "n_max 3, drafts (hello_, world); " + gate_note(g);
  return l;
}

Line psi_normalization() {
  Line l;
  hs::SeededSampler rng(7, 0x5e);
  hs::InstanceGenOptions gen;
  gen.max_vocab = 6;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const hs::Instance inst = hs::random_instance(rng, gen, "pair" + std::to_string(k));
    const hs::Vocabulary t(inst.target_tokens);
    const hs::Vocabulary d(inst.drafter_tokens);
    const std::size_t n = hs::compute_n_max(d, t);
    hs::Instance es = inst;
    es.lookahead = n;
    es.policy = hs::LookaheadPolicy::early_stop(n);
    const hs::PsiTable psi = hs::instance_psi(hs::Algorithm::kSlrs, es);
    double total = 0.0;
    for (double x : psi.as_vector(t.size())) total += x;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  l.require(worst <= kPsiTolerance, "max |sum psi - 1| = " + std::to_string(worst));
  const hs::GateResult g = hs::gate_psi_normalization(hs::VerifyOptions{});
  l.require(g.passed, gate_note(g));
  if (l.note.empty()) {
    std::ostringstream os;
    os << "max |sum psi - 1| = " << worst << "; " << gate_note(g);
    l.note = os.str();
  }
  return l;
}

Line non_injectivity() {
  Line l;
  const hs::ModelPtr target = hs::load_model(data("models/toy_target.json"));
  const hs::ModelPtr drafter = hs::load_model(data("models/toy_drafter.json"));
  hs::GenerationConfig cfg;
  cfg.algorithm = hs::Algorithm::kSlem;
  cfg.lookahead = 3;
  cfg.max_new_tokens = 200;
  cfg.drafter_normalizer = hs::Normalizer::parse("collapse_spaces");
  const std::string prompt = "the  cat   sat ";
  std::size_t fallbacks = 0;
  std::string traced;
  try {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      hs::SeededSampler rng(seed);
      traced.clear();
      const hs::GenerationResult r =
          hs::generate(target, drafter, prompt, cfg, rng, [&](const hs::StepRecord& s) {
            fallbacks += s.realign_fallback;
            traced += s.emitted_text;
          });
      l.require(r.tokens.size() == cfg.max_new_tokens, "short output");
      l.require(r.text == prompt + target->vocab().decode(r.tokens),
                "text differs from prompt + tokens (seed " + std::to_string(seed) + ")");
      l.require(r.text == prompt + traced, "trace differs (seed " + std::to_string(seed) + ")");
    }
  } catch (const std::exception& e) {
    l.require(false, std::string("generation threw: ") + e.what());
  }
  std::vector<std::string> corpus;
  std::ifstream in(data("corpus/injectivity.txt"));
  for (std::string line; std::getline(in, line);) corpus.push_back(line);
  const hs::InjectivityReport inj =
      hs::check_injectivity(drafter->vocab(), cfg.drafter_normalizer, corpus, 256);
  l.require(!inj.injective, "collapse_spaces not flagged");
  if (l.note.empty()) {
    l.note = "10 seeds x 200 tokens byte-exact, " + std::to_string(fallbacks) +
             " realignment fallbacks; collapse_spaces flagged";
  }
  return l;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Line determinism() {
  Line l;
  const fs::path dir = fs::temp_directory_path() / "heterospec_acceptance";
  fs::create_directories(dir);
  const std::string tt = data("models/toy_target.json");
  const std::string td = data("models/toy_drafter.json");
  const std::vector<std::vector<std::string>> commands = {
      {"generate", "--target", tt, "--drafter", td, "--algo", "slrs", "--seed", "3",
       "--tokens", "40", "--trace", "@trace"},
      {"generate", "--target", tt, "--drafter", td, "--algo", "slem", "--seed", "3",
       "--tokens", "40", "--normalizer", "collapse_spaces", "--prompt", "a  b",
       "--trace", "@trace"},
      {"generate", "--target", tt, "--drafter", td, "--algo", "union", "--seed", "3",
       "--tokens", "40", "--trace", "@trace"},
      {"generate", "--target", tt, "--drafter", td, "--algo", "tli", "--seed", "3",
       "--tokens", "40", "--format", "csv"},
      {"generate", "--target", tt, "--drafter", tt, "--algo", "sd", "--seed", "3",
       "--tokens", "40", "--format", "md"},
      {"verify", "--gate", "acceptance_rates", "--trials", "2000", "--instances", "3",
       "--seed", "5"},
      {"census", "--drafter", data("vocabs/toy200.json"), "--seed", "1"},
      {"injectivity", "--vocab", td, "--corpus", data("corpus/injectivity.txt"),
       "--normalizer", "collapse_spaces"},
      {"overlap", "--target", tt, "--drafter", td},
      {"simulate", "--alpha", "0.7", "--tokens", "100000", "--seed", "9"},
  };
  std::size_t files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<std::string> args = {"heterospec"};
      const fs::path report = dir / ("c" + std::to_string(c));
      const fs::path trace = report.string() + ".jsonl";
      fs::remove(report);
      fs::remove(trace);
      for (const auto& a : commands[c]) args.push_back(a == "@trace" ? trace.string() : a);
      args.insert(args.end(), {"--out", report.string()});
      std::ostringstream out, err;
      const int code = heterospec::cli::run(args, out, err);
      l.require(code == heterospec::cli::kExitOk,
                commands[c][0] + " exited " + std::to_string(code) + " " + err.str());
      outputs[rep].push_back(slurp(report));
      if (fs::exists(trace)) outputs[rep].push_back(slurp(trace));
    }
    l.require(outputs[0] == outputs[1] && !outputs[0].front().empty(),
              "command " + std::to_string(c) + " (" + commands[c][0] + ") differs");
    files += outputs[0].size();
  }
  fs::remove_all(dir);
  if (l.note.empty()) {
    l.note = std::to_string(commands.size()) + " commands, " + std::to_string(files) +
             " output files byte-identical across reruns";
  }
  return l;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Line()>>> criteria = {
      {"losslessness", losslessness},
      {"acceptance rates", acceptance_rates},
      {"dominance", dominance},
      {"exact-match penalty", exact_match_penalty},
      {"decomposition law", decomposition_law},
      {"n_max", n_max},
      {"psi normalization", psi_normalization},
      {"non-injectivity", non_injectivity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Line l;
    try {
      l = criteria[i].second();
    } catch (const std::exception& e) {
      l.require(false, std::string("threw: ") + e.what());
    }
    failed += !l.passed;
    std::cout << (l.passed ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first
              << ": " << l.note << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
