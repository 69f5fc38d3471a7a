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

#include <benchmark/benchmark.h>

#include <string>

#include "heterospec/analysis.hpp"
#include "heterospec/decoder.hpp"
#include "heterospec/engine.hpp"
#include "heterospec/string_level.hpp"

namespace hs = heterospec;

namespace {

std::string data(const std::string& rel) {
  return std::string(HETEROSPEC_DATA_DIR) + "/" + rel;
}

void BM_Tokenize(benchmark::State& state) {
  const hs::Vocabulary v = hs::load_vocabulary(data("vocabs/toy200.json"));
  std::string text;
  while (text.size() < static_cast<std::size_t>(state.range(0))) {
    text += "the license is granted to you under the terms of this agreement ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(v.encode(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(256)->Arg(4096);

void BM_Decompositions(benchmark::State& state) {
  const hs::Vocabulary v = hs::complete_vocabulary("ab", 6);
  const std::string text(static_cast<std::size_t>(state.range(0)), 'a');
  for (auto _ : state) benchmark::DoNotOptimize(hs::count_decompositions(v, text));
}
BENCHMARK(BM_Decompositions)->DenseRange(6, 14, 4);

void BM_Psi(benchmark::State& state) {
  hs::Instance inst;
  inst.target_tokens = {"a", "b", "ab", "ba"};
  inst.drafter_tokens = {"a", "b", "aa", "bb"};
  inst.p = {0.3, 0.3, 0.2, 0.2};
  inst.q = {0.25, 0.25, 0.25, 0.25};
  inst.lookahead = static_cast<std::size_t>(state.range(0));
  inst.policy = hs::LookaheadPolicy::fixed_n(inst.lookahead);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hs::instance_psi(hs::Algorithm::kSlrs, inst));
  }
}
BENCHMARK(BM_Psi)->DenseRange(1, 5, 2);

void generate_bench(benchmark::State& state, hs::Algorithm algo) {
  const hs::ModelPtr target = hs::load_model(data("models/toy_target.json"));
  const hs::ModelPtr drafter = hs::load_model(data("models/toy_drafter.json"));
  hs::GenerationConfig cfg;
  cfg.algorithm = algo;
  cfg.lookahead = 3;
  cfg.max_new_tokens = 64;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    hs::SeededSampler rng(seed++);
    benchmark::DoNotOptimize(
        hs::generate(target, algo == hs::Algorithm::kSd ? target : drafter, "the ", cfg, rng));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.max_new_tokens));
}
BENCHMARK_CAPTURE(generate_bench, sd, hs::Algorithm::kSd);
BENCHMARK_CAPTURE(generate_bench, tli, hs::Algorithm::kTli);
BENCHMARK_CAPTURE(generate_bench, slem, hs::Algorithm::kSlem);
BENCHMARK_CAPTURE(generate_bench, slrs, hs::Algorithm::kSlrs);

}  // namespace
BENCHMARK_MAIN();
