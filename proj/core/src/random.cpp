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

#include "heterospec/random.hpp"

#include <algorithm>

namespace heterospec {

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

SeededSampler::SeededSampler(std::uint64_t master_seed,
                             std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      key_(splitmix64_mix(master_seed ^
                          splitmix64_mix(stream_index + 0x632be59bd9b4e019ULL))) {}

std::uint64_t SeededSampler::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double SeededSampler::uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::size_t inverse_cdf(std::span<const double> weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = u * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last_positive = i;
    if (cum >= target) return i;
  }
  return last_positive;
}

std::size_t SeededSampler::categorical(std::span<const double> weights) {
  return inverse_cdf(weights, uniform());
}

bool SeededSampler::bernoulli(double p) { return uniform() <= p; }

}  // namespace heterospec
