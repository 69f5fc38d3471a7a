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

#ifndef HETEROSPEC_RANDOM_HPP_
#define HETEROSPEC_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

namespace heterospec {

// Source of the two kinds of random choice the decoders make. Decoders never
// draw raw numbers, so the same code path can run against a seeded sampler or
// against the exhaustive branch enumerator in analysis.hpp.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  // Index drawn from the (not necessarily normalized) weights by inverse CDF.
  virtual std::size_t categorical(std::span<const double> weights) = 0;
  // True with probability min(1, max(0, p)).
  virtual bool bernoulli(double p) = 0;
};

// Counter-based splittable generator.
//
// Draw k (0-based) of stream s under master seed m is
//   mix(key(m, s) + (k + 1) * 0x9e3779b97f4a7c15),
//   key(m, s) = mix(m ^ mix(s + 0x632be59bd9b4e019)),
// where mix is the SplitMix64 finalizer. Uniforms are (x >> 11 + 1) * 2^-53
// and lie in (0, 1]. One categorical or bernoulli consumes exactly one draw.
class SeededSampler final : public RandomSource {
 public:
  explicit SeededSampler(std::uint64_t master_seed,
                         std::uint64_t stream_index = 0);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64();
  double uniform();

  std::size_t categorical(std::span<const double> weights) override;
  // Accepts iff uniform() <= p, so p = 0 never accepts and p = 1 always does.
  bool bernoulli(double p) override;

  // Independent sampler for replica `index` of this master seed.
  SeededSampler split(std::uint64_t index) const {
    return SeededSampler(master_seed_, index);
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

// Inverse-CDF lookup shared by every sampler: smallest i with
// cumsum(weights)[0..i] >= u * total; never returns a zero-weight index.
std::size_t inverse_cdf(std::span<const double> weights, double u);

}  // namespace heterospec

#endif  // HETEROSPEC_RANDOM_HPP_
