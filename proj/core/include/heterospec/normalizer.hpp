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

#ifndef HETEROSPEC_NORMALIZER_HPP_
#define HETEROSPEC_NORMALIZER_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "heterospec/vocab.hpp"

namespace heterospec {

enum class NormalizerRule { kIdentity, kLowercase, kCollapseSpaces, kStripAccents };

NormalizerRule parse_normalizer_rule(std::string_view tag);
std::string_view normalizer_rule_name(NormalizerRule rule);

// Text rewriting applied before encoding, used to emulate tokenizers whose
// decode(encode(s)) differs from s. Every rule is idempotent and so is any
// ordered composition of them.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(std::vector<NormalizerRule> rules)
      : rules_(std::move(rules)) {}
  // Comma-separated rule tags, e.g. "lowercase,collapse_spaces". Empty or
  // "identity" gives the identity normalizer.
  static Normalizer parse(std::string_view text);

  const std::vector<NormalizerRule>& rules() const noexcept { return rules_; }
  bool is_identity() const;
  std::string apply(std::string_view s) const;
  std::string describe() const;

 private:
  std::vector<NormalizerRule> rules_;
};

inline std::string normalize(const Normalizer& n, std::string_view s) {
  return n.apply(s);
}

struct InjectivityResult {
  std::string input;  // the truncated corpus string
  bool passed = false;
  std::string reason;  // empty when passed
};

struct InjectivityReport {
  std::vector<InjectivityResult> results;
  bool injective = true;  // AND over results
};

// For each corpus string cut to its first `prefix_len` bytes, checks that
// decode(encode(normalize(s))) == s. Tokenization failures count as failed
// strings rather than aborting the check.
InjectivityReport check_injectivity(const Vocabulary& v, const Normalizer& n,
                                    const std::vector<std::string>& corpus,
                                    std::size_t prefix_len);

}  // namespace heterospec

#endif  // HETEROSPEC_NORMALIZER_HPP_
