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

#ifndef HETEROSPEC_VOCAB_HPP_
#define HETEROSPEC_VOCAB_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace heterospec {

using TokenId = std::int32_t;

struct Token {
  TokenId id = 0;
  std::string text;

  friend bool operator==(const Token&, const Token&) = default;
};

// A finite set of non-empty byte strings with dense ids 0..size()-1.
//
// Tokenization is greedy: at each position the longest token that is a prefix
// of the remaining input is taken. Instances are immutable after
// construction and safe to share across threads.
class Vocabulary {
 public:
  // Ids are assigned in order. Throws Error(kInvalidArgument) on an empty
  // text or a duplicate text.
  explicit Vocabulary(std::vector<std::string> texts);
  // Ids must be exactly 0..n-1 (in any order).
  static Vocabulary from_tokens(std::vector<Token> tokens);

  std::size_t size() const noexcept { return texts_.size(); }
  const std::string& text(TokenId id) const;
  Token token(TokenId id) const { return Token{id, text(id)}; }
  const std::vector<std::string>& texts() const noexcept { return texts_; }
  std::optional<TokenId> find(std::string_view text) const;
  bool contains(std::string_view text) const { return find(text).has_value(); }

  // Distinct single bytes appearing in any token, sorted.
  const std::vector<std::string>& alphabet() const noexcept {
    return alphabet_;
  }
  std::size_t max_token_len() const noexcept { return max_token_len_; }

  // Length of the longest token that is a prefix of `s`, or 0 if none.
  std::size_t longest_prefix(std::string_view s) const;

  // Greedy longest-prefix partition of `s`. The empty string encodes to an
  // empty sequence. Throws TokenizationFailure.
  std::vector<TokenId> encode(std::string_view s) const;
  std::string decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.texts_ == b.texts_;
  }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<std::string> alphabet_;
  std::size_t max_token_len_ = 0;
};

using VocabularyPtr = std::shared_ptr<const Vocabulary>;

std::vector<Token> tokenize(const Vocabulary& v, std::string_view s);

// True iff every token of `a` tokenizes successfully against `b`.
bool is_expressible(const Vocabulary& a, const Vocabulary& b);

struct Intersection {
  std::vector<std::string> shared;  // sorted
  double ratio = 0.0;               // |T ∩ D| / |T|
};

Intersection intersect(const Vocabulary& target, const Vocabulary& drafter);

// JSON array of {"id": int, "text": string}; ids must be dense.
Vocabulary parse_vocabulary_json(std::string_view json_text);
Vocabulary load_vocabulary(const std::filesystem::path& path);
std::string vocabulary_to_json(const Vocabulary& v);

// All strings of length 1..max_len over `alphabet`, shortest first.
Vocabulary complete_vocabulary(std::string_view alphabet, std::size_t max_len);

}  // namespace heterospec

#endif  // HETEROSPEC_VOCAB_HPP_
