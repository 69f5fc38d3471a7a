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

#include "heterospec/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "heterospec/errors.hpp"
#include "json.hpp"

namespace heterospec {

Vocabulary::Vocabulary(std::vector<std::string> texts)
    : texts_(std::move(texts)) {
  std::set<std::string> bytes;
  index_.reserve(texts_.size());
  for (std::size_t i = 0; i < texts_.size(); ++i) {
    const std::string& t = texts_[i];
    if (t.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "empty token text at id " + std::to_string(i));
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate token text \"" + t + "\"");
    }
    max_token_len_ = std::max(max_token_len_, t.size());
    for (char c : t) bytes.insert(std::string(1, c));
  }
  alphabet_.assign(bytes.begin(), bytes.end());
}

Vocabulary Vocabulary::from_tokens(std::vector<Token> tokens) {
  std::vector<std::string> texts(tokens.size());
  std::vector<bool> seen(tokens.size(), false);
  for (auto& tok : tokens) {
    if (tok.id < 0 || static_cast<std::size_t>(tok.id) >= tokens.size() ||
        seen[tok.id]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token ids must be dense 0..n-1; bad id " +
                      std::to_string(tok.id));
    }
    seen[tok.id] = true;
    texts[tok.id] = std::move(tok.text);
  }
  return Vocabulary(std::move(texts));
}

const std::string& Vocabulary::text(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= texts_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "token id " + std::to_string(id) + " out of range");
  }
  return texts_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::longest_prefix(std::string_view s) const {
  std::size_t len = std::min(s.size(), max_token_len_);
  std::string probe(s.substr(0, len));
  for (; len > 0; --len) {
    probe.resize(len);
    if (index_.count(probe)) return len;
  }
  return 0;
}

std::vector<TokenId> Vocabulary::encode(std::string_view s) const {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = longest_prefix(s.substr(pos));
    if (len == 0) throw TokenizationFailure(std::string(s), pos);
    out.push_back(index_.find(std::string(s.substr(pos, len)))->second);
    pos += len;
  }
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) out += text(id);
  return out;
}

std::vector<Token> tokenize(const Vocabulary& v, std::string_view s) {
  std::vector<Token> out;
  for (TokenId id : v.encode(s)) out.push_back(v.token(id));
  return out;
}

bool is_expressible(const Vocabulary& a, const Vocabulary& b) {
  for (const auto& t : a.texts()) {
    try {
      b.encode(t);
    } catch (const TokenizationFailure&) {
      return false;
    }
  }
  return true;
}

Intersection intersect(const Vocabulary& target, const Vocabulary& drafter) {
  Intersection out;
  for (const auto& t : target.texts()) {
    if (drafter.contains(t)) out.shared.push_back(t);
  }
  std::sort(out.shared.begin(), out.shared.end());
  out.ratio = target.size() == 0
                  ? 0.0
                  : static_cast<double>(out.shared.size()) / target.size();
  return out;
}

Vocabulary parse_vocabulary_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("vocabulary JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary JSON must be an array of {id, text}");
  }
  std::vector<Token> tokens;
  tokens.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item.contains("text") ||
        !item["id"].is_number_integer() || !item["text"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "vocabulary entry must be {\"id\": int, \"text\": string}");
    }
    tokens.push_back(
        Token{item["id"].get<TokenId>(), item["text"].get<std::string>()});
  }
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary_json(buf.str());
}

std::string vocabulary_to_json(const Vocabulary& v) {
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    doc.push_back({{"id", i}, {"text", v.texts()[i]}});
  }
  return doc.dump(1);
}

Vocabulary complete_vocabulary(std::string_view alphabet, std::size_t max_len) {
  std::vector<std::string> texts;
  std::vector<std::string> layer{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& prefix : layer) {
      for (char c : alphabet) next.push_back(prefix + c);
    }
    texts.insert(texts.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return Vocabulary(std::move(texts));
}

}  // namespace heterospec
