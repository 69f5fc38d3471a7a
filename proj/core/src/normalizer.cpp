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

#include "heterospec/normalizer.hpp"

#include <array>
#include <utility>

#include "heterospec/errors.hpp"

namespace heterospec {
namespace {

// UTF-8 sequences folded by strip_accents.
constexpr std::array<std::pair<std::string_view, char>, 4> kAccentTable{{
    {"\xC3\xA9", 'e'},  // é
    {"\xC3\xA8", 'e'},  // è
    {"\xC3\xA0", 'a'},  // à
    {"\xC3\xBC", 'u'},  // ü
}};

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ' ' && !out.empty() && out.back() == ' ') continue;
    out.push_back(c);
  }
  return out;
}

std::string strip_accents(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool replaced = false;
    for (const auto& [from, to] : kAccentTable) {
      if (s.substr(i, from.size()) == from) {
        out.push_back(to);
        i += from.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(s[i++]);
  }
  return out;
}

}  // namespace

NormalizerRule parse_normalizer_rule(std::string_view tag) {
  if (tag == "identity") return NormalizerRule::kIdentity;
  if (tag == "lowercase") return NormalizerRule::kLowercase;
  if (tag == "collapse_spaces") return NormalizerRule::kCollapseSpaces;
  if (tag == "strip_accents") return NormalizerRule::kStripAccents;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown normalizer rule \"" + std::string(tag) + "\"");
}

std::string_view normalizer_rule_name(NormalizerRule rule) {
  switch (rule) {
    case NormalizerRule::kIdentity: return "identity";
    case NormalizerRule::kLowercase: return "lowercase";
    case NormalizerRule::kCollapseSpaces: return "collapse_spaces";
    case NormalizerRule::kStripAccents: return "strip_accents";
  }
  return "identity";
}

Normalizer Normalizer::parse(std::string_view text) {
  std::vector<NormalizerRule> rules;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto tag = text.substr(0, comma);
    if (!tag.empty()) rules.push_back(parse_normalizer_rule(tag));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return Normalizer(std::move(rules));
}

bool Normalizer::is_identity() const {
  for (auto r : rules_) {
    if (r != NormalizerRule::kIdentity) return false;
  }
  return true;
}

std::string Normalizer::apply(std::string_view s) const {
  std::string out(s);
  for (auto rule : rules_) {
    switch (rule) {
      case NormalizerRule::kIdentity: break;
      case NormalizerRule::kLowercase: out = lowercase(out); break;
      case NormalizerRule::kCollapseSpaces: out = collapse_spaces(out); break;
      case NormalizerRule::kStripAccents: out = strip_accents(out); break;
    }
  }
  return out;
}

std::string Normalizer::describe() const {
  if (rules_.empty()) return "identity";
  std::string out;
  for (auto r : rules_) {
    if (!out.empty()) out += ',';
    out += normalizer_rule_name(r);
  }
  return out;
}

InjectivityReport check_injectivity(const Vocabulary& v, const Normalizer& n,
                                    const std::vector<std::string>& corpus,
                                    std::size_t prefix_len) {
  if (prefix_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "prefix_len must be positive");
  }
  InjectivityReport report;
  for (const auto& doc : corpus) {
    InjectivityResult r;
    r.input = doc.substr(0, prefix_len);
    try {
      std::string round_trip = v.decode(v.encode(n.apply(r.input)));
      r.passed = round_trip == r.input;
      if (!r.passed) r.reason = "decode(encode(s)) = \"" + round_trip + "\"";
    } catch (const TokenizationFailure& e) {
      r.passed = false;
      r.reason = e.what();
    }
    report.injective = report.injective && r.passed;
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace heterospec
