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

#include "heterospec/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "heterospec/errors.hpp"
#include "json.hpp"

namespace heterospec {

Distribution apply_temperature(std::span<const double> probs, Temperature t) {
  if (!(t.tau >= 0.0) || !std::isfinite(t.tau)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  Distribution out(probs.begin(), probs.end());
  if (out.empty() || t.tau == 1.0) return out;
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] > out[argmax]) argmax = i;
  }
  if (t.tau == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[argmax] = 1.0;
    return out;
  }
  // exp((log p_i - log p_max) / tau) keeps tiny tau finite.
  const double log_max = std::log(out[argmax]);
  double total = 0.0;
  for (double& x : out) {
    x = x > 0.0 ? std::exp((std::log(x) - log_max) / t.tau) : 0.0;
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

bool is_distribution(std::span<const double> probs, double tolerance) {
  double total = 0.0;
  for (double x : probs) {
    if (!std::isfinite(x) || x < 0.0) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tolerance;
}

ConditionalModel::ConditionalModel(VocabularyPtr vocab)
    : vocab_(std::move(vocab)) {
  if (!vocab_ || vocab_->size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "model needs a non-empty vocabulary");
  }
}

TableModel::TableModel(VocabularyPtr vocab, std::size_t order, Table entries)
    : ConditionalModel(std::move(vocab)),
      order_(order),
      entries_(std::move(entries)) {
  const std::size_t n = this->vocab().size();
  for (auto& [ctx, probs] : entries_) {
    if (ctx.size() > order_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table context longer than the model order");
    }
    for (TokenId id : ctx) {
      if (id < 0 || static_cast<std::size_t>(id) >= n) {
        throw Error(ErrorCode::kInvalidArgument, "table context id out of range");
      }
    }
    if (probs.size() != n || !is_distribution(probs, 1e-6)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "table entry is not a distribution over the vocabulary");
    }
    double total = 0.0;
    for (double x : probs) total += x;
    for (double& x : probs) x /= total;
  }
}

std::shared_ptr<TableModel> TableModel::context_free(VocabularyPtr vocab,
                                                     Distribution probs) {
  Table t;
  t.emplace(std::vector<TokenId>{}, std::move(probs));
  return std::make_shared<TableModel>(std::move(vocab), 0, std::move(t));
}

Distribution TableModel::probabilities(std::span<const TokenId> context) const {
  std::size_t k = std::min(order_, context.size());
  for (;; --k) {
    std::vector<TokenId> key(context.end() - k, context.end());
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    if (k == 0) break;
  }
  throw Error(ErrorCode::kUnknownContext,
              "no table entry for the context or any of its suffixes");
}

NgramModel::NgramModel(VocabularyPtr vocab, std::size_t order,
                       const std::vector<std::vector<TokenId>>& documents)
    : ConditionalModel(std::move(vocab)), order_(order) {
  if (order_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  for (const auto& doc : documents) {
    for (std::size_t j = 0; j < doc.size(); ++j) {
      for (std::size_t h = 0; h <= std::min(order_, j); ++h) {
        std::vector<TokenId> hist(doc.begin() + (j - h), doc.begin() + j);
        auto& c = counts_[hist];
        c.next[doc[j]] += 1.0;
        c.total += 1.0;
      }
    }
  }
}

Distribution NgramModel::probabilities(std::span<const TokenId> context) const {
  const std::size_t n = vocab().size();
  const std::size_t h = std::min(order_, context.size());
  std::vector<TokenId> key(context.end() - h, context.end());
  Distribution out(n, 1.0);
  double denom = static_cast<double>(n);
  auto it = counts_.find(key);
  if (it != counts_.end()) {
    for (const auto& [id, c] : it->second.next) out[id] += c;
    denom += it->second.total;
  }
  for (double& x : out) x /= denom;
  return out;
}

Distribution distribution(const ConditionalModel& m,
                          std::span<const TokenId> context, Temperature temp) {
  const std::size_t n = m.vocab().size();
  for (TokenId id : context) {
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw Error(ErrorCode::kInvalidArgument, "context id out of range");
    }
  }
  return apply_temperature(m.probabilities(context), temp);
}

TokenId sample(const ConditionalModel& m, std::span<const TokenId> context,
               Temperature temp, RandomSource& rng) {
  Distribution d = distribution(m, context, temp);
  return static_cast<TokenId>(rng.categorical(d));
}

std::shared_ptr<NgramModel> train_ngram(const std::vector<std::string>& corpus,
                                        VocabularyPtr v, std::size_t order) {
  std::vector<std::vector<TokenId>> docs;
  docs.reserve(corpus.size());
  for (const auto& line : corpus) docs.push_back(v->encode(line));
  return std::make_shared<NgramModel>(std::move(v), order, docs);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<std::string> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

ModelPtr parse_model_json(std::string_view json_text,
                          const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
    const std::string kind = doc.value("kind", std::string("table"));
    auto vocab = std::make_shared<const Vocabulary>(
        load_vocabulary(resolve(base_dir, doc.at("vocab").get<std::string>())));
    const auto order = doc.at("order").get<std::size_t>();
    if (kind == "ngram") {
      auto corpus =
          load_corpus(resolve(base_dir, doc.at("corpus").get<std::string>()));
      return train_ngram(corpus, std::move(vocab), order);
    }
    if (kind != "table") {
      throw Error(ErrorCode::kInvalidArgument, "unknown model kind " + kind);
    }
    TableModel::Table table;
    for (const auto& e : doc.at("entries")) {
      table[e.at("context").get<std::vector<TokenId>>()] =
          e.at("probs").get<Distribution>();
    }
    return std::make_shared<TableModel>(std::move(vocab), order,
                                        std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("model JSON: ") + e.what());
  }
}

ModelPtr load_model(const std::filesystem::path& path) {
  return parse_model_json(read_file(path), path.parent_path());
}

std::string table_model_to_json(const TableModel& m, std::string_view vocab_path) {
  nlohmann::json doc;
  doc["vocab"] = std::string(vocab_path);
  doc["order"] = m.context_order();
  doc["entries"] = nlohmann::json::array();
  for (const auto& [ctx, probs] : m.entries()) {
    doc["entries"].push_back({{"context", ctx}, {"probs", probs}});
  }
  return doc.dump(1);
}

}  // namespace heterospec
