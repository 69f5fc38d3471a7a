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

#ifndef HETEROSPEC_LM_HPP_
#define HETEROSPEC_LM_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heterospec/random.hpp"
#include "heterospec/vocab.hpp"

namespace heterospec {

using Distribution = std::vector<double>;

inline constexpr double kDistributionTolerance = 1e-9;

// tau = 0 is argmax (lowest id wins ties), tau = 1 is the identity, other
// values raise probabilities to the power 1/tau and renormalize.
struct Temperature {
  double tau = 1.0;
};

Distribution apply_temperature(std::span<const double> probs, Temperature t);

// Checks non-negativity, finiteness and unit mass within `tolerance`.
bool is_distribution(std::span<const double> probs,
                     double tolerance = kDistributionTolerance);

// Plays the role of the target p or the drafter q: maps a context of token
// ids to a probability vector over vocab(). Immutable after construction.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  const Vocabulary& vocab() const noexcept { return *vocab_; }
  const VocabularyPtr& vocab_ptr() const noexcept { return vocab_; }

  // Untempered distribution of the next token.
  virtual Distribution probabilities(std::span<const TokenId> context) const = 0;
  virtual std::string_view kind() const noexcept = 0;
  // How many trailing context ids can influence the output. Zero means the
  // model ignores its context entirely.
  virtual std::size_t context_order() const noexcept = 0;

 protected:
  explicit ConditionalModel(VocabularyPtr vocab);

 private:
  VocabularyPtr vocab_;
};

using ModelPtr = std::shared_ptr<const ConditionalModel>;

// Explicit table keyed by the last `order` context ids. A context without an
// exact entry backs off to its longest suffix that has one; if none does
// (including the empty key) lookup throws Error(kUnknownContext).
class TableModel final : public ConditionalModel {
 public:
  using Table = std::map<std::vector<TokenId>, Distribution>;

  TableModel(VocabularyPtr vocab, std::size_t order, Table entries);
  // Order-0 model with a single distribution.
  static std::shared_ptr<TableModel> context_free(VocabularyPtr vocab,
                                                  Distribution probs);

  Distribution probabilities(std::span<const TokenId> context) const override;
  std::string_view kind() const noexcept override { return "table"; }
  std::size_t context_order() const noexcept override { return order_; }
  const Table& entries() const noexcept { return entries_; }

 private:
  std::size_t order_;
  Table entries_;
};

// Add-one smoothed n-gram model conditioning on up to `order` previous ids:
// p(w | h) = (c(h, w) + 1) / (c(h) + |V|), with h the last min(order, |ctx|)
// ids. Histories never seen in training fall out as uniform.
class NgramModel final : public ConditionalModel {
 public:
  NgramModel(VocabularyPtr vocab, std::size_t order,
             const std::vector<std::vector<TokenId>>& documents);

  Distribution probabilities(std::span<const TokenId> context) const override;
  std::string_view kind() const noexcept override { return "ngram"; }
  std::size_t context_order() const noexcept override { return order_; }

 private:
  struct HistoryCounts {
    std::map<TokenId, double> next;
    double total = 0.0;
  };

  std::size_t order_;
  std::map<std::vector<TokenId>, HistoryCounts> counts_;
};

Distribution distribution(const ConditionalModel& m,
                          std::span<const TokenId> context, Temperature temp);

TokenId sample(const ConditionalModel& m, std::span<const TokenId> context,
               Temperature temp, RandomSource& rng);

// Throws TokenizationFailure if a corpus line is not expressible in `v`.
std::shared_ptr<NgramModel> train_ngram(const std::vector<std::string>& corpus,
                                        VocabularyPtr v, std::size_t order);

// Model file loader. Table models follow
//   {"vocab": path, "order": k, "entries": [{"context": [...], "probs": [...]}]}
// and an n-gram file is {"kind": "ngram", "vocab": path, "corpus": path,
// "order": k}. Relative paths resolve against the model file's directory.
ModelPtr load_model(const std::filesystem::path& path);
ModelPtr parse_model_json(std::string_view json_text,
                          const std::filesystem::path& base_dir);
std::string table_model_to_json(const TableModel& m, std::string_view vocab_path);

// One document per line; a trailing '\r' is dropped.
std::vector<std::string> load_corpus(const std::filesystem::path& path);

}  // namespace heterospec

#endif  // HETEROSPEC_LM_HPP_
