// Copyright 2026 The Triage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "triage/matrix.hpp"
#include "triage/tfidf.hpp"

namespace triage {

enum class Word2VecVariant { cbow, skipgram };

const char* to_string(Word2VecVariant v);
Word2VecVariant word2vec_variant_from_string(const std::string& s);

struct Word2VecParams {
  Word2VecVariant variant = Word2VecVariant::cbow;
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  // Starting learning rate; 0 picks the customary default (0.05 for CBOW,
  // 0.025 for skip-gram). Decays linearly to 1e-4 of the start.
  double learning_rate = 0.0;
};

class WordEmbeddingModel {
 public:
  static constexpr int kFormatVersion = 1;

  WordEmbeddingModel() = default;
  WordEmbeddingModel(Word2VecParams params, std::vector<std::string> vocab, Matrix vectors);

  const Word2VecParams& params() const { return params_; }
  std::size_t dim() const { return vectors_.cols(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const Matrix& vectors() const { return vectors_; }
  // Empty span for out-of-vocabulary terms.
  std::span<const double> vector_of(const std::string& term) const;

  nlohmann::json to_json() const;
  static WordEmbeddingModel from_json(const nlohmann::json& j);

  bool operator==(const WordEmbeddingModel& o) const {
    return vocab_ == o.vocab_ && vectors_ == o.vectors_ && params_.variant == o.params_.variant &&
           params_.window == o.params_.window && params_.negative == o.params_.negative &&
           params_.epochs == o.params_.epochs && params_.seed == o.params_.seed;
  }

 private:
  Word2VecParams params_;
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Trains CBOW or skip-gram embeddings with negative sampling. Single
// threaded so that a fixed seed gives a bit-identical model. Throws
// std::invalid_argument on an empty corpus.
WordEmbeddingModel word2vec_train(const std::vector<TokenList>& docs, const Word2VecParams& params);

// Mean of the in-vocabulary token vectors; zeros when none is known.
std::vector<double> embed_average(const WordEmbeddingModel& model, const TokenList& tokens);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace triage
