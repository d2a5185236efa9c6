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

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "triage/matrix.hpp"
#include "triage/parallel.hpp"

namespace triage {

using TokenList = std::vector<std::string>;

// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
double smoothed_idf(std::size_t num_docs, std::size_t doc_freq);

// Fitted TF-IDF vocabulary. Terms are kept in rank order (highest maximum
// TF-IDF over the training documents first, ties broken lexicographically).
class TfidfModel {
 public:
  static constexpr int kFormatVersion = 1;

  TfidfModel() = default;
  TfidfModel(std::vector<std::string> vocabulary, std::vector<double> idf, std::size_t top_k,
             std::size_t num_docs);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t top_k() const { return top_k_; }
  std::size_t num_docs() const { return num_docs_; }
  std::size_t width() const { return vocabulary_.size(); }
  // Position of `term` in the vocabulary, or -1.
  long index_of(const std::string& term) const;

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json& j);

  bool operator==(const TfidfModel& o) const {
    return vocabulary_ == o.vocabulary_ && idf_ == o.idf_ && top_k_ == o.top_k_ &&
           num_docs_ == o.num_docs_;
  }

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::size_t top_k_ = 200;
  std::size_t num_docs_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// tf(t, d) = count(t, d) / |d|; tfidf = tf * idf; no normalization.
// Throws std::invalid_argument when every training document is empty.
TfidfModel tfidf_fit(const std::vector<TokenList>& docs, std::size_t top_k = 200);

// Dense block of width model.width(); all zeros for an empty document or one
// with no vocabulary term.
std::vector<double> tfidf_transform(const TfidfModel& model, const TokenList& doc);

Matrix tfidf_transform_batch(const TfidfModel& model, const std::vector<TokenList>& docs,
                             Execution exec = Execution::parallel);

}  // namespace triage
