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

#include "triage/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

double smoothed_idf(std::size_t num_docs, std::size_t doc_freq) {
  return std::log((1.0 + static_cast<double>(num_docs)) / (1.0 + static_cast<double>(doc_freq))) +
         1.0;
}

TfidfModel::TfidfModel(std::vector<std::string> vocabulary, std::vector<double> idf,
                       std::size_t top_k, std::size_t num_docs)
    : vocabulary_(std::move(vocabulary)), idf_(std::move(idf)), top_k_(top_k), num_docs_(num_docs) {
  if (vocabulary_.size() != idf_.size()) throw std::invalid_argument("tfidf: vocabulary/idf size mismatch");
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], i).second) {
      throw std::invalid_argument("tfidf: duplicate term '" + vocabulary_[i] + "'");
    }
    if (!(std::isfinite(idf_[i]) && idf_[i] > 0.0)) {
      throw std::invalid_argument("tfidf: idf weights must be finite and > 0");
    }
  }
}

long TfidfModel::index_of(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

nlohmann::json TfidfModel::to_json() const {
  return {{"format", "tfidf"},
          {"format_version", kFormatVersion},
          {"top_k", top_k_},
          {"num_docs", num_docs_},
          {"vocabulary", vocabulary_},
          {"idf", idf_}};
}

TfidfModel TfidfModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "tfidf") throw ModelFormatError("not a tfidf model");
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ModelFormatError("unsupported tfidf format_version");
    }
    return TfidfModel(j.at("vocabulary").get<std::vector<std::string>>(),
                      j.at("idf").get<std::vector<double>>(), j.at("top_k").get<std::size_t>(),
                      j.at("num_docs").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("tfidf model: ") + e.what());
  }
}

TfidfModel tfidf_fit(const std::vector<TokenList>& docs, std::size_t top_k) {
  const bool any_tokens =
      std::any_of(docs.begin(), docs.end(), [](const TokenList& d) { return !d.empty(); });
  if (!any_tokens) throw std::invalid_argument("tfidf_fit: no non-empty training document");

  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& t : uniq) ++df[t];
  }
  const std::size_t n = docs.size();

  std::map<std::string, double> best;
  for (const auto& doc : docs) {
    if (doc.empty()) continue;
    std::map<std::string, std::size_t> counts;
    for (const auto& t : doc) ++counts[t];
    const double len = static_cast<double>(doc.size());
    for (const auto& [term, c] : counts) {
      const double v = (static_cast<double>(c) / len) * smoothed_idf(n, df[term]);
      auto [it, inserted] = best.emplace(term, v);
      if (!inserted) it->second = std::max(it->second, v);
    }
  }

  std::vector<std::pair<std::string, double>> ranked(best.begin(), best.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);

  std::vector<std::string> vocab;
  std::vector<double> idf;
  for (const auto& [term, score] : ranked) {
    vocab.push_back(term);
    idf.push_back(smoothed_idf(n, df[term]));
  }
  return TfidfModel(std::move(vocab), std::move(idf), top_k, n);
}

namespace {

void transform_into(const TfidfModel& model, const TokenList& doc, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (doc.empty()) return;
  for (const auto& t : doc) {
    const long idx = model.index_of(t);
    if (idx >= 0) out[static_cast<std::size_t>(idx)] += 1.0;
  }
  const double len = static_cast<double>(doc.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != 0.0) out[i] = (out[i] / len) * model.idf()[i];
  }
}

}  // namespace

std::vector<double> tfidf_transform(const TfidfModel& model, const TokenList& doc) {
  std::vector<double> out(model.width(), 0.0);
  transform_into(model, doc, out);
  return out;
}

Matrix tfidf_transform_batch(const TfidfModel& model, const std::vector<TokenList>& docs,
                             Execution exec) {
  Matrix out(docs.size(), model.width());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) transform_into(model, docs[i], out.row(i));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) transform_into(model, docs[i], out.row(i));
  }
  return out;
}

}  // namespace triage
