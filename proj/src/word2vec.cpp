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

#include "triage/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

const char* to_string(Word2VecVariant v) { return v == Word2VecVariant::cbow ? "cbow" : "skipgram"; }

Word2VecVariant word2vec_variant_from_string(const std::string& s) {
  if (s == "cbow") return Word2VecVariant::cbow;
  if (s == "skipgram" || s == "skip-gram") return Word2VecVariant::skipgram;
  throw ConfigError("unknown word2vec variant '" + s + "'");
}

WordEmbeddingModel::WordEmbeddingModel(Word2VecParams params, std::vector<std::string> vocab,
                                       Matrix vectors)
    : params_(params), vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vocab_.size() != vectors_.rows()) throw std::invalid_argument("word2vec: vocab/vector count mismatch");
  params_.dim = vectors_.cols();
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
}

std::span<const double> WordEmbeddingModel::vector_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return {};
  return vectors_.row(it->second);
}

nlohmann::json WordEmbeddingModel::to_json() const {
  return {{"format", "word2vec"},
          {"format_version", kFormatVersion},
          {"variant", to_string(params_.variant)},
          {"dim", dim()},
          {"window", params_.window},
          {"negative", params_.negative},
          {"epochs", params_.epochs},
          {"seed", params_.seed},
          {"learning_rate", params_.learning_rate},
          {"vocabulary", vocab_},
          {"vectors", vectors_.data()}};
}

WordEmbeddingModel WordEmbeddingModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "word2vec") throw ModelFormatError("not a word2vec model");
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ModelFormatError("unsupported word2vec format_version");
    }
    Word2VecParams p;
    p.variant = word2vec_variant_from_string(j.at("variant").get<std::string>());
    p.dim = j.at("dim").get<std::size_t>();
    p.window = j.at("window").get<std::size_t>();
    p.negative = j.at("negative").get<std::size_t>();
    p.epochs = j.at("epochs").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.learning_rate = j.at("learning_rate").get<double>();
    auto vocab = j.at("vocabulary").get<std::vector<std::string>>();
    auto flat = j.at("vectors").get<std::vector<double>>();
    if (flat.size() != vocab.size() * p.dim) throw ModelFormatError("word2vec: ragged vectors");
    Matrix m(vocab.size(), p.dim);
    m.data() = std::move(flat);
    return WordEmbeddingModel(p, std::move(vocab), std::move(m));
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("word2vec model: ") + e.what());
  }
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double sigmoid(double x) {
  if (x > 6.0) return 1.0;
  if (x < -6.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

class Trainer {
 public:
  Trainer(const Word2VecParams& p, std::size_t vocab_size, std::vector<double> unigram_cdf,
          std::uint64_t total_steps)
      : p_(p),
        syn0_(vocab_size, p.dim),
        syn1_(vocab_size, p.dim, 0.0),
        cdf_(std::move(unigram_cdf)),
        rng_(p.seed),
        total_steps_(std::max<std::uint64_t>(total_steps, 1)) {
    start_alpha_ = p.learning_rate > 0.0 ? p.learning_rate
                                         : (p.variant == Word2VecVariant::cbow ? 0.05 : 0.025);
    for (double& v : syn0_.data()) v = (uniform01(rng_) - 0.5) / static_cast<double>(p.dim);
  }

  void train_sentence(const std::vector<std::size_t>& sent) {
    std::vector<double> h(p_.dim), grad(p_.dim);
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const double alpha = std::max(start_alpha_ * 1e-4,
                                    start_alpha_ * (1.0 - static_cast<double>(step_) /
                                                              static_cast<double>(total_steps_)));
      ++step_;
      const std::size_t reduce = static_cast<std::size_t>(rng_() % p_.window);
      const std::size_t span = p_.window - reduce;
      const std::size_t lo = i >= span ? i - span : 0;
      const std::size_t hi = std::min(sent.size() - 1, i + span);
      if (p_.variant == Word2VecVariant::cbow) {
        std::fill(h.begin(), h.end(), 0.0);
        std::size_t ctx = 0;
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const auto v = syn0_.row(sent[j]);
          for (std::size_t d = 0; d < p_.dim; ++d) h[d] += v[d];
          ++ctx;
        }
        if (ctx == 0) continue;
        for (double& x : h) x /= static_cast<double>(ctx);
        std::fill(grad.begin(), grad.end(), 0.0);
        update(sent[i], h, grad, alpha);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          auto v = syn0_.row(sent[j]);
          for (std::size_t d = 0; d < p_.dim; ++d) v[d] += grad[d];
        }
      } else {
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          auto in = syn0_.row(sent[i]);
          std::copy(in.begin(), in.end(), h.begin());
          std::fill(grad.begin(), grad.end(), 0.0);
          update(sent[j], h, grad, alpha);
          for (std::size_t d = 0; d < p_.dim; ++d) in[d] += grad[d];
        }
      }
    }
  }

  Matrix take_vectors() && { return std::move(syn0_); }

 private:
  // One positive and `negative` noise targets against hidden vector h;
  // accumulates the input-side gradient into grad.
  void update(std::size_t target, const std::vector<double>& h, std::vector<double>& grad,
              double alpha) {
    for (std::size_t s = 0; s <= p_.negative; ++s) {
      std::size_t word;
      double label;
      if (s == 0) {
        word = target;
        label = 1.0;
      } else {
        word = sample_noise();
        if (word == target) continue;
        label = 0.0;
      }
      auto out = syn1_.row(word);
      double f = 0.0;
      for (std::size_t d = 0; d < p_.dim; ++d) f += h[d] * out[d];
      const double g = (label - sigmoid(f)) * alpha;
      for (std::size_t d = 0; d < p_.dim; ++d) grad[d] += g * out[d];
      for (std::size_t d = 0; d < p_.dim; ++d) out[d] += g * h[d];
    }
  }

  std::size_t sample_noise() {
    const double u = uniform01(rng_);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

  const Word2VecParams& p_;
  Matrix syn0_;
  Matrix syn1_;
  std::vector<double> cdf_;
  std::mt19937_64 rng_;
  std::uint64_t total_steps_;
  std::uint64_t step_ = 0;
  double start_alpha_ = 0.025;
};

}  // namespace

WordEmbeddingModel word2vec_train(const std::vector<TokenList>& docs, const Word2VecParams& params) {
  if (params.dim == 0 || params.window == 0) throw std::invalid_argument("word2vec: dim and window must be > 0");
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total_tokens = 0;
  for (const auto& d : docs) {
    for (const auto& t : d) {
      ++counts[t];
      ++total_tokens;
    }
  }
  if (counts.empty()) throw std::invalid_argument("word2vec: empty training corpus");

  // Vocabulary order: frequency descending, then lexicographic.
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> cdf;
  double z = 0.0;
  for (const auto& [term, c] : ranked) z += std::pow(static_cast<double>(c), 0.75);
  double acc = 0.0;
  for (const auto& [term, c] : ranked) {
    index.emplace(term, vocab.size());
    vocab.push_back(term);
    acc += std::pow(static_cast<double>(c), 0.75) / z;
    cdf.push_back(acc);
  }
  cdf.back() = 1.0;

  std::vector<std::vector<std::size_t>> sentences;
  sentences.reserve(docs.size());
  for (const auto& d : docs) {
    if (d.empty()) continue;
    std::vector<std::size_t> s;
    s.reserve(d.size());
    for (const auto& t : d) s.push_back(index.at(t));
    sentences.push_back(std::move(s));
  }

  Trainer trainer(params, vocab.size(), std::move(cdf), total_tokens * params.epochs);
  for (std::size_t e = 0; e < params.epochs; ++e) {
    for (const auto& s : sentences) trainer.train_sentence(s);
  }
  return WordEmbeddingModel(params, std::move(vocab), std::move(trainer).take_vectors());
}

std::vector<double> embed_average(const WordEmbeddingModel& model, const TokenList& tokens) {
  std::vector<double> out(model.dim(), 0.0);
  // Summing in vocabulary order keeps the result bit-identical under any
  // permutation of the token list.
  std::vector<std::span<const double>> hits;
  std::vector<const std::string*> terms;
  for (const auto& t : tokens) {
    if (!model.vector_of(t).empty()) terms.push_back(&t);
  }
  std::sort(terms.begin(), terms.end(), [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* t : terms) hits.push_back(model.vector_of(*t));
  for (const auto& v : hits) {
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += v[d];
  }
  if (!hits.empty()) {
    for (double& x : out) x /= static_cast<double>(hits.size());
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace triage
