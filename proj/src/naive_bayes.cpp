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

#include "triage/naive_bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "triage/errors.hpp"

namespace triage {

GaussianNaiveBayes GaussianNaiveBayes::fit(const Dataset& data, const NaiveBayesParams& params) {
  data.validate();
  if (data.size() == 0) throw std::invalid_argument("naive bayes: empty dataset");
  const std::size_t k = data.num_classes();
  const std::size_t d = data.num_features();
  const auto counts = data.class_counts();

  GaussianNaiveBayes nb;
  nb.mean_ = Matrix(k, d, 0.0);
  nb.var_ = Matrix(k, d, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    const auto x = data.X.row(i);
    for (std::size_t f = 0; f < d; ++f) nb.mean_(c, f) += x[f];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t f = 0; f < d; ++f) nb.mean_(c, f) /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.y[i]);
    const auto x = data.X.row(i);
    for (std::size_t f = 0; f < d; ++f) {
      const double diff = x[f] - nb.mean_(c, f);
      nb.var_(c, f) += diff * diff;
    }
  }

  // Global per-feature variance for the smoothing floor.
  double max_var = 0.0;
  for (std::size_t f = 0; f < d; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) mean += data.X(i, f);
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) var += (data.X(i, f) - mean) * (data.X(i, f) - mean);
    max_var = std::max(max_var, var / static_cast<double>(data.size()));
  }
  const double epsilon = params.var_smoothing * (max_var > 0.0 ? max_var : 1.0);

  nb.log_prior_.assign(k, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      nb.var_(c, f) = (counts[c] > 0 ? nb.var_(c, f) / static_cast<double>(counts[c]) : 0.0) + epsilon;
    }
    if (counts[c] > 0) {
      nb.log_prior_[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(data.size()));
    }
  }
  return nb;
}

std::vector<double> GaussianNaiveBayes::predict_proba(std::span<const double> x) const {
  const std::size_t k = num_classes();
  const std::size_t d = num_features();
  std::vector<double> logp(k);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    double lp = log_prior_[c];
    if (std::isfinite(lp)) {
      for (std::size_t f = 0; f < d; ++f) {
        const double var = var_(c, f);
        const double diff = x[f] - mean_(c, f);
        lp -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
      }
    }
    logp[c] = lp;
    best = std::max(best, lp);
  }
  std::vector<double> p(k, 0.0);
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    p[c] = std::isfinite(logp[c]) ? std::exp(logp[c] - best) : 0.0;
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

nlohmann::json GaussianNaiveBayes::to_json() const {
  nlohmann::json priors = nlohmann::json::array();
  for (double lp : log_prior_) priors.push_back(std::isfinite(lp) ? nlohmann::json(lp) : nlohmann::json(nullptr));
  return {{"classes", num_classes()},
          {"features", num_features()},
          {"mean", mean_.data()},
          {"var", var_.data()},
          {"log_prior", priors}};
}

GaussianNaiveBayes GaussianNaiveBayes::from_json(const nlohmann::json& j) {
  GaussianNaiveBayes nb;
  const auto k = j.at("classes").get<std::size_t>();
  const auto d = j.at("features").get<std::size_t>();
  nb.mean_ = Matrix(k, d);
  nb.var_ = Matrix(k, d);
  nb.mean_.data() = j.at("mean").get<std::vector<double>>();
  nb.var_.data() = j.at("var").get<std::vector<double>>();
  if (nb.mean_.data().size() != k * d || nb.var_.data().size() != k * d) {
    throw ModelFormatError("naive bayes: parameter shape mismatch");
  }
  for (const auto& v : j.at("log_prior")) {
    nb.log_prior_.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
  }
  if (nb.log_prior_.size() != k) throw ModelFormatError("naive bayes: prior count mismatch");
  return nb;
}

}  // namespace triage
