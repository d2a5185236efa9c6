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

#include <vector>

#include "triage/classifier.hpp"
#include "triage/dataset.hpp"

namespace triage {

struct NaiveBayesParams {
  // Added to every per-class variance: var_smoothing * (largest feature
  // variance over the whole training set), or var_smoothing itself when all
  // features are constant.
  double var_smoothing = 1e-9;
  bool operator==(const NaiveBayesParams&) const = default;
};

// Gaussian naive Bayes over dense features; posteriors computed in log space.
class GaussianNaiveBayes final : public Classifier {
 public:
  static GaussianNaiveBayes fit(const Dataset& data, const NaiveBayesParams& params = {});

  ModelKind kind() const override { return ModelKind::naive_bayes; }
  std::size_t num_classes() const override { return log_prior_.size(); }
  std::size_t num_features() const override { return mean_.cols(); }
  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static GaussianNaiveBayes from_json(const nlohmann::json& j);

  const Matrix& means() const { return mean_; }
  const Matrix& variances() const { return var_; }
  const std::vector<double>& log_priors() const { return log_prior_; }

 private:
  Matrix mean_;  // classes x features
  Matrix var_;
  // -infinity for classes without training rows; serialized as null.
  std::vector<double> log_prior_;
};

}  // namespace triage
