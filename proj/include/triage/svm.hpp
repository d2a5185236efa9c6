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
#include <vector>

#include "triage/classifier.hpp"
#include "triage/dataset.hpp"

namespace triage {

struct SvmParams {
  double lambda = 1e-3;  // L2 strength of the primal objective
  int epochs = 40;
  int batch_size = 16;
  // Share of each class held out to fit the Platt sigmoids.
  double calibration_fraction = 0.2;
  std::uint64_t seed = 0;
  bool operator==(const SvmParams&) const = default;
};

// Platt sigmoid P(y = 1 | f) = 1 / (1 + exp(a * f + b)).
struct PlattScaling {
  double a = -1.0;
  double b = 0.0;
  double operator()(double f) const;
};

// Fits (a, b) by Newton's method with backtracking on the regularized
// targets of Platt's method. `labels` are 0/1.
PlattScaling fit_platt(const std::vector<double>& scores, const std::vector<int>& labels);

// Linear soft-margin SVM, one-vs-rest, trained by mini-batch subgradient
// descent (Pegasos step size) on the hinge loss with L2 penalty. Inputs are
// standardized with fit-time statistics; the intercept is an extra constant
// feature.
class LinearSvm final : public Classifier {
 public:
  static LinearSvm fit(const Dataset& data, const SvmParams& params = {});

  ModelKind kind() const override { return ModelKind::svm; }
  std::size_t num_classes() const override { return platt_.size(); }
  std::size_t num_features() const override { return mean_.size(); }
  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static LinearSvm from_json(const nlohmann::json& j);

  // Raw one-vs-rest margins.
  std::vector<double> decision_function(std::span<const double> x) const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
  Matrix weights_;  // classes x (features + 1); last column is the intercept
  std::vector<PlattScaling> platt_;
};

}  // namespace triage
