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

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::uint64_t seed = 0;  // unused by the exact split search; kept for interface symmetry
  bool operator==(const GbtParams&) const = default;
};

// Least-squares regression tree. Rows with x[feature] <= threshold go left.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j);

 private:
  std::vector<Node> nodes_;
  friend class RegressionTreeBuilder;
};

// Multiclass gradient boosting with the softmax deviance: each round fits
// one regression tree per class to the residual y_k - p_k and sets leaf
// values by a single Newton step. Scores start at the log class priors.
class GradientBoostedTrees final : public Classifier {
 public:
  static GradientBoostedTrees fit(const Dataset& data, const GbtParams& params = {},
                                  Execution exec = Execution::parallel);

  ModelKind kind() const override { return ModelKind::gbt; }
  std::size_t num_classes() const override { return init_.size(); }
  std::size_t num_features() const override { return num_features_; }
  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static GradientBoostedTrees from_json(const nlohmann::json& j);

  std::vector<double> raw_scores(std::span<const double> x) const;
  // trees()[round][class]
  const std::vector<std::vector<RegressionTree>>& trees() const { return trees_; }
  const std::vector<double>& initial_scores() const { return init_; }
  double learning_rate() const { return learning_rate_; }

 private:
  std::vector<double> init_;
  std::vector<std::vector<RegressionTree>> trees_;
  double learning_rate_ = 0.1;
  std::size_t num_features_ = 0;
};

// Mean negative log-likelihood of the labels under the model.
double log_loss(const Classifier& model, const Dataset& data);

}  // namespace triage
