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
#include <string>
#include <vector>

#include "triage/classifier.hpp"
#include "triage/dataset.hpp"

namespace triage {

// auto and sqrt both mean sqrt(d); all disables feature subsampling.
enum class MaxFeatures { auto_, sqrt, log2, all };
enum class SplitCriterion { gini, entropy };

const char* to_string(MaxFeatures m);
MaxFeatures max_features_from_string(const std::string& s);
const char* to_string(SplitCriterion c);
SplitCriterion criterion_from_string(const std::string& s);

struct RandomForestParams {
  std::optional<int> max_depth;  // nullopt = unbounded
  MaxFeatures max_features = MaxFeatures::sqrt;
  int n_estimators = 100;
  SplitCriterion criterion = SplitCriterion::gini;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  // Number of candidate features per node for d input features.
  std::size_t features_per_split(std::size_t d) const;
  bool operator==(const RandomForestParams&) const = default;
};

// CART classification tree stored as flat node arrays. A node with
// feature == -1 is a leaf; otherwise rows with x[feature] <= threshold go
// left.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
  };

  // `weights` holds a non-negative multiplicity per row (bootstrap counts).
  static DecisionTree fit(const Dataset& data, const std::vector<double>& weights,
                          const RandomForestParams& params, std::uint64_t seed);

  std::span<const double> leaf_distribution(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t num_classes() const { return num_classes_; }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j, std::size_t num_classes);

 private:
  std::vector<Node> nodes_;
  std::vector<double> values_;  // num_classes per node; meaningful at leaves
  std::size_t num_classes_ = 0;

  friend class TreeBuilder;
};

class RandomForest final : public Classifier {
 public:
  static RandomForest fit(const Dataset& data, const RandomForestParams& params,
                          Execution exec = Execution::parallel);

  ModelKind kind() const override { return ModelKind::random_forest; }
  std::size_t num_classes() const override { return num_classes_; }
  std::size_t num_features() const override { return num_features_; }
  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const RandomForestParams& params() const { return params_; }

 private:
  RandomForestParams params_;
  std::vector<DecisionTree> trees_;
  std::size_t num_classes_ = 0;
  std::size_t num_features_ = 0;
};

}  // namespace triage
