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
#include <string>
#include <vector>

#include "triage/classifier.hpp"
#include "triage/dataset.hpp"

namespace triage {

enum class Activation { relu, logistic, tanh };
enum class Solver { lbfgs, sgd, adam };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);
const char* to_string(Solver s);
Solver solver_from_string(const std::string& s);

struct MlpParams {
  int hidden_layer_sizes = 100;  // 0 = no hidden layer (softmax regression)
  double alpha = 1e-4;
  Activation activation = Activation::relu;
  Solver solver = Solver::adam;
  double learning_rate_init = 1e-3;
  int max_iter = 200;
  int batch_size = 200;
  double momentum = 0.9;
  double tol = 1e-4;
  int n_iter_no_change = 10;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  bool operator==(const MlpParams&) const = default;
};

// Network layout. Parameters are packed as W1 (d x h, row-major), b1 (h),
// W2 (h x k), b2 (k); with h == 0 only W (d x k) and b (k).
struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t outputs = 0;
  Activation activation = Activation::relu;

  std::size_t num_parameters() const;
};

// Mean cross-entropy of the softmax outputs plus alpha / (2n) times the
// squared norm of the weight matrices (biases are not penalized). Writes the
// gradient with respect to `theta` into `grad` when it is non-null.
double mlp_loss_and_gradient(const MlpShape& shape, std::span<const double> theta, const Matrix& X,
                             std::span<const int> y, double alpha, std::vector<double>* grad);

class Mlp final : public Classifier {
 public:
  static Mlp fit(const Dataset& data, const MlpParams& params = {});

  ModelKind kind() const override { return ModelKind::mlp; }
  std::size_t num_classes() const override { return shape_.outputs; }
  std::size_t num_features() const override { return shape_.inputs; }
  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static Mlp from_json(const nlohmann::json& j);

  // False when the optimizer hit max_iter before its stopping rule fired.
  // The returned weights are still the best seen.
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  const MlpShape& shape() const { return shape_; }

 private:
  MlpShape shape_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> theta_;
  bool converged_ = true;
  int iterations_ = 0;
};

}  // namespace triage
