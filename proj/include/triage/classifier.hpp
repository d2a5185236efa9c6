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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "triage/matrix.hpp"
#include "triage/parallel.hpp"

namespace triage {

enum class ModelKind { naive_bayes, random_forest, svm, mlp, gbt };

const char* to_string(ModelKind kind);
// Accepts the canonical names plus the short forms nb, rf, xgboost.
ModelKind model_kind_from_string(const std::string& s);

// Common probabilistic interface. Trained models are immutable; concurrent
// predict calls are safe.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t num_features() const = 0;
  // Non-negative, sums to 1 within 1e-9.
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
  // Model payload without the container header.
  virtual nlohmann::json to_json() const = 0;

  // Arg-max class; ties go to the lowest index.
  int predict(std::span<const double> x) const;
};

Matrix predict_proba_batch(const Classifier& model, const Matrix& X,
                           Execution exec = Execution::parallel);
std::vector<int> predict_batch(const Classifier& model, const Matrix& X,
                               Execution exec = Execution::parallel);

// Index of the largest entry, first one on ties.
std::size_t argmax(std::span<const double> values);

// Rescales in place so the entries sum to 1; a zero vector becomes uniform.
void normalize_distribution(std::span<double> p);

}  // namespace triage
