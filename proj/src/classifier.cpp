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

#include "triage/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triage/errors.hpp"

namespace triage {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::svm: return "svm";
    case ModelKind::mlp: return "mlp";
    case ModelKind::gbt: return "gbt";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "naive_bayes" || s == "nb") return ModelKind::naive_bayes;
  if (s == "random_forest" || s == "rf") return ModelKind::random_forest;
  if (s == "svm") return ModelKind::svm;
  if (s == "mlp") return ModelKind::mlp;
  if (s == "gbt" || s == "xgboost") return ModelKind::gbt;
  throw ConfigError("unknown classifier kind '" + s + "'");
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void normalize_distribution(std::span<double> p) {
  double sum = 0.0;
  for (double& v : p) {
    if (!(v > 0.0)) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0 || !std::isfinite(sum)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= sum;
}

int Classifier::predict(std::span<const double> x) const {
  const auto p = predict_proba(x);
  return static_cast<int>(argmax(p));
}

Matrix predict_proba_batch(const Classifier& model, const Matrix& X, Execution exec) {
  Matrix out(X.rows(), model.num_classes());
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
  auto one = [&](std::ptrdiff_t i) {
    const auto p = model.predict_proba(X.row(static_cast<std::size_t>(i)));
    std::copy(p.begin(), p.end(), out.row(static_cast<std::size_t>(i)).begin());
  };
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) one(i);
  }
  return out;
}

std::vector<int> predict_batch(const Classifier& model, const Matrix& X, Execution exec) {
  const Matrix p = predict_proba_batch(model, X, exec);
  std::vector<int> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = static_cast<int>(argmax(p.row(i)));
  return out;
}

}  // namespace triage
