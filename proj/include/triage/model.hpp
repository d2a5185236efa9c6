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

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "triage/classifier.hpp"
#include "triage/dataset.hpp"
#include "triage/gbt.hpp"
#include "triage/mlp.hpp"
#include "triage/naive_bayes.hpp"
#include "triage/random_forest.hpp"
#include "triage/svm.hpp"

namespace triage {

using ModelParams = std::variant<NaiveBayesParams, RandomForestParams, SvmParams, MlpParams, GbtParams>;

ModelKind kind_of(const ModelParams& params);
ModelParams default_params(ModelKind kind);
// Overrides the seed of whichever parameter struct is held (NB has none).
void set_seed(ModelParams& params, std::uint64_t seed);

// Keys match the hyperparameter names used in configs and HPO trial logs,
// e.g. {"max_depth": 20, "max_features": "sqrt", ...}. Unknown keys raise
// ConfigError.
nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(ModelKind kind, const nlohmann::json& j);
// Throws ConfigError for out-of-range values.
void validate_params(const ModelParams& params);

std::unique_ptr<Classifier> fit_classifier(const Dataset& data, const ModelParams& params,
                                           Execution exec = Execution::parallel);

inline constexpr int kModelFormatVersion = 1;

struct ModelMetadata {
  std::string feature_spec_hash;
  std::string target;
  std::vector<std::string> class_names;
};

struct LoadedModel {
  std::unique_ptr<Classifier> model;
  ModelMetadata meta;
};

// JSON container {model_type, format_version, feature_spec_hash, target,
// class_names, payload}.
std::string save_model(const Classifier& model, const ModelMetadata& meta);

// Throws ModelFormatError on a truncated or malformed blob or an unknown
// version, and ModelTypeError when `expected` is given and differs.
LoadedModel load_model(const std::string& bytes, std::optional<ModelKind> expected = std::nullopt);

}  // namespace triage
