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

#include "triage/model.hpp"

#include <set>

#include "triage/errors.hpp"

namespace triage {

ModelKind kind_of(const ModelParams& params) {
  switch (params.index()) {
    case 0: return ModelKind::naive_bayes;
    case 1: return ModelKind::random_forest;
    case 2: return ModelKind::svm;
    case 3: return ModelKind::mlp;
    default: return ModelKind::gbt;
  }
}

ModelParams default_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::naive_bayes: return NaiveBayesParams{};
    case ModelKind::random_forest: return RandomForestParams{};
    case ModelKind::svm: return SvmParams{};
    case ModelKind::mlp: return MlpParams{};
    case ModelKind::gbt: return GbtParams{};
  }
  return NaiveBayesParams{};
}

void set_seed(ModelParams& params, std::uint64_t seed) {
  std::visit(
      [seed](auto& p) {
        if constexpr (requires { p.seed; }) p.seed = seed;
      },
      params);
}

nlohmann::json params_to_json(const ModelParams& params) {
  struct Visitor {
    nlohmann::json operator()(const NaiveBayesParams& p) const { return {{"var_smoothing", p.var_smoothing}}; }
    nlohmann::json operator()(const RandomForestParams& p) const {
      return {{"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)},
              {"max_features", to_string(p.max_features)},
              {"n_estimators", p.n_estimators},
              {"criterion", to_string(p.criterion)},
              {"bootstrap", p.bootstrap},
              {"seed", p.seed}};
    }
    nlohmann::json operator()(const SvmParams& p) const {
      return {{"lambda", p.lambda},
              {"epochs", p.epochs},
              {"batch_size", p.batch_size},
              {"calibration_fraction", p.calibration_fraction},
              {"seed", p.seed}};
    }
    nlohmann::json operator()(const MlpParams& p) const {
      return {{"hidden_layer_sizes", p.hidden_layer_sizes},
              {"alpha", p.alpha},
              {"activation", to_string(p.activation)},
              {"solver", to_string(p.solver)},
              {"learning_rate_init", p.learning_rate_init},
              {"max_iter", p.max_iter},
              {"batch_size", p.batch_size},
              {"momentum", p.momentum},
              {"tol", p.tol},
              {"n_iter_no_change", p.n_iter_no_change},
              {"early_stopping", p.early_stopping},
              {"validation_fraction", p.validation_fraction},
              {"seed", p.seed}};
    }
    nlohmann::json operator()(const GbtParams& p) const {
      return {{"n_rounds", p.n_rounds}, {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth}, {"seed", p.seed}};
    }
  };
  return std::visit(Visitor{}, params);
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("hyperparameter '") + key + "' has the wrong type");
  }
}

}  // namespace

ModelParams params_from_json(ModelKind kind, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("hyperparameters must be a JSON object");
  std::set<std::string> seen;
  ModelParams out = default_params(kind);
  std::string s;
  switch (kind) {
    case ModelKind::naive_bayes: {
      auto& p = std::get<NaiveBayesParams>(out);
      read(j, "var_smoothing", p.var_smoothing, seen);
      break;
    }
    case ModelKind::random_forest: {
      auto& p = std::get<RandomForestParams>(out);
      if (j.contains("max_depth")) {
        seen.insert("max_depth");
        const auto& v = j.at("max_depth");
        if (v.is_null() || (v.is_string() && v.get<std::string>() == "None")) {
          p.max_depth.reset();
        } else if (v.is_number_integer()) {
          p.max_depth = v.get<int>();
        } else {
          throw ConfigError("hyperparameter 'max_depth' must be an integer or null");
        }
      }
      if (j.contains("max_features")) {
        read(j, "max_features", s, seen);
        p.max_features = max_features_from_string(s);
      }
      read(j, "n_estimators", p.n_estimators, seen);
      if (j.contains("criterion")) {
        read(j, "criterion", s, seen);
        p.criterion = criterion_from_string(s);
      }
      read(j, "bootstrap", p.bootstrap, seen);
      read(j, "seed", p.seed, seen);
      break;
    }
    case ModelKind::svm: {
      auto& p = std::get<SvmParams>(out);
      read(j, "lambda", p.lambda, seen);
      read(j, "epochs", p.epochs, seen);
      read(j, "batch_size", p.batch_size, seen);
      read(j, "calibration_fraction", p.calibration_fraction, seen);
      read(j, "seed", p.seed, seen);
      break;
    }
    case ModelKind::mlp: {
      auto& p = std::get<MlpParams>(out);
      read(j, "hidden_layer_sizes", p.hidden_layer_sizes, seen);
      read(j, "alpha", p.alpha, seen);
      if (j.contains("activation")) {
        read(j, "activation", s, seen);
        p.activation = activation_from_string(s);
      }
      if (j.contains("solver")) {
        read(j, "solver", s, seen);
        p.solver = solver_from_string(s);
      }
      read(j, "learning_rate_init", p.learning_rate_init, seen);
      read(j, "max_iter", p.max_iter, seen);
      read(j, "batch_size", p.batch_size, seen);
      read(j, "momentum", p.momentum, seen);
      read(j, "tol", p.tol, seen);
      read(j, "n_iter_no_change", p.n_iter_no_change, seen);
      read(j, "early_stopping", p.early_stopping, seen);
      read(j, "validation_fraction", p.validation_fraction, seen);
      read(j, "seed", p.seed, seen);
      break;
    }
    case ModelKind::gbt: {
      auto& p = std::get<GbtParams>(out);
      read(j, "n_rounds", p.n_rounds, seen);
      read(j, "learning_rate", p.learning_rate, seen);
      read(j, "max_depth", p.max_depth, seen);
      read(j, "seed", p.seed, seen);
      break;
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!seen.count(key)) {
      throw ConfigError("unknown hyperparameter '" + key + "' for " + to_string(kind));
    }
  }
  validate_params(out);
  return out;
}

void validate_params(const ModelParams& params) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("hyperparameter out of range: ") + what);
  };
  struct Visitor {
    decltype(require)& check;
    void operator()(const NaiveBayesParams& p) const { check(p.var_smoothing >= 0.0, "var_smoothing >= 0"); }
    void operator()(const RandomForestParams& p) const {
      check(p.n_estimators >= 1, "n_estimators >= 1");
      check(!p.max_depth || *p.max_depth >= 1, "max_depth >= 1");
    }
    void operator()(const SvmParams& p) const {
      check(p.lambda > 0.0, "lambda > 0");
      check(p.epochs >= 1, "epochs >= 1");
      check(p.batch_size >= 1, "batch_size >= 1");
      check(p.calibration_fraction > 0.0 && p.calibration_fraction < 1.0, "0 < calibration_fraction < 1");
    }
    void operator()(const MlpParams& p) const {
      check(p.hidden_layer_sizes >= 0, "hidden_layer_sizes >= 0");
      check(p.alpha >= 0.0, "alpha >= 0");
      check(p.learning_rate_init > 0.0, "learning_rate_init > 0");
      check(p.max_iter >= 1, "max_iter >= 1");
      check(p.batch_size >= 1, "batch_size >= 1");
      check(p.validation_fraction > 0.0 && p.validation_fraction < 1.0, "0 < validation_fraction < 1");
    }
    void operator()(const GbtParams& p) const {
      check(p.n_rounds >= 0, "n_rounds >= 0");
      check(p.learning_rate >= 0.0, "learning_rate >= 0");
      check(p.max_depth >= 1, "max_depth >= 1");
    }
  };
  std::visit(Visitor{require}, params);
}

std::unique_ptr<Classifier> fit_classifier(const Dataset& data, const ModelParams& params, Execution exec) {
  struct Visitor {
    const Dataset& data;
    Execution exec;
    std::unique_ptr<Classifier> operator()(const NaiveBayesParams& p) const {
      return std::make_unique<GaussianNaiveBayes>(GaussianNaiveBayes::fit(data, p));
    }
    std::unique_ptr<Classifier> operator()(const RandomForestParams& p) const {
      return std::make_unique<RandomForest>(RandomForest::fit(data, p, exec));
    }
    std::unique_ptr<Classifier> operator()(const SvmParams& p) const {
      return std::make_unique<LinearSvm>(LinearSvm::fit(data, p));
    }
    std::unique_ptr<Classifier> operator()(const MlpParams& p) const {
      return std::make_unique<Mlp>(Mlp::fit(data, p));
    }
    std::unique_ptr<Classifier> operator()(const GbtParams& p) const {
      return std::make_unique<GradientBoostedTrees>(GradientBoostedTrees::fit(data, p, exec));
    }
  };
  return std::visit(Visitor{data, exec}, params);
}

std::string save_model(const Classifier& model, const ModelMetadata& meta) {
  nlohmann::json j = {{"model_type", to_string(model.kind())},
                      {"format_version", kModelFormatVersion},
                      {"feature_spec_hash", meta.feature_spec_hash},
                      {"target", meta.target},
                      {"class_names", meta.class_names},
                      {"payload", model.to_json()}};
  return j.dump();
}

LoadedModel load_model(const std::string& bytes, std::optional<ModelKind> expected) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelFormatError(std::string("model blob is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("model_type") || !j.contains("format_version") || !j.contains("payload")) {
      throw ModelFormatError("model blob lacks the container header");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("unsupported model format_version " + std::to_string(version) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
    }
    ModelKind kind;
    try {
      kind = model_kind_from_string(j.at("model_type").get<std::string>());
    } catch (const ConfigError& e) {
      throw ModelFormatError(e.what());
    }
    if (expected && *expected != kind) {
      throw ModelTypeError(std::string("model blob holds a ") + to_string(kind) + " model, expected " +
                           to_string(*expected));
    }
    LoadedModel out;
    out.meta.feature_spec_hash = j.value("feature_spec_hash", "");
    out.meta.target = j.value("target", "");
    out.meta.class_names = j.value("class_names", std::vector<std::string>{});
    const auto& payload = j.at("payload");
    switch (kind) {
      case ModelKind::naive_bayes:
        out.model = std::make_unique<GaussianNaiveBayes>(GaussianNaiveBayes::from_json(payload));
        break;
      case ModelKind::random_forest:
        out.model = std::make_unique<RandomForest>(RandomForest::from_json(payload));
        break;
      case ModelKind::svm: out.model = std::make_unique<LinearSvm>(LinearSvm::from_json(payload)); break;
      case ModelKind::mlp: out.model = std::make_unique<Mlp>(Mlp::from_json(payload)); break;
      case ModelKind::gbt:
        out.model = std::make_unique<GradientBoostedTrees>(GradientBoostedTrees::from_json(payload));
        break;
    }
    if (!out.meta.class_names.empty() && out.meta.class_names.size() != out.model->num_classes()) {
      throw ModelFormatError("class_names do not match the model's class count");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model blob: ") + e.what());
  }
}

}  // namespace triage
