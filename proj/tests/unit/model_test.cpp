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

#include <gtest/gtest.h>

#include "triage/errors.hpp"
#include "triage/model.hpp"
#include "triage/naive_bayes.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

using nlohmann::json;

TEST(ModelParams, JsonRoundTripForEveryKind) {
  for (auto kind : {ModelKind::naive_bayes, ModelKind::random_forest, ModelKind::svm, ModelKind::mlp,
                    ModelKind::gbt}) {
    auto p = default_params(kind);
    set_seed(p, 99);
    EXPECT_EQ(kind_of(p), kind);
    EXPECT_EQ(params_from_json(kind, params_to_json(p)), p) << to_string(kind);
  }
}

TEST(ModelParams, RandomForestDepthAcceptsNoneNullAndIntegers) {
  const auto a = std::get<RandomForestParams>(params_from_json(ModelKind::random_forest, {{"max_depth", "None"}}));
  const auto b = std::get<RandomForestParams>(params_from_json(ModelKind::random_forest, {{"max_depth", nullptr}}));
  const auto c = std::get<RandomForestParams>(params_from_json(ModelKind::random_forest, {{"max_depth", 20}}));
  EXPECT_FALSE(a.max_depth.has_value());
  EXPECT_FALSE(b.max_depth.has_value());
  EXPECT_EQ(c.max_depth, 20);
}

TEST(ModelParams, UnknownKeysAndBadValuesAreConfigErrors) {
  EXPECT_THROW(params_from_json(ModelKind::svm, {{"gamma", 1}}), ConfigError);
  EXPECT_THROW(params_from_json(ModelKind::mlp, {{"activation", "softsign"}}), ConfigError);
  EXPECT_THROW(model_kind_from_string("knn"), ConfigError);
}

TEST(ModelContainer, RejectsCorruptBlobsAndWrongTypes) {
  const Dataset ds = testing::two_gaussians(10, 2, 1.0, 1);
  const auto nb = GaussianNaiveBayes::fit(ds);
  const std::string blob = save_model(nb, {"h", "risk", {"a", "b"}});
  EXPECT_NO_THROW(load_model(blob));
  EXPECT_THROW(load_model(blob.substr(0, blob.size() / 2)), ModelFormatError);
  EXPECT_THROW(load_model("not a model"), ModelFormatError);
  EXPECT_THROW(load_model(blob, ModelKind::random_forest), ModelTypeError);

  json j = json::parse(blob);
  j["format_version"] = kModelFormatVersion + 1;
  EXPECT_THROW(load_model(j.dump()), ModelFormatError);
  j = json::parse(blob);
  j["class_names"] = {"only_one"};
  EXPECT_THROW(load_model(j.dump()), ModelFormatError);
  j = json::parse(blob);
  j.erase("payload");
  EXPECT_THROW(load_model(j.dump()), ModelFormatError);
}

TEST(ModelContainer, HeaderFieldsAreRecorded) {
  const Dataset ds = testing::two_gaussians(10, 2, 1.0, 1);
  const auto blob = save_model(GaussianNaiveBayes::fit(ds), {"abc", "debug", {"a", "b"}});
  const json j = json::parse(blob);
  EXPECT_EQ(j.at("model_type"), "naive_bayes");
  EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
  EXPECT_EQ(j.at("feature_spec_hash"), "abc");
  EXPECT_EQ(j.at("target"), "debug");
}

}  // namespace
}  // namespace triage
