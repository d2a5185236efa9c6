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

#include "json.hpp"
#include "triage/active_learning.hpp"
#include "triage/corpus.hpp"
#include "triage/dataset.hpp"
#include "triage/eval.hpp"
#include "triage/features.hpp"
#include "triage/hpo.hpp"
#include "triage/labels.hpp"
#include "triage/model.hpp"

namespace triage {

// Declarative run configuration. Relative paths resolve against the
// directory of the config file.
struct PipelineConfig {
  std::string schema_path;
  std::string corpus_path;
  std::string labels_path;
  FeatureOptions features;
  ModelParams model = RandomForestParams{};
  std::optional<std::string> preset;
  std::uint64_t seed = 0;

  Strategy strategy = Strategy::entropy;
  std::size_t initial_pool = 39;
  std::size_t steps = 50;
  int retrain_every = 1;

  std::size_t folds = 5;
  TpeConfig tpe;

  static PipelineConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
  static PipelineConfig load(const std::string& path);
  // Preset when named, else the explicit model params, with the run seed.
  ModelParams resolved_model() const;
};

Schema load_schema(const std::string& path);
// Ingests and fails with SchemaError when any record is rejected.
Corpus load_corpus_strict(const std::string& path, const Schema& schema);

struct RowKey {
  std::string base_id;
  std::size_t prefix_len = 0;
  bool test = false;
};

// Derived tickets of a corpus, split every-10th by base id, with the feature
// spec fitted on the training side only.
struct FeaturizedData {
  FeatureSpec spec;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<RowKey> rows;
  Matrix X;
};

FeaturizedData featurize(const Corpus& corpus, const Schema& schema, const FeatureOptions& options);
// Writes feature_spec.json, split.json and features.jsonl.
void write_featurized(const FeaturizedData& data, const std::string& dir);
FeaturizedData read_featurized(const std::string& dir);

// Labels aligned with FeaturizedData::rows. Quantile boundaries are fitted on
// the training rows' fixing times.
struct LabelTable {
  FixingTimeBinning binning;
  std::vector<LabelSet> rows;
};

LabelTable extract_labels(const Corpus& corpus, const ExpertLabels& expert, const FeaturizedData& data);
// Writes binning.json and labels.jsonl.
void write_labels(const LabelTable& labels, const FeaturizedData& data, const std::string& dir);
LabelTable read_labels(const std::string& dir, const FeaturizedData& data);

// Rows of one side that carry a label for the target.
Dataset make_dataset(const FeaturizedData& data, const LabelTable& labels, Target target, bool test_side);

// Weighted f1 on the test side plus the random-guesser baseline over the
// classes seen in training.
struct TargetEvaluation {
  EvalReport report;
  EvalReport baseline;
};
TargetEvaluation evaluate_model(const Classifier& model, const FeaturizedData& data, const LabelTable& labels,
                                Target target, const std::string& model_id);

// Session over the training-side tickets of the configured corpus. A seeded
// subset of at most initial_pool labeled tickets starts labeled; test-side
// tickets with all expert labels form the evaluation set.
ALSession create_session(const PipelineConfig& config);

}  // namespace triage
