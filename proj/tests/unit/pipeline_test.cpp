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

#include <fstream>
#include <set>

#include "triage/errors.hpp"
#include "triage/pipeline.hpp"
#include "triage/synth.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

struct PipelineFixture : ::testing::Test {
  testing::TempDir dir;
  SynthCorpus synth = [] {
    SynthOptions o;
    o.n_tickets = 60;
    o.seed = 21;
    o.max_events = 6;
    return generate_synthetic(o);
  }();

  void SetUp() override { write_synthetic(synth, dir.str()); }

  nlohmann::json base_config() const {
    return {{"schema", "schema.json"},
            {"corpus", "corpus.jsonl"},
            {"labels", "labels.jsonl"},
            {"features", {{"text_mode", "tfidf"}, {"tfidf_top_k", 30}}},
            {"model", "rf"},
            {"params", {{"n_estimators", 10}}},
            {"seed", 5},
            {"al", {{"initial_pool", 12}}}};
  }

  PipelineConfig config() const {
    std::ofstream(dir.path() / "config.json") << base_config().dump();
    return PipelineConfig::load(dir.str("config.json"));
  }
};

TEST_F(PipelineFixture, ConfigResolvesPathsAgainstItsDirectory) {
  const auto c = config();
  EXPECT_EQ(c.schema_path, dir.str("schema.json"));
  EXPECT_EQ(c.corpus_path, dir.str("corpus.jsonl"));
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.initial_pool, 12u);
  EXPECT_EQ(c.features.text_mode, TextMode::tfidf);
  EXPECT_EQ(c.tpe.seed, 5u);
  const auto& rf = std::get<RandomForestParams>(c.resolved_model());
  EXPECT_EQ(rf.n_estimators, 10);
  EXPECT_EQ(rf.seed, 5u);
}

TEST_F(PipelineFixture, ConfigErrors) {
  auto j = base_config();
  j["bogus"] = 1;
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  j = base_config();
  j["model"] = "knn";
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  j = base_config();
  j["preset"] = "paper-rf-nothing";
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  j = base_config();
  j["params"] = {{"n_estimators", -3}};
  EXPECT_THROW(PipelineConfig::from_json(j), ConfigError);
  EXPECT_THROW(PipelineConfig::load(dir.str("missing.json")), ConfigError);
}

TEST_F(PipelineFixture, PresetOverridesModel) {
  auto j = base_config();
  j["preset"] = "paper-rf-debug";
  const auto c = PipelineConfig::from_json(j, dir.str());
  const auto& rf = std::get<RandomForestParams>(c.resolved_model());
  EXPECT_EQ(rf.n_estimators, 297);
  EXPECT_EQ(rf.max_depth, 10);
}

TEST_F(PipelineFixture, StrictCorpusLoadNamesTheFirstRejectedLine) {
  const auto schema = load_schema(dir.str("schema.json"));
  EXPECT_EQ(load_corpus_strict(dir.str("corpus.jsonl"), schema).size(), 60u);
  {
    std::ofstream(dir.path() / "corpus.jsonl", std::ios::app) << "{\"id\": 3}\n";
  }
  try {
    load_corpus_strict(dir.str("corpus.jsonl"), schema);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("61"), std::string::npos) << e.what();
  }
}

TEST_F(PipelineFixture, FeaturizeSplitsByBaseIdAndRoundTrips) {
  const auto c = config();
  const auto schema = load_schema(c.schema_path);
  const auto corpus = load_corpus_strict(c.corpus_path, schema);
  const auto data = featurize(corpus, schema, c.features);
  EXPECT_EQ(data.test_ids.size(), 6u);
  EXPECT_EQ(data.train_ids.size(), 54u);
  EXPECT_EQ(data.rows.size(), data.X.rows());
  EXPECT_EQ(data.X.cols(), data.spec.output_dim());
  std::size_t events = 0;
  for (const auto& t : corpus.tickets()) events += t.events.size();
  EXPECT_EQ(data.rows.size(), events);
  const std::set<std::string> test(data.test_ids.begin(), data.test_ids.end());
  bool seen_test = false;
  for (const auto& r : data.rows) {
    EXPECT_EQ(r.test, test.count(r.base_id) == 1);
    if (r.test) seen_test = true;
    EXPECT_FALSE(seen_test && !r.test) << "training rows come first";
  }

  write_featurized(data, dir.str("out"));
  const auto back = read_featurized(dir.str("out"));
  EXPECT_EQ(back.X, data.X);
  EXPECT_EQ(back.spec.hash(), data.spec.hash());
  EXPECT_EQ(back.train_ids, data.train_ids);
  ASSERT_EQ(back.rows.size(), data.rows.size());
  EXPECT_EQ(back.rows[7].base_id, data.rows[7].base_id);
  EXPECT_EQ(back.rows[7].prefix_len, data.rows[7].prefix_len);
}

TEST_F(PipelineFixture, LabelsAlignWithRowsAndRoundTrip) {
  const auto c = config();
  const auto schema = load_schema(c.schema_path);
  const auto corpus = load_corpus_strict(c.corpus_path, schema);
  const auto data = featurize(corpus, schema, c.features);
  const auto expert = attach_expert_labels_file(corpus, c.labels_path);
  const auto labels = extract_labels(corpus, expert, data);
  ASSERT_EQ(labels.rows.size(), data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    EXPECT_TRUE(labels.rows[i].fixing_time_class.has_value());
    const auto it = expert.find(data.rows[i].base_id);
    if (it != expert.end()) {
      EXPECT_EQ(labels.rows[i].risk, it->second.risk);
    }
  }
  write_labels(labels, data, dir.str("out"));
  const auto back = read_labels(dir.str("out"), data);
  EXPECT_EQ(back.rows, labels.rows);
  EXPECT_EQ(back.binning.boundaries, labels.binning.boundaries);

  const auto train = make_dataset(data, labels, Target::time_to_fix, false);
  const auto test = make_dataset(data, labels, Target::time_to_fix, true);
  EXPECT_EQ(train.size() + test.size(), data.rows.size());
  EXPECT_EQ(train.num_classes(), 5u);
  EXPECT_EQ(train.num_features(), data.X.cols());
}

TEST_F(PipelineFixture, EvaluationRejectsWidthMismatch) {
  const auto c = config();
  const auto schema = load_schema(c.schema_path);
  const auto corpus = load_corpus_strict(c.corpus_path, schema);
  const auto data = featurize(corpus, schema, c.features);
  const auto labels = extract_labels(corpus, attach_expert_labels_file(corpus, c.labels_path), data);
  const auto train = make_dataset(data, labels, Target::risk, false);
  const auto model = fit_classifier(train, c.resolved_model());
  const auto ev = evaluate_model(*model, data, labels, Target::risk, "m");
  EXPECT_GE(ev.report.weighted_f1, 0.0);
  EXPECT_LE(ev.report.weighted_f1, 1.0);
  EXPECT_GT(ev.baseline.weighted_f1, 0.0);

  Dataset narrow = train;
  narrow.X = Matrix(train.size(), 2, 0.0);
  const auto bad = fit_classifier(narrow, NaiveBayesParams{});
  EXPECT_THROW(evaluate_model(*bad, data, labels, Target::risk, "m"), ModelFormatError);
}

TEST_F(PipelineFixture, SessionUsesTrainingSideAndSeededInitialSet) {
  const auto c = config();
  const auto a = create_session(c);
  const auto b = create_session(c);
  EXPECT_EQ(a.pool().size(), 54u);
  EXPECT_EQ(a.labeled_ids().size(), 12u);
  EXPECT_EQ(a.labeled_ids(), b.labeled_ids());
  for (const auto& id : a.labeled_ids()) EXPECT_NE(std::stoi(id) % 10, 0);
}

}  // namespace
}  // namespace triage
