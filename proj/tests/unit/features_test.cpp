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

#include <algorithm>

#include "triage/errors.hpp"
#include "triage/features.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

std::vector<DerivedTicket> derived_of(const std::vector<BaseTicket>& tickets) {
  std::vector<DerivedTicket> out;
  for (const auto& t : tickets) {
    for (auto& d : expand_ticket(t)) out.push_back(std::move(d));
  }
  return out;
}

TEST(CategoricalEncoder, OneHotWithUnseenSlotAndZeroForMissing) {
  const auto enc = CategoricalEncoder::fit("component", {"io", "cpu", "io", "mem"});
  EXPECT_EQ(enc.levels(), (std::vector<std::string>{"cpu", "io", "mem"}));
  EXPECT_EQ(enc.encode(std::string("io")), (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(enc.encode(std::string("gpu")), (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(enc.encode(std::nullopt), (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(CategoricalEncoder::from_json(enc.to_json()), enc);
}

TEST(CategoricalEncoder, ManyLevelsNeedAMapping) {
  std::vector<std::string> values;
  for (int i = 0; i < 10; ++i) values.push_back("v" + std::to_string(i));
  EXPECT_THROW(CategoricalEncoder::fit("f", values), SchemaError);
  CategoryMapping mapping;
  for (int i = 0; i < 10; ++i) mapping["v" + std::to_string(i)] = i < 5 ? "low" : "high";
  const auto enc = CategoricalEncoder::fit("f", values, &mapping);
  EXPECT_EQ(enc.levels(), (std::vector<std::string>{"high", "low"}));
  EXPECT_EQ(enc.encode(std::string("v7")), (std::vector<double>{1, 0, 0}));
}

TEST(Pruning, DropsMostlyMissingFieldsUnlessForced) {
  std::vector<BaseTicket> tickets;
  for (int i = 0; i < 10; ++i) {
    auto t = testing::make_ticket(std::to_string(i), 1);
    if (i > 0) t.static_fields.erase("effort");
    tickets.push_back(t);
  }
  const auto r = prune_fields(tickets, testing::basic_schema(), 0.8);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0].first, "effort");
  EXPECT_NEAR(r.dropped[0].second, 0.9, 1e-12);
  const auto forced = prune_fields(tickets, testing::basic_schema(), 0.8, {"effort"});
  EXPECT_TRUE(forced.dropped.empty());
  EXPECT_THROW(prune_fields({}, testing::basic_schema()), DataError);
}

TEST(TicketHelpers, TemporalStatsAndEffectiveFields) {
  auto base = testing::make_ticket("1", 3);
  base.events[2].timestamp += 1800;
  base.events[1].field_changes["priority"] = {"p2", "p0"};
  const auto derived = expand_ticket(base);
  EXPECT_EQ(temporal_stats(derived[0]), TemporalStats{});
  const auto s = temporal_stats(derived[2]);
  EXPECT_EQ(s.min, 3600.0);
  EXPECT_EQ(s.max, 5400.0);
  EXPECT_EQ(s.mean, 4500.0);
  const Schema schema = testing::basic_schema();
  EXPECT_EQ(std::get<Categorical>(effective_fields(derived[0], schema).at("priority")).value, "p2");
  EXPECT_EQ(std::get<Categorical>(effective_fields(derived[1], schema).at("priority")).value, "p0");
  EXPECT_EQ(ticket_text(derived[1], {"headline"}), "crash in cpu unit\nentry 0 cpu\nentry 1 cpu");
}

class FeatureSpecTest : public ::testing::TestWithParam<TextMode> {};

TEST_P(FeatureSpecTest, WidthNamesRoundTripAndParallelAgreement) {
  std::vector<BaseTicket> tickets;
  for (int i = 0; i < 12; ++i) tickets.push_back(testing::make_ticket(std::to_string(i), 1 + i % 4, 1'600'000'000 + i, i % 2 ? "io" : "cpu"));
  const auto train = derived_of(tickets);
  FeatureOptions o;
  o.text_mode = GetParam();
  o.tfidf_top_k = 5;
  o.word2vec.dim = 4;
  o.word2vec.epochs = 1;
  auto store = std::make_shared<ExternalEmbeddingStore>();
  for (const auto& d : train) store->insert(embedding_key(d.base_id, d.prefix_len), {1.0 * d.prefix_len, 2.0});
  const auto spec = FeatureSpec::fit(train, testing::basic_schema(), o, store);
  const auto v = spec.assemble(train[0]);
  EXPECT_EQ(v.values.size(), spec.output_dim());
  EXPECT_EQ(v.feature_names->size(), spec.output_dim());

  const Matrix a = spec.assemble_batch(train, Execution::serial);
  EXPECT_EQ(a, spec.assemble_batch(train, Execution::parallel));
  const auto back = FeatureSpec::from_json(spec.to_json(), store);
  EXPECT_EQ(back.hash(), spec.hash());
  EXPECT_EQ(back.assemble_batch(train), a);
}

INSTANTIATE_TEST_SUITE_P(TextModes, FeatureSpecTest,
                         ::testing::Values(TextMode::none, TextMode::tfidf, TextMode::word2vec,
                                           TextMode::external_embedding));

TEST(FeatureSpec, FittedOnTrainingTicketsOnly) {
  const std::vector<BaseTicket> train_tickets = {testing::make_ticket("1", 2, 1'600'000'000, "cpu"),
                                                 testing::make_ticket("2", 2, 1'600'000'000, "io")};
  const auto spec = FeatureSpec::fit(derived_of(train_tickets), testing::basic_schema(), {});
  const auto test = expand_ticket(testing::make_ticket("3", 2, 1'600'000'000, "gpu"));
  const auto& names = spec.feature_names();
  EXPECT_EQ(std::count(names.begin(), names.end(), "cat:component=gpu"), 0);
  const auto unseen = std::find(names.begin(), names.end(), "cat:component=<unseen>") - names.begin();
  ASSERT_LT(static_cast<std::size_t>(unseen), names.size());
  EXPECT_EQ(spec.assemble(test[0]).values[static_cast<std::size_t>(unseen)], 1.0);
}

TEST(FeatureSpec, MissingNumericalGetsIndicator) {
  auto t = testing::make_ticket("1", 1);
  auto u = testing::make_ticket("2", 1);
  u.static_fields.erase("effort");
  const auto spec = FeatureSpec::fit(derived_of({t, u}), testing::basic_schema(), {});
  const auto x = spec.assemble(expand_ticket(u)[0]).values;
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[1], 1.0);
  EXPECT_EQ(spec.assemble(expand_ticket(t)[0]).values[1], 0.0);
}

TEST(FeatureOptions, JsonRoundTripAndUnknownKeys) {
  FeatureOptions o;
  o.text_mode = TextMode::tfidf;
  o.tfidf_top_k = 17;
  o.force_keep = {"effort"};
  o.categorical_mappings["component"] = {{"a", "x"}};
  const auto back = feature_options_from_json(feature_options_to_json(o));
  EXPECT_EQ(back.tfidf_top_k, 17u);
  EXPECT_EQ(back.text_mode, TextMode::tfidf);
  EXPECT_EQ(back.force_keep, o.force_keep);
  EXPECT_EQ(back.categorical_mappings, o.categorical_mappings);
  EXPECT_THROW(feature_options_from_json(nlohmann::json{{"tfidf_topk", 3}}), ConfigError);
  EXPECT_THROW(feature_options_from_json(nlohmann::json{{"text_mode", "bert"}}), ConfigError);
}

}  // namespace
}  // namespace triage
