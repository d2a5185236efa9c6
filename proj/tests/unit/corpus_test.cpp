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

#include <random>
#include <set>
#include <sstream>

#include "triage/corpus.hpp"
#include "triage/errors.hpp"
#include "triage/timeutil.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

using nlohmann::json;

std::string ticket_line(const std::string& id, int n_events) {
  json events = json::array();
  for (int i = 0; i < n_events; ++i) {
    events.push_back({{"t", "2021-03-0" + std::to_string(1 + i % 9) + "T10:00:00Z"},
                      {"changes", json::object()},
                      {"text", "note " + std::to_string(i)}});
  }
  return json{{"id", id},
              {"static", {{"component", "gpu"}, {"priority", "p1"}, {"effort", 3.5}, {"headline", "hang"}}},
              {"events", events},
              {"closed_at", "2021-04-01"}}
      .dump();
}

TEST(TimeUtil, ParsesDatesOffsetsAndRejectsGarbage) {
  EXPECT_EQ(parse_iso8601("1970-01-02"), 86400);
  EXPECT_EQ(parse_iso8601("1970-01-01T01:00:00Z"), 3600);
  EXPECT_EQ(parse_iso8601("1970-01-01T01:00:00+01:00"), 0);
  EXPECT_EQ(parse_iso8601("1970-01-01 00:00:05.999"), 5);
  EXPECT_FALSE(parse_iso8601("2021-02-30").has_value());
  EXPECT_FALSE(parse_iso8601("yesterday").has_value());
  EXPECT_EQ(format_iso8601(1'600'000'000), "2020-09-13T12:26:40Z");
}

TEST(Ingest, AcceptsValidRecordsAndReportsRejectionsWithLineNumbers) {
  std::ostringstream src;
  src << ticket_line("1", 3) << "\n";
  src << "not json\n";
  src << json{{"id", "2"}, {"static", json::object()}, {"events", json::array()}, {"closed_at", "2021-01-01"}}.dump()
      << "\n\n";
  src << ticket_line("3", 2) << "\n";
  std::istringstream in(src.str());
  const auto r = ingest_corpus(in, testing::basic_schema());
  EXPECT_EQ(r.corpus.size(), 2u);
  ASSERT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.rejected[0].line, 2u);
  EXPECT_EQ(r.rejected[1].line, 3u);
  EXPECT_EQ(r.rejected[1].base_id, "2");
}

TEST(Ingest, DuplicateBaseIdAborts) {
  std::istringstream in(ticket_line("5", 1) + "\n" + ticket_line("5", 2) + "\n");
  EXPECT_THROW(ingest_corpus(in, testing::basic_schema()), DataError);
}

TEST(Ingest, WriteThenIngestReproducesCorpus) {
  Corpus c({testing::make_ticket("1", 3), testing::make_ticket("2", 1, 1'700'000'000, "io")});
  std::ostringstream out;
  write_corpus(out, c);
  std::istringstream in(out.str());
  const auto r = ingest_corpus(in, testing::basic_schema());
  EXPECT_TRUE(r.rejected.empty());
  EXPECT_EQ(r.corpus, c);
}

TEST(Validation, ReportsFieldPaths) {
  const json bad = json::parse(R"({
    "id": "",
    "static": {"effort": "lots", "colour": "red"},
    "events": [{"t": "2021-01-02"}, {"t": "2021-01-01", "text": 5, "changes": []}],
    "closed_at": "2020-01-01"})");
  const auto issues = validate_ticket_json(bad, testing::basic_schema());
  std::set<std::string> paths;
  for (const auto& i : issues) paths.insert(i.path);
  for (const char* p : {"id", "static.effort", "static.colour", "events[1].t", "events[1].text", "events[1].changes",
                        "closed_at"}) {
    EXPECT_TRUE(paths.count(p)) << p;
  }
  EXPECT_THROW(ticket_from_json(bad, testing::basic_schema()), SchemaError);
}

TEST(Validation, OpenTicketNeedsNeitherIdNorClose) {
  const json open = json::parse(R"({"static": {"component": "cpu"}, "events": [{"t": "2021-01-02T03:04:05Z"}]})");
  EXPECT_TRUE(validate_ticket_json(open, testing::basic_schema(), false).empty());
  EXPECT_FALSE(validate_ticket_json(open, testing::basic_schema(), true).empty());
  const auto d = open_ticket_from_json(open, testing::basic_schema());
  EXPECT_EQ(d.prefix_len, 1u);
  EXPECT_EQ(d.observation_time, *parse_iso8601("2021-01-02T03:04:05Z"));
}

TEST(Expansion, CountEqualsEventCountOnTenBaseFiftyFiveEventCorpus) {
  std::vector<BaseTicket> tickets;
  for (std::size_t i = 1; i <= 10; ++i) tickets.push_back(testing::make_ticket(std::to_string(i), i));
  const Corpus corpus(tickets);
  EXPECT_EQ(expand_corpus(corpus).size(), 55u);
}

TEST(Expansion, PrefixesAreFaithful) {
  const auto base = testing::make_ticket("42", 6);
  const auto derived = expand_ticket(base);
  ASSERT_EQ(derived.size(), 6u);
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto& d = derived[k - 1];
    EXPECT_EQ(d.base_id, "42");
    EXPECT_EQ(d.prefix_len, k);
    EXPECT_EQ(d.events, std::vector<TicketEvent>(base.events.begin(), base.events.begin() + static_cast<long>(k)));
    EXPECT_EQ(d.static_fields, base.static_fields);
    EXPECT_EQ(d.observation_time, base.events[k - 1].timestamp);
  }
  EXPECT_EQ(full_history(base), derived.back());
}

TEST(Split, EveryTenthOfIdsOneToTwentyIsTest) {
  std::vector<std::string> ids;
  for (int i = 20; i >= 1; --i) ids.push_back(std::to_string(i));
  const auto s = split_holdout(ids);
  EXPECT_EQ(s.test_base_ids, (std::vector<std::string>{"10", "20"}));
  EXPECT_EQ(s.train_base_ids.size(), 18u);
}

TEST(Split, NumericIdsSortNumericallyAndMixedIdsLexicographically) {
  EXPECT_EQ(sort_base_ids({"10", "9", "100"}), (std::vector<std::string>{"9", "10", "100"}));
  EXPECT_EQ(sort_base_ids({"b", "10", "9"}), (std::vector<std::string>{"10", "9", "b"}));
}

TEST(Split, NoBaseIdLeaksAcrossHoldoutOrFoldsOnRandomCorpora) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<BaseTicket> tickets;
    std::set<std::string> used;
    while (tickets.size() < n) {
      std::string id = rng() % 2 ? std::to_string(rng() % 1000) : "T" + std::to_string(rng() % 1000);
      if (!used.insert(id).second) continue;
      tickets.push_back(testing::make_ticket(id, 1 + rng() % 5));
    }
    const Corpus corpus(tickets);
    const auto split = split_holdout(corpus);
    std::set<std::string> train(split.train_base_ids.begin(), split.train_base_ids.end());
    for (const auto& id : split.test_base_ids) ASSERT_FALSE(train.count(id));
    ASSERT_EQ(train.size() + split.test_base_ids.size(), n);

    // Derived rows inherit the side of their base ticket.
    for (const auto& d : expand_corpus(corpus)) {
      const bool in_train = train.count(d.base_id) > 0;
      const bool in_test = std::count(split.test_base_ids.begin(), split.test_base_ids.end(), d.base_id) > 0;
      ASSERT_NE(in_train, in_test);
    }
    if (split.train_base_ids.size() >= 2) {
      const std::size_t k = 2 + rng() % std::min<std::size_t>(4, split.train_base_ids.size() - 1);
      const auto folds = group_kfold(split.train_base_ids, k, rng());
      std::set<std::string> seen;
      for (const auto& f : folds) {
        for (const auto& id : f) ASSERT_TRUE(seen.insert(id).second) << "id in two folds";
      }
      ASSERT_EQ(seen, train);
    }
  }
}

TEST(Split, FoldSizesDifferByAtMostOneAndDependOnSeedOnly) {
  std::vector<std::string> ids;
  for (int i = 0; i < 23; ++i) ids.push_back(std::to_string(i));
  const auto a = group_kfold(ids, 5, 7);
  auto reversed = ids;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(group_kfold(reversed, 5, 7), a);
  for (const auto& f : a) EXPECT_TRUE(f.size() == 4 || f.size() == 5);
  EXPECT_THROW(group_kfold(ids, 1, 0), std::invalid_argument);
  EXPECT_THROW(group_kfold(ids, 24, 0), std::invalid_argument);
}

TEST(Schema, InferredFromRecords) {
  std::istringstream in(ticket_line("1", 1) + "\n");
  const Schema s = infer_schema(in);
  EXPECT_EQ(s.kind_of("effort"), FieldKind::numerical);
  EXPECT_EQ(s.kind_of("component"), FieldKind::categorical);
  EXPECT_EQ(Schema::from_json_text(s.to_json_text()), s);
}

}  // namespace
}  // namespace triage
