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
#include <future>
#include <thread>

#include "httplib.h"
#include "triage/errors.hpp"
#include "triage/service.hpp"
#include "triage/synth.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

using nlohmann::json;

struct ServiceFixture : ::testing::Test {
  testing::TempDir data;
  testing::TempDir root;
  SynthCorpus synth = [] {
    SynthOptions o;
    o.n_tickets = 40;
    o.seed = 33;
    o.max_events = 5;
    return generate_synthetic(o);
  }();

  void SetUp() override {
    write_synthetic(synth, data.str());
    std::ofstream(data.path() / "config.json") << config().dump();
  }

  static json config(json params = {{"n_estimators", 8}}, std::size_t initial_pool = 10) {
    return {{"schema", "schema.json"},   {"corpus", "corpus.jsonl"}, {"labels", "labels.jsonl"},
            {"model", "rf"},             {"params", params},         {"seed", 2},
            {"al", {{"initial_pool", initial_pool}}}};
  }

  ServiceOptions options() const {
    ServiceOptions o;
    o.root_dir = root.str();
    o.config_base_dir = data.str();
    return o;
  }

  static json body(const HttpResponse& r) { return json::parse(r.body); }

  static json expert_json(const LabelSet& l) { return expert_labels_to_json(l); }
};

TEST_F(ServiceFixture, HealthAndRouting) {
  Service s(options());
  EXPECT_EQ(s.handle("GET", "/healthz", "").status, 200);
  EXPECT_EQ(s.handle("GET", "/nope", "").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/healthz", "").status, 405);
  EXPECT_EQ(s.handle("PUT", "/sessions", "{}").status, 405);
  EXPECT_EQ(s.handle("GET", "/sessions/missing", "").status, 404);
  const auto bad = s.handle("POST", "/sessions", "{not json");
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(body(bad)["error"], "invalid_json");
  EXPECT_EQ(s.handle("POST", "/sessions", "{}").status, 400);
  EXPECT_EQ(body(s.handle("POST", "/sessions", R"({"config_path": "nope.json"})"))["error"], "config");
  EXPECT_EQ(s.handle("POST", "/sessions", R"({"config_path": "config.json", "session_id": "../x"})").status, 400);
}

TEST_F(ServiceFixture, LabelingLoopWithConflicts) {
  Service s(options());
  const auto created = s.handle("POST", "/sessions", R"({"config_path": "config.json", "session_id": "s1"})");
  ASSERT_EQ(created.status, 201) << created.body;
  EXPECT_EQ(body(created)["pool"]["labeled"], 10);
  EXPECT_EQ(s.handle("POST", "/sessions", R"({"config_path": "config.json", "session_id": "s1"})").status, 409);
  EXPECT_EQ(body(s.handle("GET", "/sessions", ""))["sessions"].size(), 1u);

  const auto p1 = body(s.handle("GET", "/sessions/s1/proposal", ""));
  EXPECT_EQ(body(s.handle("GET", "/sessions/s1/proposal", "")), p1);
  const std::string id = p1["base_id"];
  EXPECT_EQ(p1["ticket"]["id"], id);
  EXPECT_EQ(p1["session_version"], 0);

  json submit = {{"base_id", id}, {"labels", expert_json(synth.labels.at(id))}, {"session_version", 0}};
  submit["labels"].erase("fixing_time");
  const auto ok = s.handle("POST", "/sessions/s1/labels", submit.dump());
  ASSERT_EQ(ok.status, 200) << ok.body;
  EXPECT_EQ(body(ok)["session_version"], 1);
  EXPECT_TRUE(body(ok)["fully_labeled"].get<bool>());

  const auto stale = s.handle("POST", "/sessions/s1/labels", submit.dump());
  EXPECT_EQ(stale.status, 409);
  EXPECT_EQ(body(stale)["error"], "conflict");
  EXPECT_EQ(body(s.handle("GET", "/sessions/s1", ""))["session_version"], 1);

  json unknown_key = submit;
  unknown_key["session_version"] = 1;
  unknown_key["labels"]["time_to_fix"] = 1;
  EXPECT_EQ(s.handle("POST", "/sessions/s1/labels", unknown_key.dump()).status, 400);
  json no_version = submit;
  no_version.erase("session_version");
  EXPECT_EQ(s.handle("POST", "/sessions/s1/labels", no_version.dump()).status, 400);

  EXPECT_NE(body(s.handle("GET", "/sessions/s1/proposal", ""))["base_id"], id);

  const auto csv = s.handle("GET", "/sessions/s1/curve", "", {{"format", "csv"}});
  EXPECT_EQ(csv.status, 200);
  EXPECT_EQ(csv.body.rfind("n_labeled,target,f1,strategy,seed\n", 0), 0u);
  EXPECT_EQ(s.handle("GET", "/sessions/s1/curve", "", {{"format", "xml"}}).status, 400);
}

TEST_F(ServiceFixture, ExhaustedSessionReturns410) {
  Service s(options());
  const json req = {{"config", config({{"n_estimators", 4}}, 1000)}, {"session_id", "full"}};
  ASSERT_EQ(s.handle("POST", "/sessions", req.dump()).status, 201);
  const auto r = s.handle("GET", "/sessions/full/proposal", "");
  EXPECT_EQ(r.status, 410);
  EXPECT_EQ(body(r)["error"], "exhausted");
}

TEST_F(ServiceFixture, PredictValidatesTicketsWithPaths) {
  Service s(options());
  ASSERT_EQ(s.handle("POST", "/sessions", R"({"config_path": "config.json", "session_id": "p"})").status, 201);
  json ticket = ticket_to_json(synth.corpus.tickets().front());
  ticket["events"][0]["t"] = "yesterday";
  const auto r = s.handle("POST", "/predict", json{{"session_id", "p"}, {"ticket", ticket}}.dump());
  ASSERT_EQ(r.status, 400);
  EXPECT_EQ(body(r)["error"], "validation");
  EXPECT_EQ(body(r)["issues"][0]["path"], "events[0].t");

  EXPECT_EQ(s.handle("POST", "/predict", json{{"ticket", ticket}}.dump()).status, 400);
  EXPECT_EQ(s.handle("POST", "/predict", json{{"session_id", "zz"}, {"ticket", ticket}}.dump()).status, 404);
}

TEST_F(ServiceFixture, SingleUnprunedTreeMemorizesTrainingTickets) {
  Service s(options());
  const json params = {{"n_estimators", 1}, {"bootstrap", false}, {"max_features", "all"}, {"max_depth", nullptr}};
  const json req = {{"config", config(params, 1000)}, {"session_id", "memo"}};
  ASSERT_EQ(s.handle("POST", "/sessions", req.dump()).status, 201);
  for (const auto& t : synth.corpus.tickets()) {
    if (std::stoi(t.base_id) % 10 == 0) continue;  // held out of the pool
    json ticket = ticket_to_json(t);
    ticket.erase("closed_at");
    const auto r = s.handle("POST", "/predict", json{{"session_id", "memo"}, {"ticket", ticket}}.dump());
    ASSERT_EQ(r.status, 200) << r.body;
    const auto pred = body(r)["predictions"];
    const auto& truth = synth.labels.at(t.base_id);
    for (Target target : kExpertTargets) {
      const auto& p = pred[to_string(target)];
      EXPECT_EQ(p["class"], *truth.get(target)) << t.base_id;
      EXPECT_DOUBLE_EQ(p["probabilities"][*truth.get(target)].get<double>(), 1.0);
      EXPECT_DOUBLE_EQ(p["entropy"].get<double>(), 0.0);
    }
  }
}

TEST_F(ServiceFixture, SessionsSurviveRestart) {
  json proposal;
  {
    Service s(options());
    ASSERT_EQ(s.handle("POST", "/sessions", R"({"config_path": "config.json", "session_id": "keep"})").status, 201);
    const auto p = body(s.handle("GET", "/sessions/keep/proposal", ""));
    const std::string id = p["base_id"];
    json submit = {{"base_id", id}, {"labels", {{"risk", "waiver"}}}, {"session_version", 0}};
    ASSERT_EQ(s.handle("POST", "/sessions/keep/labels", submit.dump()).status, 200);
    proposal = body(s.handle("GET", "/sessions/keep/proposal", ""));
  }
  std::filesystem::create_directories(root.path() / "broken");
  std::ofstream(root.path() / "broken" / "session.json") << "{";
  Service again(options());
  EXPECT_EQ(again.num_sessions(), 1u);
  EXPECT_EQ(again.load_failures().count("broken"), 1u);
  const auto d = body(again.handle("GET", "/sessions/keep", ""));
  EXPECT_EQ(d["session_version"], 1);
  EXPECT_EQ(d["pool"]["partially_labeled"], 1);
  EXPECT_EQ(body(again.handle("GET", "/sessions/keep/proposal", "")), proposal);
}

TEST_F(ServiceFixture, LiveHttpServer) {
  Service s(options());
  HttpServer server(s);
  std::promise<int> bound;
  std::thread t([&] { server.listen("127.0.0.1", 0, [&](int port) { bound.set_value(port); }); });
  const int port = bound.get_future().get();
  httplib::Client client("127.0.0.1", port);
  auto h = client.Get("/healthz");
  ASSERT_TRUE(h);
  EXPECT_EQ(h->status, 200);
  auto c = client.Post("/sessions", R"({"config_path": "config.json"})", "application/json");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->status, 201);
  const std::string sid = json::parse(c->body)["session_id"];
  EXPECT_EQ(sid, "session-1");
  auto p = client.Get("/sessions/" + sid + "/proposal");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->status, 200);
  auto nf = client.Get("/missing");
  ASSERT_TRUE(nf);
  EXPECT_EQ(nf->status, 404);
  server.stop();
  t.join();
}

TEST(ModelBundle, MissingDirectoryIsModelFormatError) {
  testing::TempDir d;
  EXPECT_THROW(ModelBundle::load(d.str()), ModelFormatError);
}

}  // namespace
}  // namespace triage
