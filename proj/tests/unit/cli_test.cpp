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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "triage/synth.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

using nlohmann::json;

int run(const std::string& args) {
  const std::string cmd = std::string(TRIAGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

TEST(Cli, ExpandWritesEveryPrefix) {
  testing::TempDir dir;
  {
    std::ofstream schema(dir.path() / "schema.json");
    schema << testing::basic_schema().to_json_text();
    std::ofstream corpus(dir.path() / "corpus.jsonl");
    for (int i = 1; i <= 10; ++i) corpus << ticket_to_json(testing::make_ticket(std::to_string(i), i)).dump() << "\n";
  }
  EXPECT_EQ(run("expand --schema " + dir.str("schema.json") + " --in " + dir.str("corpus.jsonl") + " --out " +
                dir.str("derived.jsonl")),
            0);
  EXPECT_EQ(count_lines(dir.path() / "derived.jsonl"), 55u);
  EXPECT_EQ(run("expand --in " + dir.str("corpus.jsonl") + " --out " + dir.str("inferred.jsonl")), 0);
  EXPECT_EQ(count_lines(dir.path() / "inferred.jsonl"), 55u);
}

TEST(Cli, ErrorsGiveNonZeroExitCodes) {
  testing::TempDir dir;
  EXPECT_NE(run("expand --in " + dir.str("missing.jsonl") + " --out " + dir.str("x.jsonl")), 0);
  EXPECT_NE(run("featurize --config " + dir.str("missing.json") + " --out " + dir.str("d")), 0);
  EXPECT_NE(run("no-such-command"), 0);
  EXPECT_NE(run("train"), 0);
  std::ofstream(dir.path() / "bad.json") << R"({"model": "rf", "unknown": 1})";
  EXPECT_EQ(run("featurize --config " + dir.str("bad.json") + " --out " + dir.str("d")), 2);
}

TEST(Cli, TrainWithPresetAndReproducibleEval) {
  testing::TempDir dir;
  SynthOptions o;
  o.n_tickets = 50;
  o.seed = 8;
  o.max_events = 5;
  write_synthetic(generate_synthetic(o), dir.str());
  std::ofstream(dir.path() / "config.json")
      << json{{"schema", "schema.json"},
              {"corpus", "corpus.jsonl"},
              {"labels", "labels.jsonl"},
              {"features", {{"text_mode", "tfidf"}, {"tfidf_top_k", 20}}},
              {"seed", 3}}
             .dump();
  const std::string cfg = " --config " + dir.str("config.json");
  ASSERT_EQ(run("featurize" + cfg + " --out " + dir.str("data")), 0);
  ASSERT_EQ(run("label-extract" + cfg + " --data " + dir.str("data")), 0);
  ASSERT_EQ(run("train" + cfg + " --data " + dir.str("data") + " --out " + dir.str("m") +
                " --preset paper-rf-debug --target debug"),
            0);
  const auto trained = json::parse(slurp(dir.path() / "m" / "train.json"));
  const auto& params = trained["models"]["debug"]["params"];
  EXPECT_EQ(params["max_depth"], 10);
  EXPECT_EQ(params["max_features"], "sqrt");
  EXPECT_EQ(params["n_estimators"], 297);
  EXPECT_EQ(params["criterion"], "entropy");
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "m" / "debug.model"));

  const std::string ev = "eval --model " + dir.str("m") + " --test " + dir.str("data") + " --out ";
  ASSERT_EQ(run(ev + dir.str("a.json")), 0);
  ASSERT_EQ(run(ev + dir.str("b.json")), 0);
  EXPECT_EQ(slurp(dir.path() / "a.json"), slurp(dir.path() / "b.json"));
  const auto report = json::parse(slurp(dir.path() / "a.json"));
  EXPECT_TRUE(report["targets"].contains("debug"));

  EXPECT_NE(run("eval --model " + dir.str("m") + " --test " + dir.str("nowhere")), 0);
}

}  // namespace
}  // namespace triage
