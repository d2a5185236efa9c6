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

#include <cmath>
#include <sstream>

#include "triage/errors.hpp"
#include "triage/hpo.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

using nlohmann::json;

SearchSpace toy_space() {
  SearchSpace s;
  s.dims = {Dimension::int_uniform("x", 0, 100), Dimension::log_uniform("y", 1e-3, 1e3),
            Dimension::categorical("c", {"a", "b", "c"})};
  return s;
}

// Peak 0.5 at x = 73, y = 10^1.2, c = "b".
double toy_value(const json& p) {
  const double x = p.at("x").get<double>();
  const double ly = std::log10(p.at("y").get<double>());
  return -(x - 73) * (x - 73) / 100.0 - (ly - 1.2) * (ly - 1.2) + (p.at("c") == "b" ? 0.5 : 0.0);
}

Objective toy_objective() {
  return [](const json& p, std::uint64_t) { return std::vector<double>{toy_value(p)}; };
}

TEST(SearchSpace, ValidationRejectsBadDimensions) {
  SearchSpace s;
  s.dims = {Dimension::int_uniform("x", 5, 1)};
  EXPECT_THROW(s.validate(), ConfigError);
  s.dims = {Dimension::log_uniform("y", 0.0, 1.0)};
  EXPECT_THROW(s.validate(), ConfigError);
  s.dims = {Dimension::categorical("c", {})};
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_NO_THROW(rf_search_space().validate());
  EXPECT_NO_THROW(mlp_search_space().validate());
}

TEST(SearchSpace, PublishedRangesAreEncoded) {
  const auto rf = rf_search_space();
  EXPECT_TRUE(rf.contains({{"max_depth", "None"}, {"max_features", "log2"}, {"n_estimators", 1000}, {"criterion", "gini"}}));
  EXPECT_FALSE(rf.contains({{"max_depth", 15}, {"max_features", "log2"}, {"n_estimators", 10}, {"criterion", "gini"}}));
  EXPECT_FALSE(rf.contains({{"max_depth", 10}, {"max_features", "log2"}, {"n_estimators", 1001}, {"criterion", "gini"}}));
  const auto mlp = mlp_search_space();
  EXPECT_TRUE(mlp.contains({{"hidden_layer_sizes", 10}, {"alpha", 1e-8}, {"activation", "tanh"}, {"solver", "sgd"}}));
  EXPECT_FALSE(mlp.contains({{"hidden_layer_sizes", 301}, {"alpha", 1.0}, {"activation", "tanh"}, {"solver", "sgd"}}));
  EXPECT_FALSE(mlp.contains({{"hidden_layer_sizes", 50}, {"alpha", 1e4}, {"activation", "tanh"}, {"solver", "sgd"}}));
}

TEST(Tpe, SuggestionsAlwaysInDomain) {
  for (const auto& space : {toy_space(), rf_search_space(), mlp_search_space(), gbt_search_space()}) {
    TpeConfig cfg;
    cfg.budget = 40;
    cfg.n_startup_trials = 5;
    cfg.seed = 3;
    std::vector<Trial> history;
    for (std::size_t i = 0; i < 40; ++i) {
      const json p = tpe_suggest(history, space, cfg);
      ASSERT_TRUE(space.contains(p)) << p.dump();
      Trial t;
      t.id = i;
      t.params = p;
      t.objective = std::sin(static_cast<double>(i));
      history.push_back(t);
    }
  }
}

TEST(Tpe, StartupPhaseEqualsSeededRandomSearch) {
  TpeConfig cfg;
  cfg.budget = 10;
  cfg.n_startup_trials = 10;
  cfg.seed = 77;
  const auto tpe = optimize_tpe(toy_space(), toy_objective(), cfg);
  const auto rnd = random_search(toy_space(), toy_objective(), cfg);
  ASSERT_EQ(tpe.trials.size(), rnd.trials.size());
  for (std::size_t i = 0; i < tpe.trials.size(); ++i) {
    EXPECT_EQ(tpe.trials[i].params, rnd.trials[i].params);
    EXPECT_EQ(tpe.trials[i].params, sample_uniform(toy_space(), 77, i));
  }
}

TEST(Tpe, DeterministicGivenSeed) {
  TpeConfig cfg;
  cfg.budget = 30;
  cfg.n_startup_trials = 8;
  cfg.seed = 5;
  const auto a = optimize_tpe(toy_space(), toy_objective(), cfg);
  const auto b = optimize_tpe(toy_space(), toy_objective(), cfg);
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].params, b.trials[i].params);
  EXPECT_EQ(a.best, b.best);
}

TEST(Tpe, BudgetIsRequiredAndMustCoverStartup) {
  TpeConfig cfg;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.budget = 5;
  cfg.n_startup_trials = 10;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Tpe, FailedTrialsScoreMinusInfinityAndSearchContinues) {
  TpeConfig cfg;
  cfg.budget = 12;
  cfg.n_startup_trials = 4;
  const Objective flaky = [](const json& p, std::uint64_t) -> std::vector<double> {
    if (p.at("c") == "a") throw std::runtime_error("diverged");
    return {toy_value(p)};
  };
  const auto r = optimize_tpe(toy_space(), flaky, cfg);
  EXPECT_EQ(r.trials.size(), 12u);
  for (const auto& t : r.trials) {
    if (t.status == TrialStatus::failed) {
      EXPECT_EQ(t.objective, -std::numeric_limits<double>::infinity());
    }
  }
  EXPECT_EQ(r.best_trial().status, TrialStatus::ok);
}

TEST(Tpe, BeatsRandomSearchOnToyObjectiveMostOfTheTime) {
  // Brute-force the optimum on a grid to confirm the objective's peak.
  double grid_best = -1e9;
  for (int x = 0; x <= 100; ++x) {
    for (int e = -30; e <= 30; ++e) {
      for (const char* c : {"a", "b", "c"}) {
        grid_best = std::max(grid_best, toy_value({{"x", x}, {"y", std::pow(10.0, e / 10.0)}, {"c", c}}));
      }
    }
  }
  EXPECT_NEAR(grid_best, 0.5, 1e-9);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TpeConfig cfg;
    cfg.budget = 50;
    cfg.seed = seed;
    const double tpe = optimize_tpe(toy_space(), toy_objective(), cfg).best_trial().objective;
    const double rnd = random_search(toy_space(), toy_objective(), cfg).best_trial().objective;
    EXPECT_LE(tpe, grid_best + 1e-9);
    wins += tpe >= rnd;
  }
  EXPECT_GE(wins, 16);
}

TEST(Presets, RandomForestRowsLoadVerbatim) {
  struct Row {
    const char* target;
    int depth;
    MaxFeatures features;
    int trees;
    SplitCriterion criterion;
  };
  const Row rows[] = {{"time_to_fix", 40, MaxFeatures::sqrt, 877, SplitCriterion::gini},
                      {"risk", 20, MaxFeatures::auto_, 166, SplitCriterion::gini},
                      {"debug", 10, MaxFeatures::sqrt, 297, SplitCriterion::entropy},
                      {"resolution", 10, MaxFeatures::sqrt, 215, SplitCriterion::entropy}};
  for (const auto& r : rows) {
    const auto p = std::get<RandomForestParams>(load_preset(ModelKind::random_forest, r.target));
    EXPECT_EQ(p.max_depth, r.depth);
    EXPECT_EQ(p.max_features, r.features);
    EXPECT_EQ(p.n_estimators, r.trees);
    EXPECT_EQ(p.criterion, r.criterion);
  }
  EXPECT_EQ(preset_by_name("paper-rf-debug"), load_preset(ModelKind::random_forest, "debug"));
}

TEST(Presets, MlpRowsLoadVerbatim) {
  struct Row {
    const char* target;
    int hidden;
    double alpha;
    Solver solver;
  };
  const Row rows[] = {{"time_to_fix", 36, 3.8183, Solver::adam},
                      {"risk", 0, 0.0332, Solver::adam},
                      {"debug", 27, 0.1409, Solver::sgd},
                      {"resolution", 32, 0.0005, Solver::lbfgs}};
  for (const auto& r : rows) {
    const auto p = std::get<MlpParams>(load_preset(ModelKind::mlp, r.target));
    EXPECT_EQ(p.hidden_layer_sizes, r.hidden);
    EXPECT_EQ(p.alpha, r.alpha);
    EXPECT_EQ(p.activation, Activation::relu);
    EXPECT_EQ(p.solver, r.solver);
  }
  EXPECT_THROW(load_preset(ModelKind::mlp, "severity"), ConfigError);
  EXPECT_THROW(load_preset(ModelKind::svm, "risk"), ConfigError);
  EXPECT_THROW(preset_by_name("paper-knn-risk"), ConfigError);
}

TEST(CrossValidation, ObjectiveReturnsOneScorePerFoldAndTuneLogsTrials) {
  const Dataset ds = testing::two_gaussians(60, 2, 3.0, 2);
  const auto obj = cv_objective(ModelKind::gbt, ds, 4, 1);
  const auto scores = obj({{"n_rounds", 10}, {"learning_rate", 0.3}, {"max_depth", 2}}, 9);
  ASSERT_EQ(scores.size(), 4u);
  for (double s : scores) EXPECT_GT(s, 0.8);

  TpeConfig cfg;
  cfg.budget = 4;
  cfg.n_startup_trials = 2;
  const auto r = tune(ModelKind::gbt, gbt_search_space(), ds, 3, cfg, Execution::serial);
  std::ostringstream out;
  write_trials_csv(out, r.trials);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial_id,params,fold_scores,mean_f1,status,seed");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 4);
}

}  // namespace
}  // namespace triage
