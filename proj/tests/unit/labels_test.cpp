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
#include <random>
#include <sstream>

#include "triage/errors.hpp"
#include "triage/labels.hpp"
#include "test_util.hpp"

namespace triage {
namespace {

// Smallest sample value v with #{x <= v} >= q n, found by scanning.
double oracle_lower_quantile(const std::vector<double>& xs, double q) {
  std::vector<double> cands = xs;
  std::sort(cands.begin(), cands.end());
  for (double v : cands) {
    std::size_t le = 0;
    for (double x : xs) le += x <= v;
    if (static_cast<double>(le) >= q * static_cast<double>(xs.size()) - 1e-9) return v;
  }
  return cands.back();
}

TEST(Binning, UniformOneToHundredGivesQuintileBoundaries) {
  std::vector<double> days;
  for (int i = 100; i >= 1; --i) days.push_back(i);
  const auto b = fit_binning(days);
  const std::array<double, 4> expected = {20, 40, 60, 80};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(b.boundaries[i], expected[i], 1.0);
}

TEST(Binning, BoundariesMatchBruteForceOracleExactly) {
  std::mt19937_64 rng(21);
  std::exponential_distribution<double> ex(0.1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(5 + rng() % 400);
    for (auto& x : xs) x = trial % 3 == 0 ? std::floor(ex(rng)) : ex(rng);  // ties on every third trial
    const auto b = fit_binning(xs);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(b.boundaries[i], oracle_lower_quantile(xs, b.quantiles[i])) << "trial " << trial;
    }
  }
}

TEST(Binning, ClassFrequenciesAreOneFifthOnFittedSample) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 365.0);
  for (std::size_t n : {50u, 137u, 1000u}) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = u(rng);
    const auto b = fit_binning(xs);
    std::array<int, 5> counts{};
    for (double x : xs) ++counts[static_cast<std::size_t>(b.assign(x))];
    for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / static_cast<double>(n), 0.2, 1.0 / static_cast<double>(n));
  }
}

TEST(Binning, AssignUsesUpperInclusiveBins) {
  FixingTimeBinning b;
  b.boundaries = {1, 2, 3, 4};
  EXPECT_EQ(b.assign(1.0), 0);
  EXPECT_EQ(b.assign(1.5), 1);
  EXPECT_EQ(b.assign(4.0), 3);
  EXPECT_EQ(b.assign(100.0), 4);
  EXPECT_EQ(FixingTimeBinning::from_json(b.to_json()).boundaries, b.boundaries);
  EXPECT_THROW(fit_binning({1, 2, 3}), std::invalid_argument);
}

TEST(FixingTime, DaysFromObservationToClose) {
  const auto base = testing::make_ticket("7", 3);
  const auto derived = expand_ticket(base);
  // Closed one day after the last event, events one hour apart.
  EXPECT_NEAR(fixing_time_days(derived[2], base), 1.0, 1e-12);
  EXPECT_NEAR(fixing_time_days(derived[0], base), 1.0 + 2.0 / 24.0, 1e-12);
  auto other = testing::make_ticket("8", 1);
  EXPECT_THROW(fixing_time_days(derived[0], other), DataError);
}

TEST(ExpertLabels, ParsesRiskNamesAndComplexityRange) {
  const auto l = expert_labels_from_json(nlohmann::json::parse(R"({"risk":"Code Fix","debug":0,"resolution":10})"));
  EXPECT_EQ(l.risk, RiskLabel::code_fix);
  EXPECT_EQ(l.debug, 0);
  EXPECT_EQ(l.resolution, 10);
  EXPECT_THROW(expert_labels_from_json(nlohmann::json::parse(R"({"debug":11})")), DataError);
  EXPECT_THROW(expert_labels_from_json(nlohmann::json::parse(R"({"risk":"meteor"})")), DataError);
  EXPECT_THROW(expert_labels_from_json(nlohmann::json::parse(R"({"debug":2.5})")), DataError);
}

TEST(ExpertLabels, AttachRejectsUnknownIdsAndMergesRows) {
  Corpus corpus({testing::make_ticket("1", 2), testing::make_ticket("2", 2)});
  std::istringstream good(R"({"base_id":"1","risk":"waiver"}
{"base_id":1,"debug":4}
{"base_id":"2","resolution":3})");
  const auto labels = attach_expert_labels(corpus, good);
  EXPECT_EQ(labels.at("1").risk, RiskLabel::waiver);
  EXPECT_EQ(labels.at("1").debug, 4);
  EXPECT_FALSE(labels.at("2").risk.has_value());

  std::istringstream bad(R"({"base_id":"99","risk":"waiver"})");
  EXPECT_THROW(attach_expert_labels(corpus, bad), DataError);
}

TEST(ExpertLabels, DerivedTicketsInheritBaseLabels) {
  Corpus corpus({testing::make_ticket("1", 3)});
  ExpertLabels expert;
  expert["1"].debug = 6;
  const auto derived = expand_corpus(corpus);
  FixingTimeBinning b;
  b.boundaries = {0.5, 1.02, 1.06, 2};
  const auto labels = label_derived(derived, corpus, expert, b);
  ASSERT_EQ(labels.size(), 3u);
  for (const auto& l : labels) EXPECT_EQ(l.debug, 6);
  EXPECT_EQ(labels[0].fixing_time_class, 3);  // 1.083 days
  EXPECT_EQ(labels[1].fixing_time_class, 2);  // 1.042 days
  EXPECT_EQ(labels[2].fixing_time_class, 1);  // 1.000 days
}

TEST(Targets, NamesAndClassCounts) {
  EXPECT_EQ(num_classes(Target::time_to_fix), 5u);
  EXPECT_EQ(num_classes(Target::risk), 6u);
  EXPECT_EQ(num_classes(Target::debug), 11u);
  EXPECT_EQ(target_from_string("resolution"), Target::resolution);
  EXPECT_THROW(target_from_string("severity"), ConfigError);
  EXPECT_EQ(class_names(Target::risk).front(), "hardware_fix");
}

TEST(Coarsening, MapsComplexityToGroups) {
  ComplexityCoarsening c;
  c.group = {0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  EXPECT_EQ(c.apply(5), 1);
  EXPECT_EQ(c.num_groups(), 3u);
  EXPECT_THROW(c.apply(11), DataError);
}

}  // namespace
}  // namespace triage
